//! Second-order quantities for discrete memoryless wiretap channels.
//!
//! Mutual informations and dispersions are returned in bits and squared
//! bits; internal sums run in nats.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::q_inv;
use crate::probmodel::{total_variation, DiscreteChannel, FiniteDist};

const LOG2E: f64 = std::f64::consts::LOG2_E;

/// Structure tags attached to a wiretap channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiretapTags {
    #[serde(default)]
    pub degraded: bool,
    #[serde(default)]
    pub semi_deterministic: bool,
}

/// A pair of channels `P_{Y|X}`, `P_{Z|X}` on a shared input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct WiretapSpec {
    pub legit: DiscreteChannel,
    pub eve: DiscreteChannel,
    pub tags: WiretapTags,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    legit: DiscreteChannel,
    eve: DiscreteChannel,
    #[serde(default)]
    tags: WiretapTags,
}

impl TryFrom<RawSpec> for WiretapSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        WiretapSpec::new(r.legit, r.eve, r.tags)
    }
}

impl From<WiretapSpec> for RawSpec {
    fn from(w: WiretapSpec) -> Self {
        RawSpec {
            legit: w.legit,
            eve: w.eve,
            tags: w.tags,
        }
    }
}

impl WiretapSpec {
    pub fn new(legit: DiscreteChannel, eve: DiscreteChannel, tags: WiretapTags) -> Result<Self> {
        if legit.input_size() != eve.input_size() {
            return Err(Error::Shape(format!(
                "legitimate channel has {} inputs, eavesdropper channel has {}",
                legit.input_size(),
                eve.input_size()
            )));
        }
        if tags.semi_deterministic {
            let f = legit.deterministic_map().ok_or_else(|| {
                let row = legit
                    .rows()
                    .iter()
                    .position(|r| !r.masses().contains(&1.0))
                    .unwrap_or(0);
                domain(format!(
                    "tagged semi-deterministic but legitimate row {row} is not a point mass"
                ))
            })?;
            let mut hit = vec![false; legit.output_size()];
            for y in f {
                hit[y] = true;
            }
            if let Some(y) = hit.iter().position(|h| !h) {
                return Err(domain(format!(
                    "tagged semi-deterministic but output {y} is never produced"
                )));
            }
        }
        Ok(WiretapSpec { legit, eve, tags })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| domain(format!("wiretap spec: {e}")))
    }

    /// Noiseless legitimate channel and a BSC(`p`) eavesdropper.
    pub fn bsc_wtc(p: f64) -> Result<Self> {
        WiretapSpec::new(
            DiscreteChannel::identity(2),
            DiscreteChannel::bsc(p)?,
            WiretapTags {
                degraded: false,
                semi_deterministic: true,
            },
        )
    }

    pub fn input_size(&self) -> usize {
        self.legit.input_size()
    }
}

// ---------------------------------------------------------------------------
// Information quantities

/// Relative entropy `D(a ‖ b)` in nats.
fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / y).ln())
        .sum()
}

/// `(I, V)` in nats from per-input conditional laws, their mixture, and
/// the input distribution.
fn info_and_var(p: &[f64], rows: &[Vec<f64>], out: &[f64]) -> (f64, f64) {
    let mut i = 0.0;
    let mut v = 0.0;
    for (px, row) in p.iter().zip(rows) {
        if *px == 0.0 {
            continue;
        }
        let d = kl(row, out);
        let m2: f64 = row
            .iter()
            .zip(out)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, o)| w * (w / o).ln().powi(2))
            .sum();
        i += px * d;
        v += px * (m2 - d * d).max(0.0);
    }
    (i, v)
}

fn mixture(p: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for (px, row) in p.iter().zip(rows) {
        for (o, w) in out.iter_mut().zip(row) {
            *o += px * w;
        }
    }
    out
}

fn rows_of(ch: &DiscreteChannel) -> Vec<Vec<f64>> {
    ch.rows().iter().map(|r| r.masses().to_vec()).collect()
}

fn check_input(p: &FiniteDist, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Shape(format!(
            "input distribution has {} symbols, channel has {n} inputs",
            p.len()
        )));
    }
    Ok(())
}

/// `I(P, W)` in bits and the conditional information variance `V(P, W)` in
/// squared bits.
pub fn mutual_info_and_dispersion(p: &FiniteDist, w: &DiscreteChannel) -> Result<(f64, f64)> {
    check_input(p, w.input_size())?;
    let rows = rows_of(w);
    let out = mixture(p.masses(), &rows);
    let (i, v) = info_and_var(p.masses(), &rows, &out);
    Ok((i * LOG2E, v * LOG2E * LOG2E))
}

/// `P_{YZ|X=x}` flattened as `y * |Z| + z` for the conditionally independent
/// coupling.
fn product_rows(wtc: &WiretapSpec) -> Vec<Vec<f64>> {
    product_rows_of(&wtc.legit, &wtc.eve)
}

fn product_rows_of(a: &DiscreteChannel, b: &DiscreteChannel) -> Vec<Vec<f64>> {
    (0..a.input_size())
        .map(|x| {
            let mut r = Vec::with_capacity(a.output_size() * b.output_size());
            for &wy in a.row(x).masses() {
                for &wz in b.row(x).masses() {
                    r.push(wy * wz);
                }
            }
            r
        })
        .collect()
}

/// `(Ĩ, Ṽ)` for a joint channel `P_{YZ|X}` given as rows over `y * nz + z`.
fn conditional_from_joint(p: &[f64], joint: &[Vec<f64>], nz: usize) -> (f64, f64) {
    let ny = joint[0].len() / nz;
    let p_yz = mixture(p, joint);
    let p_z: Vec<f64> = (0..nz)
        .map(|z| (0..ny).map(|y| p_yz[y * nz + z]).sum())
        .collect();
    let mut i = 0.0;
    let mut v = 0.0;
    for (px, row) in p.iter().zip(joint) {
        if *px == 0.0 {
            continue;
        }
        let p_zx: Vec<f64> = (0..nz)
            .map(|z| (0..ny).map(|y| row[y * nz + z]).sum())
            .collect();
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for y in 0..ny {
            for z in 0..nz {
                let w = row[y * nz + z];
                if w == 0.0 {
                    continue;
                }
                let p_ygz = p_yz[y * nz + z] / p_z[z];
                let dens = (w / (p_zx[z] * p_ygz)).ln();
                m1 += w * dens;
                m2 += w * dens * dens;
            }
        }
        i += px * m1;
        v += px * (m2 - m1 * m1).max(0.0);
    }
    (i, v)
}

/// `Ĩ = I(X;Y|Z)` in bits and `Ṽ` in squared bits under the coupling
/// `P_{YZ|X} = P_{Y|X} P_{Z|X}`.
pub fn conditional_info_and_dispersion(p: &FiniteDist, wtc: &WiretapSpec) -> Result<(f64, f64)> {
    check_input(p, wtc.input_size())?;
    let (i, v) = conditional_from_joint(p.masses(), &product_rows(wtc), wtc.eve.output_size());
    Ok((i * LOG2E, v * LOG2E * LOG2E))
}

/// Same as [`conditional_info_and_dispersion`] for an explicitly supplied
/// joint channel, whose rows are indexed by `y * n_z + z`.
pub fn conditional_info_and_dispersion_joint(
    p: &FiniteDist,
    joint: &DiscreteChannel,
    n_z: usize,
) -> Result<(f64, f64)> {
    check_input(p, joint.input_size())?;
    if n_z == 0 || !joint.output_size().is_multiple_of(n_z) {
        return Err(Error::Shape(format!(
            "{} joint outputs do not split into |Z| = {n_z}",
            joint.output_size()
        )));
    }
    let (i, v) = conditional_from_joint(p.masses(), &rows_of(joint), n_z);
    Ok((i * LOG2E, v * LOG2E * LOG2E))
}

/// `H(Y|Z)` in bits for the coupling `P_{YZ|X} = P_{Y|X} P_{Z|X}`.
pub fn conditional_entropy_y_given_z(p: &FiniteDist, wtc: &WiretapSpec) -> Result<f64> {
    check_input(p, wtc.input_size())?;
    let nz = wtc.eve.output_size();
    let p_yz = mixture(p.masses(), &product_rows(wtc));
    let ny = p_yz.len() / nz;
    let mut h = 0.0;
    for z in 0..nz {
        let pz: f64 = (0..ny).map(|y| p_yz[y * nz + z]).sum();
        for y in 0..ny {
            let v = p_yz[y * nz + z];
            if v > 0.0 {
                h -= v * (v / pz).ln();
            }
        }
    }
    Ok(h * LOG2E)
}

// ---------------------------------------------------------------------------
// Capacity optimization

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Objective and gradient (nats) over the input simplex.
trait SimplexObjective: Sync {
    fn value(&self, p: &[f64]) -> f64;
    fn grad(&self, p: &[f64]) -> Vec<f64>;
}

/// `I(P, W1) − I(P, W2)`.
struct InfoDifference {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl SimplexObjective for InfoDifference {
    fn value(&self, p: &[f64]) -> f64 {
        info_and_var(p, &self.a, &mixture(p, &self.a)).0
            - info_and_var(p, &self.b, &mixture(p, &self.b)).0
    }
    fn grad(&self, p: &[f64]) -> Vec<f64> {
        let oa = mixture(p, &self.a);
        let ob = mixture(p, &self.b);
        self.a
            .iter()
            .zip(&self.b)
            .map(|(ra, rb)| kl(ra, &oa) - kl(rb, &ob))
            .collect()
    }
}

/// Finds `max_P f(P)` from many Dirichlet starts.
struct AscentResult {
    best_p: Vec<f64>,
    best: f64,
    spread: f64,
    non_unique: bool,
}

fn ascend(obj: &dyn SimplexObjective, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut p = start;
    let mut f = obj.value(&p);
    let mut step = 1.0;
    for _ in 0..5000 {
        let g = obj.grad(&p);
        let mut improved = false;
        while step > 1e-14 {
            let cand = project_simplex(
                &p.iter()
                    .zip(&g)
                    .map(|(x, gi)| x + step * gi)
                    .collect::<Vec<_>>(),
            );
            let fc = obj.value(&cand);
            let moved: f64 = cand.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
            if fc > f || (fc >= f && moved > 0.0 && moved < 1e-15) {
                let gain = fc - f;
                p = cand;
                f = fc;
                improved = true;
                step *= 2.0;
                if gain < 1e-16 && moved < 1e-12 {
                    return (p, f);
                }
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (p, f)
}

fn multi_start(obj: &dyn SimplexObjective, nx: usize, starts: usize, seed: u64) -> AscentResult {
    let mut runs: Vec<(Vec<f64>, f64)> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let start = if s == 0 {
                vec![1.0 / nx as f64; nx]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                let w: Vec<f64> = (0..nx).map(|_| Exp1.sample(&mut rng)).collect();
                let t: f64 = w.iter().sum();
                w.into_iter().map(|x: f64| x / t).collect()
            };
            ascend(obj, start)
        })
        .collect();
    runs.sort_by(|a, b| b.1.total_cmp(&a.1));
    let best = runs[0].1;
    let tenth = runs[(runs.len() - 1).min(9)].1;
    let non_unique = runs
        .iter()
        .take_while(|r| best - r.1 <= 1e-9)
        .any(|r| total_variation(&r.0[..], &runs[0].0[..]).unwrap_or(0.0) > 1e-3);
    AscentResult {
        best_p: runs[0].0.clone(),
        best,
        spread: best - tenth,
        non_unique,
    }
}

/// Capacities and dispersions of a wiretap channel, all in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionReport {
    /// Secrecy capacity with `V = X` (or `V = Y` when semi-deterministic).
    pub c_s: f64,
    /// `max_P I(X;Y|Z)`.
    pub c_s_upper: f64,
    pub v1: f64,
    pub v2: f64,
    pub vc: f64,
    /// `V(P*_Y, P*_{Z|Y})`, semi-deterministic channels only.
    pub v_s: Option<f64>,
    pub optimizer_p: Vec<f64>,
    pub optimizer_p_upper: Vec<f64>,
    /// Best minus 10th-best multi-start value (bits).
    pub multi_start_spread: f64,
    pub non_unique_optimizer: bool,
    /// Legitimate channel capacity and dispersion, for `ε + δ > 1`.
    pub c_legit: f64,
    pub v_legit: f64,
    /// The `P_{YZ|X}` coupling used for `Ṽ`.
    pub coupling: String,
}

/// Number of Dirichlet starts used by [`optimize_secrecy_capacity`].
pub const DEFAULT_STARTS: usize = 2000;

/// Optimizes the capacity expressions with the default start count.
pub fn optimize_secrecy_capacity(wtc: &WiretapSpec) -> Result<DispersionReport> {
    optimize_secrecy_capacity_with(wtc, DEFAULT_STARTS, 0x5eed)
}

pub fn optimize_secrecy_capacity_with(
    wtc: &WiretapSpec,
    starts: usize,
    seed: u64,
) -> Result<DispersionReport> {
    let nx = wtc.input_size();
    if nx > 8 {
        return Err(Error::TooLarge(format!("|X| = {nx} exceeds 8")));
    }
    let starts = starts.max(1);
    let legit = rows_of(&wtc.legit);
    let eve = rows_of(&wtc.eve);
    let joint = product_rows(wtc);
    let nz = wtc.eve.output_size();

    // I(X;Y|Z) = I(X;YZ) − I(X;Z).
    let upper = multi_start(
        &InfoDifference {
            a: joint.clone(),
            b: eve.clone(),
        },
        nx,
        starts,
        seed,
    );
    let (_, vc) = conditional_from_joint(&upper.best_p, &joint, nz);

    let legit_cap = multi_start(
        &InfoDifference {
            a: legit.clone(),
            b: vec![vec![1.0]; nx],
        },
        nx,
        starts.min(200),
        seed ^ 1,
    );
    let (c_legit, v_legit) = info_and_var(
        &legit_cap.best_p,
        &legit,
        &mixture(&legit_cap.best_p, &legit),
    );

    let (c_s, v1, v2, v_s, opt, spread, non_unique) = if wtc.tags.semi_deterministic {
        // V = Y: the secrecy capacity is max H(Y|Z) = max I(X;Y|Z).
        let f = wtc.legit.deterministic_map().expect("validated");
        let ny = wtc.legit.output_size();
        let p = &upper.best_p;
        let mut p_y = vec![0.0; ny];
        let mut zy = vec![vec![0.0; nz]; ny];
        for x in 0..nx {
            p_y[f[x]] += p[x];
            for z in 0..nz {
                zy[f[x]][z] += p[x] * eve[x][z];
            }
        }
        for (y, row) in zy.iter_mut().enumerate() {
            if p_y[y] > 0.0 {
                row.iter_mut().for_each(|v| *v /= p_y[y]);
            }
        }
        let (_, vs) = info_and_var(&p_y, &zy, &mixture(&p_y, &zy));
        (
            upper.best,
            0.0,
            vs,
            Some(vs),
            upper.best_p.clone(),
            upper.spread,
            upper.non_unique,
        )
    } else {
        let r = multi_start(
            &InfoDifference {
                a: legit.clone(),
                b: eve.clone(),
            },
            nx,
            starts,
            seed ^ 2,
        );
        let (_, v1) = info_and_var(&r.best_p, &legit, &mixture(&r.best_p, &legit));
        let (_, v2) = info_and_var(&r.best_p, &eve, &mixture(&r.best_p, &eve));
        (
            r.best.max(0.0),
            v1,
            v2,
            None,
            r.best_p,
            r.spread,
            r.non_unique,
        )
    };
    let b2 = LOG2E * LOG2E;
    Ok(DispersionReport {
        c_s: c_s * LOG2E,
        c_s_upper: upper.best * LOG2E,
        v1: v1 * b2,
        v2: v2 * b2,
        vc: vc * b2,
        v_s: v_s.map(|v| v * b2),
        optimizer_p: opt,
        optimizer_p_upper: upper.best_p,
        multi_start_spread: spread * LOG2E,
        non_unique_optimizer: non_unique,
        c_legit: c_legit * LOG2E,
        v_legit: v_legit * b2,
        coupling: "conditionally independent: P_YZ|X = P_Y|X * P_Z|X".into(),
    })
}

// ---------------------------------------------------------------------------
// Expansions

/// `Q⁻¹` with its argument clamped into `[1e-12, 1 − 1e-12]`; the flag
/// reports whether clamping happened.
pub fn q_inv_clamped(p: f64) -> (f64, bool) {
    const EDGE: f64 = 1e-12;
    let c = p.clamp(EDGE, 1.0 - EDGE);
    (q_inv(c).expect("clamped into (0,1)"), c != p)
}

/// Normal approximations of the achievable and converse rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expansion {
    pub ach: f64,
    /// `None` when `ε + δ > 1`, where no converse of this form holds.
    pub conv: Option<f64>,
    /// The `ε + δ > 1` legitimate-channel branch was used.
    pub strong_converse_fails: bool,
    pub clamped: bool,
}

/// Second-order approximations for a general DM-WTC.
pub fn dmwtc_expansion(wtc: &WiretapSpec, n: u64, eps: f64, delta: f64) -> Result<Expansion> {
    expansion_from_report(&optimize_secrecy_capacity(wtc)?, n, eps, delta)
}

pub fn expansion_from_report(
    r: &DispersionReport,
    n: u64,
    eps: f64,
    delta: f64,
) -> Result<Expansion> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) || n == 0 {
        return Err(domain(format!(
            "need eps, delta in (0,1) and n > 0, got {eps}, {delta}, {n}"
        )));
    }
    let nf = n as f64;
    let s = eps + delta;
    if s < 1.0 {
        let (qe, c1) = q_inv_clamped(eps);
        let (qd, c2) = q_inv_clamped(delta);
        let (qs, c3) = q_inv_clamped(s);
        Ok(Expansion {
            ach: r.c_s - (r.v1 / nf).sqrt() * qe - (r.v2 / nf).sqrt() * qd,
            conv: Some(r.c_s_upper - (r.vc / nf).sqrt() * qs),
            strong_converse_fails: false,
            clamped: c1 || c2 || c3,
        })
    } else if s > 1.0 {
        let (q, c) = q_inv_clamped((s - 1.0) / delta);
        Ok(Expansion {
            ach: r.c_legit - (r.v_legit / nf).sqrt() * q,
            conv: None,
            strong_converse_fails: true,
            clamped: c,
        })
    } else {
        Err(domain(
            "eps + delta = 1 lies between the eps+delta<1 expansion and the eps+delta>1 \
             (strong converse fails) branch",
        ))
    }
}

/// Semi-deterministic rate expansion `C_S − √(V_S/n) Q⁻¹(δ/(1−ε))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemidetExpansion {
    pub rate: f64,
    /// `ε + δ ≥ 1`: the rate is `log |Y|`.
    pub vacuous: bool,
    pub clamped: bool,
}

pub fn semidet_expansion(
    wtc: &WiretapSpec,
    n: u64,
    eps: f64,
    delta: f64,
) -> Result<SemidetExpansion> {
    if !wtc.tags.semi_deterministic {
        return Err(domain("wiretap spec is not tagged semi-deterministic"));
    }
    semidet_expansion_from_report(
        &optimize_secrecy_capacity(wtc)?,
        wtc.legit.output_size(),
        n,
        eps,
        delta,
    )
}

pub fn semidet_expansion_from_report(
    r: &DispersionReport,
    output_size: usize,
    n: u64,
    eps: f64,
    delta: f64,
) -> Result<SemidetExpansion> {
    let v_s = r
        .v_s
        .ok_or_else(|| domain("report was not computed for a semi-deterministic channel"))?;
    if !((0.0..1.0).contains(&eps) && delta > 0.0) || n == 0 {
        return Err(domain(format!(
            "need eps in [0,1), delta > 0, n > 0; got {eps}, {delta}, {n}"
        )));
    }
    if eps + delta >= 1.0 {
        return Ok(SemidetExpansion {
            rate: (output_size as f64).log2(),
            vacuous: true,
            clamped: false,
        });
    }
    let (q, clamped) = q_inv_clamped(delta / (1.0 - eps));
    Ok(SemidetExpansion {
        rate: r.c_s - (v_s / n as f64).sqrt() * q,
        vacuous: false,
        clamped,
    })
}
