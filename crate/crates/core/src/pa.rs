//! Privacy amplification and channel resolvability.
//!
//! Upper bounds on how close a hashed key (or a random codebook's output)
//! gets to the ideal, a matching converse, and an exhaustive search over
//! balanced hash functions that realizes the existential statements on small
//! alphabets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{linspace, minimize_scalar, GAMMA_GRID_POINTS};
use crate::probmodel::{e_gamma, total_variation, DiscreteChannel, FiniteDist, JointDist};

/// Inputs shared by the hashing bounds: the source `P_XZ`, the key alphabet
/// size `|K|` and the reference output measure `Q_Z`.
#[derive(Debug, Clone)]
pub struct PABoundInputs {
    pub joint: JointDist,
    pub key_size: usize,
    pub q_z: FiniteDist,
}

impl PABoundInputs {
    pub fn new(joint: JointDist, key_size: usize, q_z: FiniteDist) -> Result<Self> {
        let (nx, nz) = joint.shape();
        if key_size == 0 || key_size > nx {
            return Err(domain(format!("key size {key_size} must lie in 1..={nx}")));
        }
        if q_z.len() != nz {
            return Err(Error::Shape(format!(
                "Q_Z has {} symbols, joint has {nz} outputs",
                q_z.len()
            )));
        }
        Ok(PABoundInputs {
            joint,
            key_size,
            q_z,
        })
    }

    /// `L = |X| / |K|`.
    pub fn ratio_l(&self) -> f64 {
        self.joint.shape().0 as f64 / self.key_size as f64
    }
}

/// Value of one of the bounds at a fixed `γ`, split into its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PABoundValue {
    pub egamma_term: f64,
    pub sqrt_term: f64,
    pub concentration_term: f64,
    pub total: f64,
    pub gamma_used: f64,
}

impl PABoundValue {
    fn new(egamma_term: f64, sqrt_term: f64, concentration_term: f64, gamma: f64) -> Self {
        PABoundValue {
            egamma_term,
            sqrt_term,
            concentration_term,
            total: egamma_term + sqrt_term + concentration_term,
            gamma_used: gamma,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(domain(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

/// `Σ_{x,z} R(x,z) exp(−|ı(x;z) − ln γ|)` with `ı = ln P(x,z) − ln(Q_Z(z)/|X|)`,
/// where `R` is the measure the expectation is taken under.
fn density_expectation(
    p_xz: &JointDist,
    q_z: &FiniteDist,
    weight: impl Fn(usize, usize) -> f64,
    log_gamma: f64,
) -> f64 {
    let (nx, nz) = p_xz.shape();
    let ln_nx = (nx as f64).ln();
    let mut acc = 0.0;
    for x in 0..nx {
        for z in 0..nz {
            let w = weight(x, z);
            let p = p_xz.get(x, z);
            if w == 0.0 || p == 0.0 || q_z[z] == 0.0 {
                // exp(−∞) on P-null atoms and on Q-null atoms (ı = +∞).
                continue;
            }
            let i = p.ln() - q_z[z].ln() + ln_nx;
            acc += w * (-(i - log_gamma).abs()).exp();
        }
    }
    acc
}

fn unif_x_times(q_z: &FiniteDist, nx: usize) -> JointDist {
    JointDist::product(&FiniteDist::uniform(nx), q_z)
}

/// Hashing bound on `S(g(X)|Z)` for the best `g: X → K`:
/// `E_γ(P_XZ, Q^unif_X Q_Z) + ½ √(γ/L · E[exp(−|ı(X;Z) − ln γ|)])`.
pub fn pa_avg_bound(inp: &PABoundInputs, gamma: f64) -> Result<PABoundValue> {
    check_gamma(gamma)?;
    let nx = inp.joint.shape().0;
    let eg = e_gamma(&inp.joint, &unif_x_times(&inp.q_z, nx), gamma)?;
    let ex = density_expectation(&inp.joint, &inp.q_z, |x, z| inp.joint.get(x, z), gamma.ln());
    Ok(PABoundValue::new(
        eg,
        0.5 * (gamma / inp.ratio_l() * ex).sqrt(),
        0.0,
        gamma,
    ))
}

/// `√(ln(|K|+1) / (2L))`.
pub fn concentration_term(key_size: f64, l: f64) -> f64 {
    ((key_size + 1.0).ln() / (2.0 * l)).sqrt()
}

/// Bound on `max_k d(P_{Z|g⁻¹(k)}, P_Z)` for the best balanced hash, valid
/// when `P_X` is uniform and `|K|` divides `|X|`.
pub fn pa_max_bound(inp: &PABoundInputs, gamma: f64) -> Result<PABoundValue> {
    check_gamma(gamma)?;
    let (nx, _) = inp.joint.shape();
    if nx % inp.key_size != 0 {
        return Err(domain(format!(
            "L = {nx}/{} is not an integer",
            inp.key_size
        )));
    }
    let p_x = inp.joint.marginal_x();
    if p_x
        .masses()
        .iter()
        .any(|&m| (m - 1.0 / nx as f64).abs() > 1e-12)
    {
        return Err(domain("the max-metric hashing bound needs a uniform P_X"));
    }
    let ch = channel_of(&inp.joint)?;
    let l = nx / inp.key_size;
    let mu = resolvability_bound(&p_x, &ch, l as f64, gamma, &inp.q_z)?;
    Ok(PABoundValue::new(
        mu.egamma_term,
        mu.sqrt_term,
        concentration_term(inp.key_size as f64, l as f64),
        gamma,
    ))
}

fn channel_of(joint: &JointDist) -> Result<DiscreteChannel> {
    let (nx, _) = joint.shape();
    let rows = (0..nx)
        .map(|x| {
            joint
                .conditional_row(x)
                .map(Vec::from)
                .ok_or_else(|| domain(format!("input symbol {x} has zero mass")))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteChannel::new(rows)
}

/// Soft-covering bound on `E d(P_{Z|A}, P_Z)` for a codebook `A` of `L`
/// i.i.d. `P_X` codewords. The expectation term is taken under
/// `Q^unif_X P_{Z|X}`, not under `P_XZ`.
pub fn resolvability_bound(
    p_x: &FiniteDist,
    ch: &DiscreteChannel,
    l: f64,
    gamma: f64,
    q_z: &FiniteDist,
) -> Result<PABoundValue> {
    check_gamma(gamma)?;
    if !(l >= 1.0) {
        return Err(domain(format!("codebook size L = {l} must be at least 1")));
    }
    if let Some(x) = p_x.masses().iter().position(|&m| m <= 0.0) {
        return Err(domain(format!(
            "P_X({x}) = 0; every input needs positive mass"
        )));
    }
    let joint = ch.joint(p_x)?;
    let nx = p_x.len();
    if q_z.len() != ch.output_size() {
        return Err(Error::Shape(
            "Q_Z does not match the channel outputs".into(),
        ));
    }
    let eg = e_gamma(&joint, &unif_x_times(q_z, nx), gamma)?;
    let ex = density_expectation(&joint, q_z, |x, z| ch.prob(x, z) / nx as f64, gamma.ln());
    Ok(PABoundValue::new(
        eg,
        0.5 * (gamma / l * ex).sqrt(),
        0.0,
        gamma,
    ))
}

/// Lower bound `E_L(P_XZ, Q^unif_X P_Z)` on `S(g(X)|Z)` for every `g` with
/// `|X|/|K| = L`.
pub fn pa_converse(joint: &JointDist, l: f64) -> Result<f64> {
    if !(l >= 1.0) {
        return Err(domain(format!("L = {l} must be at least 1")));
    }
    let nx = joint.shape().0;
    e_gamma(joint, &unif_x_times(&joint.marginal_z(), nx), l)
}

/// Output of [`resolvability_converse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvabilityConverse {
    /// `E_L(Q^unif_C P_{Z|X}, Q^unif_C Q_Z)` with `L = |C|`.
    pub bound: f64,
    /// `d(P_{Z|C}, Q_Z)` for comparison.
    pub exact_tv: f64,
}

/// Converse for a given codebook, listed by input index (repeats allowed).
pub fn resolvability_converse(
    codebook: &[usize],
    ch: &DiscreteChannel,
    q_z: &FiniteDist,
) -> Result<ResolvabilityConverse> {
    if codebook.is_empty() {
        return Err(domain("empty codebook"));
    }
    if let Some(&c) = codebook.iter().find(|&&c| c >= ch.input_size()) {
        return Err(Error::Shape(format!("codeword {c} is not a channel input")));
    }
    if q_z.len() != ch.output_size() {
        return Err(Error::Shape(
            "Q_Z does not match the channel outputs".into(),
        ));
    }
    let l = codebook.len() as f64;
    let mut bound = 0.0;
    let mut mix = vec![0.0; ch.output_size()];
    for &c in codebook {
        for (z, m) in mix.iter_mut().enumerate() {
            let w = ch.prob(c, z);
            bound += (w - l * q_z[z]).max(0.0);
            *m += w / l;
        }
    }
    Ok(ResolvabilityConverse {
        bound: bound / l,
        exact_tv: total_variation(&mix[..], q_z.masses())?,
    })
}

/// Minimizes `eval(γ).total` over a grid of `ln γ` values.
pub fn minimize_over_gamma(
    eval: impl Fn(f64) -> Result<PABoundValue>,
    log_grid: &[f64],
) -> Result<PABoundValue> {
    let m = minimize_scalar(
        |lg| eval(lg.exp()).map(|v| v.total).unwrap_or(f64::INFINITY),
        log_grid,
        100,
    )?;
    eval(m.argmin.exp())
}

/// A `ln γ` grid covering every finite information density of the source,
/// with two nats of margin on either side.
pub fn log_gamma_grid(joint: &JointDist, q_z: &FiniteDist) -> Vec<f64> {
    let (nx, nz) = joint.shape();
    let ln_nx = (nx as f64).ln();
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for x in 0..nx {
        for z in 0..nz {
            let p = joint.get(x, z);
            if p > 0.0 && q_z[z] > 0.0 {
                let i = p.ln() - q_z[z].ln() + ln_nx;
                lo = lo.min(i);
                hi = hi.max(i);
            }
        }
    }
    linspace(lo - 2.0, hi + 2.0, GAMMA_GRID_POINTS)
}

// ---------------------------------------------------------------------------
// Exhaustive balanced-hash oracle

/// Largest number of partitions [`exhaustive_hash_oracle`] will enumerate.
pub const MAX_PARTITIONS: u128 = 1_000_000;

/// Exact secrecy of one balanced hash `g`, given as `g(x)` per input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashEval {
    pub assignment: Vec<usize>,
    pub s_avg: f64,
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashOracle {
    pub best_s_avg: f64,
    pub best_s_max: f64,
    pub per_hash: Vec<HashEval>,
}

/// Number of ways to split `n` items into `k` unlabeled blocks of `n/k`.
pub fn balanced_partition_count(n: usize, k: usize) -> u128 {
    if k == 0 || !n.is_multiple_of(k) {
        return 0;
    }
    let l = n / k;
    let mut count: u128 = 1;
    let mut rem = n;
    // Each new block is anchored at the smallest remaining item.
    while rem > 0 {
        count = count.saturating_mul(binom(rem - 1, l - 1));
        rem -= l;
    }
    count
}

fn binom(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn enumerate_partitions(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(assign: &mut Vec<usize>, block: usize, l: usize, out: &mut Vec<Vec<usize>>) {
        let Some(anchor) = assign.iter().position(|&b| b == usize::MAX) else {
            out.push(assign.clone());
            return;
        };
        assign[anchor] = block;
        let free: Vec<usize> = (anchor + 1..assign.len())
            .filter(|&i| assign[i] == usize::MAX)
            .collect();
        choose(&free, l - 1, 0, &mut Vec::new(), &mut |picked| {
            for &i in picked {
                assign[i] = block;
            }
            rec(assign, block + 1, l, out);
            for &i in picked {
                assign[i] = usize::MAX;
            }
        });
        assign[anchor] = usize::MAX;
    }
    fn choose(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            choose(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; n], 0, l, &mut out);
    out
}

/// Exact `S(g(X)|Z)` and `max_k d(P_{Z|K=k}, P_Z)` for a hash `g`.
pub fn hash_secrecy(joint: &JointDist, assignment: &[usize], key_size: usize) -> (f64, f64) {
    let (nx, nz) = joint.shape();
    let p_z = joint.marginal_z();
    let mut p_kz = vec![vec![0.0; nz]; key_size];
    for x in 0..nx {
        for z in 0..nz {
            p_kz[assignment[x]][z] += joint.get(x, z);
        }
    }
    let mut s_avg = 0.0;
    let mut s_max: f64 = 0.0;
    for row in &p_kz {
        let pk: f64 = row.iter().sum();
        s_avg += 0.5
            * row
                .iter()
                .zip(p_z.masses())
                .map(|(a, b)| (a - b / key_size as f64).abs())
                .sum::<f64>();
        if pk > 0.0 {
            let d = 0.5
                * row
                    .iter()
                    .zip(p_z.masses())
                    .map(|(a, b)| (a / pk - b).abs())
                    .sum::<f64>();
            s_max = s_max.max(d);
        }
    }
    (s_avg, s_max)
}

/// Enumerates every balanced `g: X → K` (up to relabeling of `K`) and
/// evaluates its exact secrecy.
pub fn exhaustive_hash_oracle(joint: &JointDist, key_size: usize) -> Result<HashOracle> {
    let nx = joint.shape().0;
    if nx > 16 {
        return Err(Error::TooLarge(format!("|X| = {nx} exceeds 16")));
    }
    if key_size == 0 || !nx.is_multiple_of(key_size) {
        return Err(domain(format!(
            "|K| = {key_size} does not divide |X| = {nx}"
        )));
    }
    let count = balanced_partition_count(nx, key_size);
    if count > MAX_PARTITIONS {
        return Err(Error::TooLarge(format!(
            "{count} balanced partitions exceed the limit of {MAX_PARTITIONS}"
        )));
    }
    let parts = enumerate_partitions(nx, nx / key_size);
    let per_hash: Vec<HashEval> = parts
        .into_par_iter()
        .map(|assignment| {
            let (s_avg, s_max) = hash_secrecy(joint, &assignment, key_size);
            HashEval {
                assignment,
                s_avg,
                s_max,
            }
        })
        .collect();
    let best_s_avg = per_hash
        .iter()
        .map(|h| h.s_avg)
        .fold(f64::INFINITY, f64::min);
    let best_s_max = per_hash
        .iter()
        .map(|h| h.s_max)
        .fold(f64::INFINITY, f64::min);
    Ok(HashOracle {
        best_s_avg,
        best_s_max,
        per_hash,
    })
}
