//! Gaussian wiretap channel `Y = X + N(0, N1)`, `Z = X + N(0, N2)` under
//! the power constraint `‖x‖² ≤ nP`.
//!
//! The nonasymptotic bounds reduce, by spherical symmetry, to statistics of
//! sums of quadratic forms in i.i.d. Gaussians along the fixed codeword
//! `(√P, …, √P)`. Every such sum is sampled exactly in O(1) time: after a
//! rotation each coordinate contributes `λ Σw² + m Σw`, and
//! `Σw = √n Z`, `Σw² = Z² + χ²_{n−1}` with `Z` independent of the χ² part.
//!
//! Randomness is split into fixed chunks of [`CHUNK`] samples. Chunk `c`
//! of sample family `f` draws from a ChaCha8 stream keyed by
//! `(seed, f, c)`, so results do not depend on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{linspace, ln_1m_exp, ln_beta_inc, log_add_exp, q_inv, GAMMA_GRID_POINTS};
use crate::wiretap::{
    converse_bht, default_tau_grid, optimize_ach_rate, AchTheorem, CodeParams, SecrecyIngredients,
};

const LOG2E: f64 = std::f64::consts::LOG2_E;
const LN_2: f64 = std::f64::consts::LN_2;

/// Samples per deterministic RNG chunk.
pub const CHUNK: usize = 8192;

/// Transmit power and noise variances, all linear scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWiretapParams {
    pub p: f64,
    pub n1: f64,
    pub n2: f64,
}

impl GaussianWiretapParams {
    pub fn new(p: f64, n1: f64, n2: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("power must be positive, got {p}")));
        }
        if !(n1 > 0.0 && n2 > n1 && n2.is_finite()) {
            return Err(domain(format!(
                "need 0 < N1 < N2 (eavesdropper noisier), got N1 = {n1}, N2 = {n2}"
            )));
        }
        Ok(GaussianWiretapParams { p, n1, n2 })
    }
}

/// Capacity and dispersions in bits and squared bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianSecondOrder {
    pub c_s: f64,
    pub v1: f64,
    pub v2: f64,
    pub vc: f64,
}

pub fn gaussian_second_order_terms(gp: &GaussianWiretapParams) -> GaussianSecondOrder {
    let GaussianWiretapParams { p, n1, n2 } = *gp;
    let b2 = LOG2E * LOG2E;
    let c_s = 0.5 * ((p / n1).ln_1p() - (p / n2).ln_1p()) * LOG2E;
    let v = |ni: f64| 0.5 * b2 * (p * p + 2.0 * p * ni) / (p + ni).powi(2);
    let (v1, v2) = (v(n1), v(n2));
    let vc = v1 + v2 - p * n1 / (p + n1) * (1.0 / n2 + 1.0 / (p + n2)) * b2;
    GaussianSecondOrder { c_s, v1, v2, vc }
}

/// Normal approximations of the achievable and converse rates in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianApprox {
    pub ach: f64,
    /// `None` when `ε + δ ≥ 1`.
    pub conv: Option<f64>,
    /// `Vc ≤ (√V1 + √V2)²`, under which `ach ≤ conv` for small `ε, δ`.
    pub regime_ok: bool,
}

pub fn gaussian_approx(
    gp: &GaussianWiretapParams,
    n: u64,
    eps: f64,
    delta: f64,
) -> Result<GaussianApprox> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) || n == 0 {
        return Err(domain(format!(
            "need eps, delta in (0,1) and n > 0, got {eps}, {delta}, {n}"
        )));
    }
    let t = gaussian_second_order_terms(gp);
    let nf = n as f64;
    let ach = t.c_s - (t.v1 / nf).sqrt() * q_inv(eps)? - (t.v2 / nf).sqrt() * q_inv(delta)?;
    let conv = if eps + delta < 1.0 {
        Some(t.c_s - (t.vc / nf).sqrt() * q_inv(eps + delta)?)
    } else {
        None
    };
    Ok(GaussianApprox {
        ach,
        conv,
        regime_ok: t.vc <= (t.v1.sqrt() + t.v2.sqrt()).powi(2),
    })
}

// ---------------------------------------------------------------------------
// Sampling

/// Monte Carlo settings. Results depend only on `samples` and `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Bootstrap resamples for confidence half-widths; 0 disables them.
    pub bootstrap: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            workers: 0,
            bootstrap: 200,
        }
    }
}

#[derive(Clone, Copy)]
enum Family {
    Converse = 1,
    Eve = 2,
    Legit = 3,
    Bootstrap = 4,
}

fn chunk_rng(seed: u64, family: Family, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 48) | chunk);
    rng
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Solver(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Draws `mc.samples` values, chunk by chunk, in sample order.
fn sample_family(
    mc: &McConfig,
    family: Family,
    draw: impl Fn(&mut ChaCha8Rng) -> f64 + Sync,
) -> Result<Vec<f64>> {
    if mc.samples == 0 {
        return Err(domain("need at least one Monte Carlo sample"));
    }
    let chunks = mc.samples.div_ceil(CHUNK);
    in_pool(mc.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(mc.seed, family, c as u64);
                let len = CHUNK.min(mc.samples - c * CHUNK);
                (0..len).map(|_| draw(&mut rng)).collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
            .concat()
    })
}

/// `Σ_{i≤n} (λ w_i² + m w_i)` for i.i.d. standard normal `w_i`.
struct QuadSum {
    lambda: f64,
    m: f64,
    chi: Option<ChiSquared<f64>>,
    sqrt_n: f64,
}

impl QuadSum {
    fn new(lambda: f64, m: f64, n: u64) -> Self {
        QuadSum {
            lambda,
            m,
            chi: (n > 1).then(|| ChiSquared::new((n - 1) as f64).expect("positive dof")),
            sqrt_n: (n as f64).sqrt(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let rest = self.chi.as_ref().map_or(0.0, |c| c.sample(rng));
        self.lambda * (z * z + rest) + self.m * self.sqrt_n * z
    }
}

/// Per-letter converse density bracket as `(a, b) A (a, b)ᵀ + ℓ·(a, b) + k0`
/// in standard normal coordinates, rotated to diagonal form.
fn converse_form(gp: &GaussianWiretapParams) -> ([f64; 2], [f64; 2], f64) {
    let GaussianWiretapParams { p, n1, n2 } = *gp;
    let sp = p.sqrt();
    let c_uu = 1.0 / n2 - 1.0 / n1 + 1.0 / (p + n1) - 1.0 / (p + n2);
    let c_bb = 1.0 / n2 - 1.0 / (p + n2);
    let c_ub = 2.0 / n2 - 2.0 / (p + n2);
    let l_u = 2.0 * sp * (1.0 / (p + n1) - 1.0 / (p + n2));
    let l_b = -2.0 * sp / (p + n2);
    let k0 = p / (p + n1) - p / (p + n2);
    let (su, sb) = (n1.sqrt(), (n2 - n1).sqrt());
    let a = c_uu * n1;
    let d = c_bb * (n2 - n1);
    let b = 0.5 * c_ub * su * sb;
    let ell = [l_u * su, l_b * sb];
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = theta.sin_cos();
    let lam = [
        a * c * c + 2.0 * b * s * c + d * s * s,
        a * s * s - 2.0 * b * s * c + d * c * c,
    ];
    let m = [c * ell[0] + s * ell[1], -s * ell[0] + c * ell[1]];
    (lam, m, k0)
}

/// Samples of `ln dP_{YZ|X=x̄}/d(P_{Z|X=x̄} Q_{Y|Z})` under `P`, in nats,
/// where `Q_{Y|Z}` is the Gaussian-input backward channel.
pub fn sample_converse_density(
    gp: &GaussianWiretapParams,
    n: u64,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    let (lam, m, k0) = converse_form(gp);
    let q = [QuadSum::new(lam[0], m[0], n), QuadSum::new(lam[1], m[1], n)];
    let nf = n as f64;
    let shift = nf * (0.5 * ((gp.p / gp.n1).ln_1p() - (gp.p / gp.n2).ln_1p()) + 0.5 * k0);
    sample_family(mc, Family::Converse, |rng| {
        shift + 0.5 * (q[0].draw(rng) + q[1].draw(rng))
    })
}

/// The same density summed letter by letter from the original Gaussians.
/// Costs O(n) per sample; used as a cross-check of the exact sampler.
pub fn sample_converse_density_direct(
    gp: &GaussianWiretapParams,
    n: u64,
    samples: usize,
    seed: u64,
) -> Vec<f64> {
    let GaussianWiretapParams { p, n1, n2 } = *gp;
    let c_s = 0.5 * ((p / n1).ln_1p() - (p / n2).ln_1p());
    let sp = p.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..n {
                let u = n1.sqrt() * rng.sample::<f64, _>(StandardNormal);
                let ub = (n2 - n1).sqrt() * rng.sample::<f64, _>(StandardNormal);
                acc += (u + ub).powi(2) / n2 - u * u / n1 + (sp + u).powi(2) / (p + n1)
                    - (sp + u + ub).powi(2) / (p + n2);
            }
            n as f64 * c_s + 0.5 * acc
        })
        .collect()
}

/// Samples of `ı(x̄; Z) = ln dP_{Z|X=x̄}/dQ_Z` with `Q_Z = N(0, (P+N2) I)`.
pub fn sample_eve_density(gp: &GaussianWiretapParams, n: u64, mc: &McConfig) -> Result<Vec<f64>> {
    let GaussianWiretapParams { p, n2, .. } = *gp;
    let q = QuadSum::new(-p / (p + n2), 2.0 * (p * n2).sqrt() / (p + n2), n);
    let nf = n as f64;
    let shift = nf * 0.5 * ((p / n2).ln_1p() + p / (p + n2));
    sample_family(mc, Family::Eve, |rng| shift + 0.5 * q.draw(rng))
}

/// Samples of `ln P[T ≥ t₀]`, where `t₀` is the cosine between the sent
/// codeword and the legitimate output and `T` is the cosine for an
/// independent codeword uniform on the power sphere.
pub fn sample_legit_pairwise(
    gp: &GaussianWiretapParams,
    n: u64,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain("the sphere-codebook error needs n >= 2"));
    }
    let nf = n as f64;
    let chi = ChiSquared::new(nf - 1.0).expect("positive dof");
    let half_dof = 0.5 * (nf - 1.0);
    let (snp, sn1) = ((nf * gp.p).sqrt(), gp.n1.sqrt());
    sample_family(mc, Family::Legit, |rng| {
        let a = snp + sn1 * rng.sample::<f64, _>(StandardNormal);
        let perp = gp.n1 * chi.sample(rng);
        let r2 = a * a + perp;
        // 1 − t₀² without cancellation.
        let x = perp / r2;
        let ln_half_i = ln_beta_inc(half_dof, 0.5, x).unwrap_or(0.0) - LN_2;
        if a >= 0.0 {
            ln_half_i
        } else {
            ln_1m_exp(ln_half_i)
        }
    })
}

// ---------------------------------------------------------------------------
// Empirical tests and expectations

/// Neyman–Pearson `β` from samples of the log-likelihood ratio under `P`,
/// with the alternative measured by importance weights `e^{−Λ}`.
#[derive(Debug, Clone)]
pub struct EmpiricalBeta {
    /// Samples sorted in decreasing order.
    desc: Vec<f64>,
    /// Sample weights in the sorted order; `None` means all ones.
    weights: Option<Vec<f64>>,
    /// `cum[j] = Σ_{i<j} w_i`.
    cum: Vec<f64>,
    /// `prefix[j] = ln Σ_{i<j} w_i e^{−desc[i]}`.
    prefix: Vec<f64>,
}

impl EmpiricalBeta {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|x| x.is_nan()) {
            return Err(domain("need a nonempty sample set without NaN"));
        }
        samples.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::build(samples, None))
    }

    fn build(desc: Vec<f64>, weights: Option<Vec<f64>>) -> Self {
        let mut cum = Vec::with_capacity(desc.len() + 1);
        let mut prefix = Vec::with_capacity(desc.len() + 1);
        cum.push(0.0);
        prefix.push(f64::NEG_INFINITY);
        for (i, &s) in desc.iter().enumerate() {
            let w = weights.as_ref().map_or(1.0, |w| w[i]);
            cum.push(cum[i] + w);
            prefix.push(if w > 0.0 {
                log_add_exp(prefix[i], w.ln() - s)
            } else {
                prefix[i]
            });
        }
        EmpiricalBeta {
            desc,
            weights,
            cum,
            prefix,
        }
    }

    /// The same samples under bootstrap weights given in sorted order.
    fn reweighted(&self, w: Vec<f64>) -> Self {
        Self::build(self.desc.clone(), Some(w))
    }

    pub fn len(&self) -> usize {
        self.desc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desc.is_empty()
    }

    /// `ln β_α`: reject `P` outside the top `α` fraction of sample mass,
    /// randomizing on the boundary sample.
    pub fn log_beta(&self, alpha: f64) -> f64 {
        let total = *self.cum.last().unwrap();
        let target = alpha.clamp(0.0, 1.0) * total;
        // Number of samples taken in full.
        let full = self.cum.partition_point(|&c| c <= target) - 1;
        let mut acc = self.prefix[full];
        if full < self.desc.len() {
            let w = self.weights.as_ref().map_or(1.0, |w| w[full]);
            let part = (target - self.cum[full]).min(w);
            if part > 0.0 {
                acc = log_add_exp(acc, part.ln() - self.desc[full]);
            }
        }
        acc - total.ln()
    }
}

/// Poisson(1) bootstrap weights for resample `r`.
fn bootstrap_weights(seed: u64, r: usize, len: usize) -> Vec<f64> {
    let mut rng = chunk_rng(seed, Family::Bootstrap, r as u64);
    let pois = Poisson::new(1.0).expect("valid rate");
    (0..len).map(|_| pois.sample(&mut rng)).collect()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

/// Converse rate from sampled densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConverse {
    pub log_m: f64,
    pub rate_bits: f64,
    pub tau_star: f64,
    pub hayashi_rate_bits: f64,
    /// Bootstrap standard error of `rate_bits`; 0 without bootstrap.
    pub std_err_bits: f64,
    /// 95% half-width, `1.96 · std_err_bits`.
    pub halfwidth_bits: f64,
}

/// Hypothesis-testing converse with the sampled Gaussian density.
pub fn mc_beta_converse(
    gp: &GaussianWiretapParams,
    n: u64,
    eps: f64,
    delta: f64,
    mc: &McConfig,
) -> Result<McConverse> {
    let eb = EmpiricalBeta::new(sample_converse_density(gp, n, mc)?)?;
    converse_from_samples(&eb, n, eps, delta, mc)
}

/// [`mc_beta_converse`] on an already sampled density.
pub fn converse_from_samples(
    eb: &EmpiricalBeta,
    n: u64,
    eps: f64,
    delta: f64,
    mc: &McConfig,
) -> Result<McConverse> {
    let grid = default_tau_grid(eps, delta);
    let c = converse_bht(|a| eb.log_beta(a), eps, delta, &grid)?;
    let nl = n as f64 * LN_2;
    let se = if mc.bootstrap > 1 {
        let reps: Vec<f64> = in_pool(mc.workers, || {
            (0..mc.bootstrap)
                .into_par_iter()
                .map(|r| {
                    let w = eb.reweighted(bootstrap_weights(mc.seed, r, eb.len()));
                    converse_bht(|a| w.log_beta(a), eps, delta, &grid)
                        .map(|b| b.log_m / nl)
                        .unwrap_or(f64::NAN)
                })
                .collect()
        })?;
        mean_sd(&reps).1
    } else {
        0.0
    };
    Ok(McConverse {
        log_m: c.log_m,
        rate_bits: c.log_m / nl,
        tau_star: c.tau_star,
        hayashi_rate_bits: c.hayashi_log_m / nl,
        std_err_bits: se,
        halfwidth_bits: 1.96 * se,
    })
}

/// Sorted samples with prefix and suffix log-sums for O(log N) evaluation
/// of the achievability ingredients.
struct SortedLogs {
    asc: Vec<f64>,
    /// `ln Σ_{i<j} e^{asc[i]}`.
    pre_pos: Vec<f64>,
    /// `ln Σ_{i≥j} e^{−asc[i]}`.
    suf_neg: Vec<f64>,
}

impl SortedLogs {
    fn new(mut v: Vec<f64>) -> Self {
        v.sort_by(|a, b| a.total_cmp(b));
        let mut pre_pos = vec![f64::NEG_INFINITY; v.len() + 1];
        for (i, &x) in v.iter().enumerate() {
            pre_pos[i + 1] = log_add_exp(pre_pos[i], x);
        }
        let mut suf_neg = vec![f64::NEG_INFINITY; v.len() + 1];
        for i in (0..v.len()).rev() {
            suf_neg[i] = log_add_exp(suf_neg[i + 1], -v[i]);
        }
        SortedLogs {
            asc: v,
            pre_pos,
            suf_neg,
        }
    }

    /// First index with `asc[j] > t`.
    fn above(&self, t: f64) -> usize {
        self.asc.partition_point(|&x| x <= t)
    }

    fn len(&self) -> f64 {
        self.asc.len() as f64
    }
}

/// Sampled Gaussian ingredients along the fixed codeword.
pub struct GaussianIngredients {
    eve: SortedLogs,
    legit: SortedLogs,
    grid: Vec<f64>,
}

impl GaussianIngredients {
    pub fn sample(gp: &GaussianWiretapParams, n: u64, mc: &McConfig) -> Result<Self> {
        let eve = SortedLogs::new(sample_eve_density(gp, n, mc)?);
        let legit = SortedLogs::new(sample_legit_pairwise(gp, n, mc)?);
        let (lo, hi) = (eve.asc[0], *eve.asc.last().unwrap());
        Ok(GaussianIngredients {
            eve,
            legit,
            grid: linspace(lo - 2.0, hi + 2.0, GAMMA_GRID_POINTS),
        })
    }

    /// Bootstrap replicate of `(secrecy core, RCU)` at a fixed point.
    fn weighted_point(
        &self,
        w_eve: &[f64],
        w_legit: &[f64],
        cp: CodeParams,
        lg: f64,
    ) -> (f64, f64) {
        let we: f64 = w_eve.iter().sum();
        let (mut eg, mut ex) = (0.0, 0.0);
        for (&x, &w) in self.eve.asc.iter().zip(w_eve) {
            if x > lg {
                eg += w * -(lg - x).exp_m1();
            }
            ex += w * (-(x - lg).abs()).exp();
        }
        let (eg, ex) = (eg / we, ex / we);
        let sqrt = if ex > 0.0 {
            0.5 * (0.5 * (lg - cp.log_l + ex.ln())).exp()
        } else {
            0.0
        };
        let wl: f64 = w_legit.iter().sum();
        let log_am1 = log_am1(cp.log_ml());
        let rcu: f64 = self
            .legit
            .asc
            .iter()
            .zip(w_legit)
            .map(|(&s, &w)| w * (log_am1 + s).exp().min(1.0))
            .sum::<f64>()
            / wl;
        (eg + sqrt, rcu)
    }
}

fn log_am1(log_a: f64) -> f64 {
    if log_a <= 0.0 {
        f64::NEG_INFINITY
    } else {
        log_a + ln_1m_exp(-log_a)
    }
}

impl SecrecyIngredients for GaussianIngredients {
    fn egamma_sup(&self, lg: f64) -> f64 {
        let j = self.eve.above(lg);
        let cnt = self.eve.len() - j as f64;
        if cnt == 0.0 {
            return 0.0;
        }
        ((cnt - (lg + self.eve.suf_neg[j]).exp()) / self.eve.len()).clamp(0.0, 1.0)
    }

    fn expect_sup(&self, lg: f64) -> f64 {
        let j = self.eve.above(lg);
        let below = self.eve.pre_pos[j] - lg;
        let above = lg + self.eve.suf_neg[j];
        (log_add_exp(below, above) - self.eve.len().ln())
            .exp()
            .min(1.0)
    }

    /// `E[min(1, (a−1) P[T ≥ t₀])]`.
    fn legit_rcu(&self, log_a: f64) -> f64 {
        let c = log_am1(log_a);
        if c == f64::NEG_INFINITY {
            return 0.0;
        }
        let j = self.legit.above(-c);
        let capped = self.legit.len() - j as f64;
        let tail = (c + self.legit.pre_pos[j]).exp();
        ((capped + tail) / self.legit.len()).clamp(0.0, 1.0)
    }

    fn log_gamma_grid(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

/// Achievable rate from sampled ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McAchievability {
    pub rate_bits: f64,
    pub log_m: f64,
    pub log_l: f64,
    pub log_gamma: f64,
    pub eps: f64,
    pub delta: f64,
    pub feasible: bool,
    pub gamma_at_boundary: bool,
    /// Rate standard error from re-solving with the bootstrap spread of
    /// `(ε, δ)` added to and removed from the targets.
    pub std_err_bits: f64,
    pub halfwidth_bits: f64,
}

pub fn mc_achievability(
    gp: &GaussianWiretapParams,
    n: u64,
    eps: f64,
    delta: f64,
    mc: &McConfig,
    thm: AchTheorem,
) -> Result<McAchievability> {
    let ing = GaussianIngredients::sample(gp, n, mc)?;
    achievability_from_ingredients(&ing, gp, n, eps, delta, mc, thm)
}

pub fn achievability_from_ingredients(
    ing: &GaussianIngredients,
    gp: &GaussianWiretapParams,
    n: u64,
    eps: f64,
    delta: f64,
    mc: &McConfig,
    thm: AchTheorem,
) -> Result<McAchievability> {
    let nf = n as f64;
    let nl = nf * LN_2;
    let cap = 0.5 * nf * (gp.p / gp.n1).ln_1p() + 10.0 * nf.sqrt() + 10.0;
    let r = optimize_ach_rate(ing, thm, n, eps, delta, cap)?;
    let mut out = McAchievability {
        rate_bits: r.log_m / nl,
        log_m: r.log_m,
        log_l: r.log_l,
        log_gamma: r.log_gamma,
        eps: r.eps,
        delta: r.delta,
        feasible: r.feasible,
        gamma_at_boundary: r.gamma_at_boundary,
        std_err_bits: 0.0,
        halfwidth_bits: 0.0,
    };
    if !r.feasible || mc.bootstrap < 2 {
        return Ok(out);
    }
    let cp = CodeParams::new(r.log_m, r.log_l, n)?;
    let reps: Vec<(f64, f64)> = in_pool(mc.workers, || {
        (0..mc.bootstrap)
            .into_par_iter()
            .map(|b| {
                let we = bootstrap_weights(mc.seed, 2 * b, ing.eve.asc.len());
                let wl = bootstrap_weights(mc.seed, 2 * b + 1, ing.legit.asc.len());
                ing.weighted_point(&we, &wl, cp, r.log_gamma)
            })
            .collect()
    })?;
    let (_, sd_d) = mean_sd(&reps.iter().map(|x| x.0).collect::<Vec<_>>());
    let (_, sd_e) = mean_sd(&reps.iter().map(|x| x.1).collect::<Vec<_>>());
    let shifted = |s: f64| -> Result<f64> {
        let e = (eps + s * sd_e).clamp(1e-15, 1.0 - 1e-15);
        let d = (delta + s * sd_d).clamp(1e-15, 1.0 - 1e-15);
        Ok(optimize_ach_rate(ing, thm, n, e, d, cap)?.log_m / nl)
    };
    let se = 0.5 * (shifted(1.0)? - shifted(-1.0)?).abs();
    out.std_err_bits = se;
    out.halfwidth_bits = 1.96 * se;
    Ok(out)
}
