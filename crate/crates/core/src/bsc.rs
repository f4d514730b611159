//! Binary symmetric wiretap channel: noiseless legitimate link, BSC(p)
//! eavesdropper.
//!
//! Everything reduces to sums over the Hamming weight `B ~ Binomial(n, p)`
//! of the eavesdropper's noise, thanks to the symmetry of the channel. The
//! information density of a weight-`b` pattern against the uniform output
//! is `d_b = b ln(p/(1−p)) + n ln(1−p) + n ln 2` nats.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numerics::{
    binary_entropy, bisect_bracket, linspace, log_binom_pmf_all, minimize_scalar, q_inv,
    BracketedRoot, GAMMA_GRID_POINTS, ROOT_TOL,
};
use crate::probmodel::{np_beta_log, LogAtom};
use crate::wiretap::{converse_bht, default_tau_grid, BhtConverse, Metric, SecrecyIngredients};

/// A BSC wiretap channel at a fixed blocklength, with the binomial law of
/// the noise weight precomputed.
#[derive(Debug, Clone)]
pub struct BscWtc {
    p: f64,
    n: u64,
    /// `ln P[B = b]`.
    lpmf: Vec<f64>,
    /// `d_b`.
    dens: Vec<f64>,
}

impl BscWtc {
    pub fn new(p: f64, n: u64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(domain(format!(
                "crossover probability must lie in (0, 1/2), got {p}"
            )));
        }
        if n == 0 {
            return Err(domain("blocklength must be positive"));
        }
        let lpmf = log_binom_pmf_all(n, p)?;
        let nf = n as f64;
        let step = (p / (1.0 - p)).ln();
        let base = nf * ((-p).ln_1p() + LN_2);
        let dens = (0..=n).map(|b| b as f64 * step + base).collect();
        Ok(BscWtc { p, n, lpmf, dens })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `g_n(γ) = 1 − E[exp(−[d_B − ln γ]⁺)]`.
    pub fn gn(&self, log_gamma: f64) -> f64 {
        self.lpmf
            .iter()
            .zip(&self.dens)
            .filter(|(_, d)| **d > log_gamma)
            .map(|(lp, d)| -lp.exp() * (log_gamma - d).exp_m1())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `h_n(γ) = E[exp(−|d_B − ln γ|)]`.
    pub fn hn(&self, log_gamma: f64) -> f64 {
        self.lpmf
            .iter()
            .zip(&self.dens)
            .map(|(lp, d)| (lp - (d - log_gamma).abs()).exp())
            .sum::<f64>()
            .min(1.0)
    }

    /// Smallest and largest density atoms.
    pub fn density_range(&self) -> (f64, f64) {
        (self.dens[self.n as usize], self.dens[0])
    }

    /// `ln γ` search grid covering the density atoms with a margin.
    pub fn log_gamma_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.density_range();
        linspace(lo - 4.0, hi + 4.0, GAMMA_GRID_POINTS)
    }

    /// `(P, Q)` atoms of the test between `P_XYZ` and `P_XZ Q_{Y|Z}`, with
    /// `Q_{Y|Z}` the backward BSC(p) induced by a uniform input. Only the
    /// event `Y = X` matters; its `Q` probability at noise weight `b` is
    /// `p^b (1−p)^{n−b}`.
    pub fn degraded_atoms(&self) -> Vec<LogAtom> {
        let lp = self.p.ln();
        let lq = (-self.p).ln_1p();
        let n = self.n as f64;
        self.lpmf
            .iter()
            .enumerate()
            .map(|(b, &l)| LogAtom {
                log_p: l,
                log_q: l + b as f64 * lp + (n - b as f64) * lq,
            })
            .collect()
    }
}

/// `g_n(γ)` at `ln γ`.
pub fn bsc_gn(p: f64, n: u64, log_gamma: f64) -> Result<f64> {
    Ok(BscWtc::new(p, n)?.gn(log_gamma))
}

/// `h_n(γ)` at `ln γ`.
pub fn bsc_hn(p: f64, n: u64, log_gamma: f64) -> Result<f64> {
    Ok(BscWtc::new(p, n)?.hn(log_gamma))
}

/// `V_BSC = p(1−p) log₂²((1−p)/p)` in squared bits.
pub fn v_bsc(p: f64) -> f64 {
    p * (1.0 - p) * ((1.0 - p) / p).log2().powi(2)
}

/// Which closed form of the hashing bound to evaluate. All are of the shape
/// `min_γ F(g_n(γ), c h_n(γ))` with `c = γ/2^{n−k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BscAchForm {
    /// `½(g + √(g² + c h))`, the form the variance argument yields.
    #[default]
    Squared,
    /// `½(g + √(g + c h))`.
    Printed,
    /// `½(g + ½√(g + c h))`.
    Proof,
    /// `g + ½√(c h)`: the generic average-secrecy bound with BSC ingredients.
    Generic,
}

impl BscAchForm {
    pub const ALL: [BscAchForm; 4] = [
        BscAchForm::Squared,
        BscAchForm::Printed,
        BscAchForm::Proof,
        BscAchForm::Generic,
    ];

    fn eval(self, g: f64, ch: f64) -> f64 {
        match self {
            BscAchForm::Squared => 0.5 * (g + (g * g + ch).sqrt()),
            BscAchForm::Printed => 0.5 * (g + (g + ch).sqrt()),
            BscAchForm::Proof => 0.5 * (g + 0.5 * (g + ch).sqrt()),
            BscAchForm::Generic => g + 0.5 * ch.sqrt(),
        }
    }
}

/// `√(ln(2^k + 1) / 2^{n−k+1})`, the worst-message penalty.
pub fn max_metric_term(n: u64, k: u64) -> f64 {
    let ln_m1 = crate::numerics::log_add_exp(k as f64 * LN_2, 0.0);
    (0.5 * (ln_m1.ln() - (n - k + 1) as f64 * LN_2)).exp()
}

/// Value of an achievability bound on `δ/(1−ε)` at fixed `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscAchBound {
    pub value: f64,
    pub log_gamma: f64,
    pub gamma_at_boundary: bool,
}

impl BscWtc {
    /// The bound at a given `ln γ`, without the worst-message penalty.
    pub fn ach_at(&self, k: u64, form: BscAchForm, log_gamma: f64) -> f64 {
        let log_c = log_gamma - (self.n - k) as f64 * LN_2;
        let h = self.hn(log_gamma);
        let ch = if h > 0.0 { (log_c + h.ln()).exp() } else { 0.0 };
        form.eval(self.gn(log_gamma), ch)
    }

    /// Minimizes the bound over `γ` for `k` message bits.
    pub fn ach_bound(&self, k: u64, form: BscAchForm, metric: Metric) -> Result<BscAchBound> {
        if k > self.n {
            return Err(domain(format!("k = {k} exceeds n = {}", self.n)));
        }
        let f = |lg: f64| self.ach_at(k, form, lg);
        let grid = self.log_gamma_grid();
        let coarse = minimize_scalar(f, &grid, 0)?;
        let h = grid[1] - grid[0];
        let fine = linspace(coarse.argmin - 2.0 * h, coarse.argmin + 2.0 * h, 257);
        let best = minimize_scalar(f, &fine, 80)?;
        let extra = match metric {
            Metric::Avg => 0.0,
            Metric::Max => max_metric_term(self.n, k),
        };
        Ok(BscAchBound {
            value: best.min + extra,
            log_gamma: best.argmin,
            gamma_at_boundary: coarse.at_boundary,
        })
    }
}

/// Achievable rate from the hashing bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscAch {
    /// Largest feasible `k`, or 0 when even `k = 1` fails.
    pub k_star: u64,
    pub rate_bits: f64,
    /// The bound on `δ/(1−ε)` at `k_star`.
    pub bound: f64,
    pub log_gamma: f64,
    pub feasible: bool,
    pub gamma_at_boundary: bool,
}

/// Largest `k` such that the chosen bound certifies leakage `delta` at
/// error `eps`.
pub fn bsc_ach(
    ch: &BscWtc,
    eps: f64,
    delta: f64,
    form: BscAchForm,
    metric: Metric,
) -> Result<BscAch> {
    check_eps_delta(eps, delta)?;
    let target = delta / (1.0 - eps);
    let ok = |k: u64| -> Result<Option<BscAchBound>> {
        let b = ch.ach_bound(k, form, metric)?;
        Ok((b.value <= target).then_some(b))
    };
    let Some(mut best) = ok(1)? else {
        return Ok(BscAch {
            k_star: 0,
            rate_bits: 0.0,
            bound: ch.ach_bound(1, form, metric)?.value,
            log_gamma: 0.0,
            feasible: false,
            gamma_at_boundary: false,
        });
    };
    // The bound grows with k; binary search for the last feasible k.
    let (mut lo, mut hi) = (1u64, ch.n + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match ok(mid)? {
            Some(b) => {
                lo = mid;
                best = b;
            }
            None => hi = mid,
        }
    }
    Ok(BscAch {
        k_star: lo,
        rate_bits: lo as f64 / ch.n as f64,
        bound: best.value,
        log_gamma: best.log_gamma,
        feasible: true,
        gamma_at_boundary: best.gamma_at_boundary,
    })
}

/// Upper bound on the rate of any average-secrecy code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscConverse {
    pub log_m: f64,
    pub rate_bits: f64,
    /// `ln γ*` with `g_n(γ*) = δ/(1−ε)`.
    pub log_gamma: f64,
    /// Even `M = 1` violates the bound.
    pub infeasible: bool,
    /// `δ/(1−ε) ≥ 1`, or the bound exceeds `2^n`; the rate is capped at 1.
    pub vacuous: bool,
}

/// Largest `M` with `g_n(2^n/(M(1−ε))) ≤ δ/(1−ε)`.
pub fn bsc_converse(ch: &BscWtc, eps: f64, delta: f64) -> Result<BscConverse> {
    check_eps_delta(eps, delta)?;
    let nl = ch.n as f64 * LN_2;
    let target = delta / (1.0 - eps);
    let log_m_of = |lg: f64| nl - (-eps).ln_1p() - lg;
    let vacuous = |lg: f64| BscConverse {
        log_m: nl,
        rate_bits: 1.0,
        log_gamma: lg,
        infeasible: false,
        vacuous: true,
    };
    let (lo, hi) = (-nl, 2.0 * nl);
    if target >= 1.0 || ch.gn(lo) <= target {
        return Ok(vacuous(lo));
    }
    let br = bisect_bracket(
        |lg| ch.gn(lg),
        target,
        BracketedRoot::with_tol(lo, hi, ROOT_TOL)?,
    )?;
    // `hi` satisfies g_n ≤ target: the smallest feasible γ up to tolerance.
    let lg = br.hi;
    let log_m = log_m_of(lg);
    if log_m > nl {
        return Ok(vacuous(lg));
    }
    Ok(BscConverse {
        log_m: log_m.max(0.0),
        rate_bits: log_m.max(0.0) / nl,
        log_gamma: lg,
        infeasible: log_m < 0.0,
        vacuous: false,
    })
}

/// Normal approximation `H_b(p) − √(V_BSC/n) Q⁻¹(δ/(1−ε))` in bits.
pub fn bsc_approx(p: f64, n: u64, eps: f64, delta: f64) -> Result<f64> {
    check_eps_delta(eps, delta)?;
    if !(p > 0.0 && p < 0.5) || n == 0 {
        return Err(domain(format!(
            "need p in (0, 1/2) and n > 0, got {p}, {n}"
        )));
    }
    Ok(binary_entropy(p) - (v_bsc(p) / n as f64).sqrt() * q_inv(delta / (1.0 - eps))?)
}

/// Hypothesis-testing converse with the degraded backward channel, and the
/// `1/(τ²β)` comparison bound. Rates in bits are `log_m / (n ln 2)`.
pub fn bsc_general_converse(ch: &BscWtc, eps: f64, delta: f64) -> Result<BhtConverse> {
    check_eps_delta(eps, delta)?;
    let atoms = ch.degraded_atoms();
    converse_bht(
        |a| {
            np_beta_log(a.clamp(0.0, 1.0), &atoms)
                .map(|r| r.log_beta)
                .unwrap_or(f64::NAN)
        },
        eps,
        delta,
        &default_tau_grid(eps, delta),
    )
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !((0.0..1.0).contains(&eps) && delta > 0.0 && eps + delta < 1.0) {
        return Err(domain(format!(
            "need eps in [0,1), delta > 0 and eps + delta < 1, got {eps}, {delta}"
        )));
    }
    Ok(())
}

/// BSC pieces for the generic achievability combinators, with `Q_Z`
/// uniform over `{0,1}^n`.
///
/// The legitimate link is noiseless, so any `a ≤ 2^n` distinct codewords
/// decode without error; larger codebooks are reported as certain failure.
pub struct BscIngredients<'a>(pub &'a BscWtc);

impl SecrecyIngredients for BscIngredients<'_> {
    fn egamma_sup(&self, log_gamma: f64) -> f64 {
        self.0.gn(log_gamma)
    }
    fn expect_sup(&self, log_gamma: f64) -> f64 {
        self.0.hn(log_gamma)
    }
    fn legit_rcu(&self, log_a: f64) -> f64 {
        if log_a <= self.0.n as f64 * LN_2 * (1.0 + 1e-15) {
            0.0
        } else {
            1.0
        }
    }
    fn log_gamma_grid(&self) -> Vec<f64> {
        self.0.log_gamma_grid()
    }
}
