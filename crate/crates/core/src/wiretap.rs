//! Channel-agnostic wiretap theorems.
//!
//! Achievability bounds take the channel in through [`SecrecyIngredients`]:
//! the channel modules compute the eavesdropper suprema and the legitimate
//! channel error evaluators using whatever symmetry they have, and the
//! combinators here assemble them. Converses take a `ln β` evaluator.
//!
//! Message counts, randomization sizes and thresholds are exponentially
//! large at realistic blocklengths, so they are passed as natural logs:
//! `log_m = ln M`, `log_l = ln L`, `log_gamma = ln γ`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::dmc::WiretapSpec;
use crate::error::{domain, Error, Result};
use crate::numerics::{
    bisect_bracket, linspace, log_add_exp, minimize_scalar, BracketedRoot, GAMMA_GRID_POINTS,
};

/// Channel-specific pieces of the achievability theorems.
pub trait SecrecyIngredients: Sync {
    /// `sup_x E_γ(P_{Z|X=x}, Q_Z)` at `ln γ`.
    fn egamma_sup(&self, log_gamma: f64) -> f64;
    /// `sup_x E_{P_{Z|X=x}}[exp(−|ı(x;Z) − ln γ|)]` at `ln γ`.
    fn expect_sup(&self, log_gamma: f64) -> f64;
    /// Random-coding union bound on the average error of `a` codewords, at `ln a`.
    fn legit_rcu(&self, log_a: f64) -> f64;
    /// Dependence-testing bound at `ln a`. Defaults to the trivial bound 1.
    fn legit_dt(&self, _log_a: f64) -> f64 {
        1.0
    }
    /// Maximal-error dependence-testing bound at `ln a`. Defaults to 1.
    fn legit_dt_max(&self, _log_a: f64) -> f64 {
        1.0
    }
    /// Grid of `ln γ` values to search.
    fn log_gamma_grid(&self) -> Vec<f64>;
}

/// Code dimensions in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodeParams {
    pub log_m: f64,
    pub log_l: f64,
    pub n: u64,
}

impl CodeParams {
    pub fn new(log_m: f64, log_l: f64, n: u64) -> Result<Self> {
        if !(log_m >= 0.0 && log_l >= 0.0) {
            return Err(domain(format!(
                "M and L must be at least 1 (got ln M = {log_m}, ln L = {log_l})"
            )));
        }
        Ok(CodeParams { log_m, log_l, n })
    }

    /// `ln(M L)`.
    pub fn log_ml(&self) -> f64 {
        self.log_m + self.log_l
    }
}

/// Error and leakage guaranteed by an achievability theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AchBound {
    pub eps: f64,
    pub delta: f64,
}

/// `½ √(γ/L · e)` computed from logs.
fn sqrt_term(log_gamma: f64, log_l: f64, expect: f64) -> f64 {
    if expect <= 0.0 {
        return 0.0;
    }
    0.5 * (0.5 * (log_gamma - log_l + expect.ln())).exp()
}

/// `√(ln(c·M + 1) / (2L))` with `ln c` given.
fn concentration(log_c: f64, log_m: f64, log_l: f64) -> f64 {
    let ln_cm1 = log_add_exp(log_c + log_m, 0.0);
    (0.5 * (ln_cm1.ln() - std::f64::consts::LN_2 - log_l)).exp()
}

/// `√(ln(M+1) / (2L))`, the maximal-secrecy concentration penalty.
pub fn concentration_max(log_m: f64, log_l: f64) -> f64 {
    concentration(0.0, log_m, log_l)
}

/// `√(ln(2M+1) / (2L))`, the joint error/secrecy concentration penalty.
pub fn concentration_max2(log_m: f64, log_l: f64) -> f64 {
    concentration(std::f64::consts::LN_2, log_m, log_l)
}

/// `ln((a − 1)/2)`, or `−∞` for `a ≤ 1`.
fn log_half_am1(log_a: f64) -> f64 {
    if log_a <= 0.0 {
        f64::NEG_INFINITY
    } else {
        log_a + crate::numerics::ln_1m_exp(-log_a) - std::f64::consts::LN_2
    }
}

/// `ln(a − 1)`, or `−∞` for `a ≤ 1`.
fn log_am1(log_a: f64) -> f64 {
    if log_a <= 0.0 {
        f64::NEG_INFINITY
    } else {
        log_a + crate::numerics::ln_1m_exp(-log_a)
    }
}

/// Average-error bound `min(ε_RCU(a), ε_DT((a−1)/2))`.
pub fn eps_avg<I: SecrecyIngredients + ?Sized>(ing: &I, log_a: f64) -> f64 {
    let dt = if log_a > 0.0 {
        ing.legit_dt(log_half_am1(log_a))
    } else {
        1.0
    };
    ing.legit_rcu(log_a).min(dt).clamp(0.0, 1.0)
}

/// `E_γ` term plus the hashing square-root term, shared by all three
/// theorems.
pub fn secrecy_core<I: SecrecyIngredients + ?Sized>(ing: &I, log_l: f64, log_gamma: f64) -> f64 {
    ing.egamma_sup(log_gamma) + sqrt_term(log_gamma, log_l, ing.expect_sup(log_gamma))
}

/// Uniform-message achievability with average error and average secrecy.
pub fn ach_avg<I: SecrecyIngredients + ?Sized>(
    ing: &I,
    cp: CodeParams,
    log_gamma: f64,
) -> AchBound {
    AchBound {
        eps: eps_avg(ing, cp.log_ml()),
        delta: secrecy_core(ing, cp.log_l, log_gamma),
    }
}

/// Expurgated RCU: `inf_τ ε_RCU(a/(1−τ)) / τ` over a grid of `τ ∈ (0,1)`.
pub fn rcu_max<I: SecrecyIngredients + ?Sized>(ing: &I, log_a: f64) -> f64 {
    let grid = expurgation_grid();
    let f = |tau: f64| ing.legit_rcu(log_a - (-tau).ln_1p()) / tau;
    minimize_scalar(f, &grid, 60)
        .map(|m| m.min)
        .unwrap_or(1.0)
        .min(1.0)
}

fn expurgation_grid() -> Vec<f64> {
    let mut g: Vec<f64> = linspace(-12.0, -0.7, 96)
        .into_iter()
        .map(f64::exp)
        .collect();
    g.extend(linspace(0.5, 1.0 - 1e-9, 96).into_iter().skip(1));
    g
}

/// Maximal-error, maximal-secrecy achievability.
pub fn ach_max<I: SecrecyIngredients + ?Sized>(
    ing: &I,
    cp: CodeParams,
    log_gamma: f64,
) -> AchBound {
    let log_a = cp.log_ml();
    let eps = ing
        .legit_dt_max(log_am1(log_a))
        .min(rcu_max(ing, log_a))
        .clamp(0.0, 1.0);
    AchBound {
        eps,
        delta: secrecy_core(ing, cp.log_l, log_gamma) + concentration_max(cp.log_m, cp.log_l),
    }
}

/// Maximal-error, maximal-secrecy achievability through joint concentration
/// of error and leakage.
pub fn ach_max2<I: SecrecyIngredients + ?Sized>(
    ing: &I,
    cp: CodeParams,
    log_gamma: f64,
) -> AchBound {
    let c = concentration_max2(cp.log_m, cp.log_l);
    AchBound {
        eps: eps_avg(ing, cp.log_ml()) + c,
        delta: secrecy_core(ing, cp.log_l, log_gamma) + c,
    }
}

/// Which achievability theorem to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AchTheorem {
    Avg,
    Max,
    Max2,
}

/// Secrecy metric of a code: average over messages or worst message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Avg,
    Max,
}

/// Evaluates the chosen theorem.
pub fn ach_bound<I: SecrecyIngredients + ?Sized>(
    ing: &I,
    thm: AchTheorem,
    cp: CodeParams,
    log_gamma: f64,
) -> AchBound {
    match thm {
        AchTheorem::Avg => ach_avg(ing, cp, log_gamma),
        AchTheorem::Max => ach_max(ing, cp, log_gamma),
        AchTheorem::Max2 => ach_max2(ing, cp, log_gamma),
    }
}

/// Best achievable rate found by [`optimize_ach_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AchRate {
    /// `ln M`, or 0 when nothing is feasible.
    pub log_m: f64,
    pub log_l: f64,
    pub log_gamma: f64,
    pub eps: f64,
    pub delta: f64,
    pub feasible: bool,
    /// The `γ` minimizer sat on the edge of the search grid.
    pub gamma_at_boundary: bool,
}

/// Largest `ln M` (up to `tol` nats) such that some `L` and `γ` make the
/// chosen theorem certify error `≤ eps` and leakage `≤ delta`.
///
/// `log_ml_max` caps `ln(ML)` (for instance `n ln |X|`).
pub fn optimize_ach_rate<I: SecrecyIngredients + ?Sized>(
    ing: &I,
    thm: AchTheorem,
    n: u64,
    eps: f64,
    delta: f64,
    log_ml_max: f64,
) -> Result<AchRate> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(domain(format!(
            "need eps, delta in (0,1), got {eps}, {delta}"
        )));
    }
    let grid = ing.log_gamma_grid();
    let core = |log_l: f64| -> (f64, f64, bool) {
        match minimize_scalar(|lg| secrecy_core(ing, log_l, lg), &grid, 80) {
            Ok(m) => (m.min, m.argmin, m.at_boundary),
            Err(_) => (f64::INFINITY, 0.0, false),
        }
    };
    let tol = 1e-6;
    let infeasible = AchRate {
        log_m: 0.0,
        log_l: 0.0,
        log_gamma: 0.0,
        eps: 1.0,
        delta: 1.0,
        feasible: false,
        gamma_at_boundary: false,
    };

    // Smallest ln L that meets the leakage target for message count ln M.
    let penalty = |log_m: f64, log_l: f64| match thm {
        AchTheorem::Avg => 0.0,
        AchTheorem::Max => concentration_max(log_m, log_l),
        AchTheorem::Max2 => concentration_max2(log_m, log_l),
    };
    let min_log_l = |log_m: f64| -> Option<f64> {
        let ok = |log_l: f64| core(log_l).0 + penalty(log_m, log_l) <= delta;
        let hi = log_ml_max - log_m;
        if hi < 0.0 || !ok(hi) {
            return None;
        }
        if ok(0.0) {
            return Some(0.0);
        }
        let br = BracketedRoot::with_tol(0.0, hi, tol).ok()?;
        let b = bisect_bracket(|x| if ok(x) { 0.0 } else { 1.0 }, 0.5, br).ok()?;
        Some(b.hi)
    };
    // Evaluate feasibility of ln M; returns the certified point if any.
    let certify = |log_m: f64| -> Option<AchRate> {
        let l0 = min_log_l(log_m)?;
        let mut candidates = vec![l0];
        if thm == AchTheorem::Max2 {
            for extra in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
                if log_m + l0 + extra <= log_ml_max {
                    candidates.push(l0 + extra);
                }
            }
        }
        for log_l in candidates {
            let (_, lg, edge) = core(log_l);
            let cp = CodeParams::new(log_m, log_l, n).ok()?;
            let b = ach_bound(ing, thm, cp, lg);
            if b.eps <= eps && b.delta <= delta {
                return Some(AchRate {
                    log_m,
                    log_l,
                    log_gamma: lg,
                    eps: b.eps,
                    delta: b.delta,
                    feasible: true,
                    gamma_at_boundary: edge,
                });
            }
        }
        None
    };
    let Some(mut best) = certify(0.0) else {
        return Ok(infeasible);
    };
    let (mut lo, mut hi) = (0.0, log_ml_max);
    if let Some(r) = certify(hi) {
        return Ok(r);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match certify(mid) {
            Some(r) => {
                best = r;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Converses

/// Output of [`converse_bht`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BhtConverse {
    /// Upper bound on `ln M`.
    pub log_m: f64,
    pub tau_star: f64,
    /// The `1/(τ² β)` comparison bound on `ln M`.
    pub hayashi_log_m: f64,
    pub hayashi_tau: f64,
    /// The new bound was at most the comparison bound at every grid point.
    pub dominates_pointwise: bool,
    /// Largest pointwise excess of the new objective over the comparison
    /// objective (≤ 0 when it dominates).
    pub max_excess: f64,
    pub tau_at_boundary: bool,
}

/// A grid of `τ` in `(0, 1 − ε − δ)`: log-spaced on the lower half,
/// linear on the upper half.
pub fn default_tau_grid(eps: f64, delta: f64) -> Vec<f64> {
    let s = 1.0 - eps - delta;
    let lower = GAMMA_GRID_POINTS * 3 / 4;
    let mut g: Vec<f64> = linspace((s * 1e-12).ln(), (0.5 * s).ln(), lower)
        .into_iter()
        .map(f64::exp)
        .collect();
    g.extend(
        linspace(0.5 * s, s * (1.0 - 1e-9), GAMMA_GRID_POINTS - lower + 1)
            .into_iter()
            .skip(1),
    );
    g
}

/// Hypothesis-testing converse:
/// `ln M ≤ min_τ [ln((τ+δ)/τ) − ln β_{1−ε−δ−τ}]`, alongside the
/// `−2 ln τ − ln β` comparison bound.
///
/// `log_beta(α)` must return `ln β_α(P_XYZ, P_XZ Q_{Y|Z})`.
pub fn converse_bht(
    log_beta: impl Fn(f64) -> f64,
    eps: f64,
    delta: f64,
    tau_grid: &[f64],
) -> Result<BhtConverse> {
    if !(eps >= 0.0 && delta >= 0.0) {
        return Err(domain(format!(
            "eps, delta must be nonnegative, got {eps}, {delta}"
        )));
    }
    let s = 1.0 - eps - delta;
    if !(s > 0.0) {
        return Err(Error::Infeasible(format!(
            "eps + delta = {} >= 1: the strong converse does not hold in this regime",
            eps + delta
        )));
    }
    let grid: Vec<f64> = tau_grid
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < s)
        .collect();
    if grid.is_empty() {
        return Err(domain("tau grid has no points inside (0, 1 - eps - delta)"));
    }
    let ours = |t: f64| ((t + delta) / t).ln() - log_beta(s - t);
    let theirs = |t: f64| -2.0 * t.ln() - log_beta(s - t);
    let mut max_excess = f64::NEG_INFINITY;
    for &t in &grid {
        let lb = log_beta(s - t);
        let a = ((t + delta) / t).ln() - lb;
        let b = -2.0 * t.ln() - lb;
        max_excess = max_excess.max(a - b);
    }
    // Refine in ln τ so tiny τ gets the same resolution as large τ.
    let log_grid: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let a = minimize_scalar(|lt| ours(lt.exp()), &log_grid, 80)?;
    let b = minimize_scalar(|lt| theirs(lt.exp()), &log_grid, 80)?;
    Ok(BhtConverse {
        log_m: a.min,
        tau_star: a.argmin.exp(),
        hayashi_log_m: b.min,
        hayashi_tau: b.argmin.exp(),
        dominates_pointwise: max_excess <= 0.0,
        max_excess,
        tau_at_boundary: a.at_boundary,
    })
}

// ---------------------------------------------------------------------------
// Trade transforms

/// Leakage after trading error `eps0 → eps`: `δ0 (1−ε)/(1−ε0)`.
pub fn trade_rel_for_sec(eps0: f64, delta0: f64, eps: f64) -> Result<f64> {
    if !((0.0..1.0).contains(&eps0) && (0.0..1.0).contains(&delta0)) {
        return Err(domain(format!(
            "eps0, delta0 must lie in [0,1), got {eps0}, {delta0}"
        )));
    }
    if !(eps > eps0 && eps <= 1.0) {
        return Err(domain(format!(
            "eps = {eps} must exceed eps0 = {eps0} and be at most 1"
        )));
    }
    Ok(delta0 * (1.0 - eps) / (1.0 - eps0))
}

/// Leakage of the zero-error code obtained from an `(M, ε, δ)` code on a
/// semi-deterministic channel: `δ/(1−ε) + ½ √(M'/(M(1−ε)))`, with
/// `ln M` and `ln M'` given.
pub fn trade_sec_for_rel(log_m: f64, eps: f64, delta: f64, log_m_prime: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(domain(format!("eps must lie in [0,1), got {eps}")));
    }
    if !(log_m_prime >= 0.0) {
        return Err(domain("M' must be at least 1"));
    }
    let log_ratio = log_m_prime - log_m - (-eps).ln_1p();
    Ok(delta / (1.0 - eps) + 0.5 * (0.5 * log_ratio).exp())
}

// ---------------------------------------------------------------------------
// Semi-deterministic converse

/// Output of [`semidet_converse`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemidetConverse {
    /// Upper bound on `ln M`.
    pub log_m: f64,
    /// Every `M` up to `|Y|^n` passes; `log_m` is capped there.
    pub vacuous: bool,
    /// Even `M = 1` violates the condition.
    pub infeasible: bool,
    /// Minimizing `P_X`, `Q_Z` at the final threshold.
    pub p_x: Vec<f64>,
    pub q_z: Vec<f64>,
    /// Objective value reached by the Frank–Wolfe cross-check.
    pub fw_value: f64,
    pub fw_iterations: usize,
    /// Final Frank–Wolfe linearization gap.
    pub fw_gap: f64,
    /// The Frank–Wolfe objective never increased.
    pub fw_monotone: bool,
}

/// `min_{P_X, Q_Z} E_γ(P_{YZ|X}∘P_X, Q^unif_Y Q_Z)` for a semi-deterministic
/// channel.
pub struct SemidetObjective {
    /// Legitimate output of each input.
    f: Vec<usize>,
    w: Vec<Vec<f64>>,
    ny: usize,
    nz: usize,
}

impl SemidetObjective {
    /// Builds the `n`-fold product of a semi-deterministic channel.
    pub fn new(wtc: &WiretapSpec, n: usize) -> Result<Self> {
        let f1 = wtc
            .legit
            .deterministic_map()
            .ok_or_else(|| domain("legitimate channel is not deterministic"))?;
        let nx1 = wtc.legit.input_size();
        let ny1 = wtc.legit.output_size();
        let nz1 = wtc.eve.output_size();
        let size = |b: usize| (b as f64).powi(n as i32);
        if n == 0 || size(ny1) * size(nz1) > 40_000.0 || size(nx1) > 4096.0 {
            return Err(Error::TooLarge(format!(
                "{n}-fold product of a {nx1}x{ny1}x{nz1} channel is too large for the LP"
            )));
        }
        let mut f = vec![0usize];
        let mut w = vec![vec![1.0]];
        let (mut ny, mut nz) = (1usize, 1usize);
        for _ in 0..n {
            let mut f2 = Vec::with_capacity(f.len() * nx1);
            let mut w2 = Vec::with_capacity(f.len() * nx1);
            for (xa, row) in w.iter().enumerate() {
                for x in 0..nx1 {
                    f2.push(f[xa] * ny1 + f1[x]);
                    let mut r = Vec::with_capacity(nz * nz1);
                    for a in row {
                        for z in 0..nz1 {
                            r.push(a * wtc.eve.prob(x, z));
                        }
                    }
                    w2.push(r);
                }
            }
            f = f2;
            w = w2;
            ny *= ny1;
            nz *= nz1;
        }
        Ok(SemidetObjective { f, w, ny, nz })
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    /// Objective at a given `(P_X, Q_Z)` with `c = γ/|Y|`.
    pub fn eval(&self, p: &[f64], q: &[f64], c: f64) -> f64 {
        let a = self.mix(p);
        a.iter()
            .enumerate()
            .map(|(i, v)| (v - c * q[i % self.nz]).max(0.0))
            .sum()
    }

    /// `P_YZ` flattened as `y * nz + z`.
    fn mix(&self, p: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.ny * self.nz];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let base = self.f[x] * self.nz;
            for (z, w) in self.w[x].iter().enumerate() {
                a[base + z] += px * w;
            }
        }
        a
    }

    /// Exact minimum via linear programming at `ln γ`.
    pub fn solve_lp(&self, log_gamma: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let c = (log_gamma - (self.ny as f64).ln()).exp();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let px: Vec<_> = (0..self.f.len())
            .map(|_| lp.add_var(0.0, (0.0, 1.0)))
            .collect();
        let qz: Vec<_> = (0..self.nz).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        lp.add_constraint(px.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        lp.add_constraint(qz.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.ny];
        for (x, &y) in self.f.iter().enumerate() {
            members[y].push(x);
        }
        for xs in &members {
            if xs.is_empty() {
                // Only Q-mass there; the positive part is zero.
                continue;
            }
            for z in 0..self.nz {
                let t = lp.add_var(1.0, (0.0, f64::INFINITY));
                let mut expr: Vec<(minilp::Variable, f64)> = vec![(t, 1.0), (qz[z], c)];
                for &x in xs {
                    let w = self.w[x][z];
                    if w != 0.0 {
                        expr.push((px[x], -w));
                    }
                }
                lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
            }
        }
        let sol = lp
            .solve()
            .map_err(|e| Error::Solver(format!("LP failed: {e}")))?;
        let p: Vec<f64> = px.iter().map(|&v| sol[v].max(0.0)).collect();
        let q: Vec<f64> = qz.iter().map(|&v| sol[v].max(0.0)).collect();
        // Re-evaluate at the returned point so the value is exactly attained.
        let value = self.eval(&p, &q, c);
        Ok((value, p, q))
    }

    /// Frank–Wolfe with exact line search on the piecewise-linear objective.
    /// Only a descent diagnostic: it can stall at a kink above the minimum.
    /// Returns `(value, p, q, iterations, gap, monotone)`.
    pub fn frank_wolfe(
        &self,
        log_gamma: f64,
        max_iter: usize,
    ) -> (f64, Vec<f64>, Vec<f64>, usize, f64, bool) {
        let c = (log_gamma - (self.ny as f64).ln()).exp();
        let nx = self.f.len();
        let mut p = vec![1.0 / nx as f64; nx];
        let mut q = vec![1.0 / self.nz as f64; self.nz];
        let mut val = self.eval(&p, &q, c);
        let mut monotone = true;
        let mut gap = f64::INFINITY;
        let mut it = 0;
        while it < max_iter {
            it += 1;
            let a = self.mix(&p);
            let active: Vec<bool> = a
                .iter()
                .enumerate()
                .map(|(i, v)| v - c * q[i % self.nz] > 0.0)
                .collect();
            // Subgradient.
            let gp: Vec<f64> = (0..nx)
                .map(|x| {
                    let base = self.f[x] * self.nz;
                    self.w[x]
                        .iter()
                        .enumerate()
                        .filter(|(z, _)| active[base + z])
                        .map(|(_, w)| w)
                        .sum()
                })
                .collect();
            let mut gq = vec![0.0; self.nz];
            for (i, &on) in active.iter().enumerate() {
                if on {
                    gq[i % self.nz] -= c;
                }
            }
            let (sx, _) = argmin(&gp);
            let (sz, _) = argmin(&gq);
            gap = dot(&gp, &p) - gp[sx] + dot(&gq, &q) - gq[sz];
            if gap <= 1e-12 {
                break;
            }
            // Direction d = s − current. Objective along the segment is
            // Σ (u_i + t v_i)⁺, minimized over t ∈ [0,1] at a breakpoint.
            let mut dp = p.iter().map(|v| -v).collect::<Vec<_>>();
            dp[sx] += 1.0;
            let mut dq = q.iter().map(|v| -v).collect::<Vec<_>>();
            dq[sz] += 1.0;
            let da = self.mix_signed(&dp);
            let u: Vec<f64> = a
                .iter()
                .enumerate()
                .map(|(i, v)| v - c * q[i % self.nz])
                .collect();
            let v: Vec<f64> = da
                .iter()
                .enumerate()
                .map(|(i, d)| d - c * dq[i % self.nz])
                .collect();
            let mut cands = vec![0.0, 1.0];
            for (ui, vi) in u.iter().zip(&v) {
                if *vi != 0.0 {
                    let t = -ui / vi;
                    if t > 0.0 && t < 1.0 {
                        cands.push(t);
                    }
                }
            }
            let phi = |t: f64| -> f64 { u.iter().zip(&v).map(|(a, b)| (a + t * b).max(0.0)).sum() };
            let (mut bt, mut bv) = (0.0, phi(0.0));
            for t in cands {
                let fv = phi(t);
                if fv < bv {
                    bt = t;
                    bv = fv;
                }
            }
            if bt == 0.0 {
                break;
            }
            for (pi, di) in p.iter_mut().zip(&dp) {
                *pi = (*pi + bt * di).max(0.0);
            }
            for (qi, di) in q.iter_mut().zip(&dq) {
                *qi = (*qi + bt * di).max(0.0);
            }
            let nv = self.eval(&p, &q, c);
            if nv > val + 1e-12 {
                monotone = false;
            }
            val = nv;
        }
        (val, p, q, it, gap, monotone)
    }

    fn mix_signed(&self, d: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.ny * self.nz];
        for (x, &dx) in d.iter().enumerate() {
            if dx == 0.0 {
                continue;
            }
            let base = self.f[x] * self.nz;
            for (z, w) in self.w[x].iter().enumerate() {
                a[base + z] += dx * w;
            }
        }
        a
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::INFINITY),
        |b, (i, x)| if x < b.1 { (i, x) } else { b },
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Converse for semi-deterministic channels over `n` uses: the largest
/// `ln M` with `min_{P_X,Q_Z} E_{|Y|^n/(M(1−ε))}(…) ≤ δ/(1−ε)`.
pub fn semidet_converse(
    wtc: &WiretapSpec,
    n: usize,
    eps: f64,
    delta: f64,
) -> Result<SemidetConverse> {
    if !(0.0..1.0).contains(&eps) {
        return Err(domain(format!("eps must lie in [0,1), got {eps}")));
    }
    if !(delta >= 0.0) {
        return Err(domain(format!("delta must be nonnegative, got {delta}")));
    }
    if !wtc.tags.semi_deterministic {
        return Err(domain("wiretap spec is not tagged semi-deterministic"));
    }
    let obj = SemidetObjective::new(wtc, n)?;
    let ln_y = (obj.output_size() as f64).ln();
    let ln_1me = (-eps).ln_1p();
    let t = delta / (1.0 - eps);
    let log_gamma_of = |log_m: f64| ln_y - log_m - ln_1me;
    let empty = |log_m: f64, vacuous: bool, infeasible: bool| SemidetConverse {
        log_m,
        vacuous,
        infeasible,
        p_x: vec![],
        q_z: vec![],
        fw_value: f64::NAN,
        fw_iterations: 0,
        fw_gap: f64::NAN,
        fw_monotone: true,
    };
    if t >= 1.0 {
        return Ok(empty(ln_y, true, false));
    }
    let feasible = |log_m: f64| -> Result<bool> { Ok(obj.solve_lp(log_gamma_of(log_m))?.0 <= t) };
    if !feasible(0.0)? {
        return Ok(empty(0.0, false, true));
    }
    // Beyond this M the threshold drops below 1 − t and E_γ ≥ 1 − γ > t.
    let hi = ln_y - ln_1me - (-t).ln_1p();
    let mut lo = 0.0;
    let mut hi = hi;
    if feasible(hi)? {
        lo = hi;
    }
    let mut err = None;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Ok(true) => lo = mid,
            Ok(false) => hi = mid,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let lg = log_gamma_of(lo);
    let (_, p, q) = obj.solve_lp(lg)?;
    let (fw_value, _, _, fw_iterations, fw_gap, fw_monotone) = obj.frank_wolfe(lg, 2000);
    // Past |Y|^n messages the bound is no better than counting outputs.
    Ok(SemidetConverse {
        log_m: lo.min(ln_y),
        vacuous: lo >= ln_y,
        infeasible: false,
        p_x: p,
        q_z: q,
        fw_value,
        fw_iterations,
        fw_gap,
        fw_monotone,
    })
}
