//! Scalar special functions and one-dimensional solvers.
//!
//! Everything that accumulates probability mass works in the natural-log
//! domain. `f64::NEG_INFINITY` is the representation of `ln 0`.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// Default absolute tolerance for [`bisect_monotone`].
pub const ROOT_TOL: f64 = 1e-10;
/// Default absolute tolerance for [`minimize_scalar`].
pub const MIN_TOL: f64 = 1e-8;
/// Number of points in the default `ln γ` search grid.
pub const GAMMA_GRID_POINTS: usize = 512;

/// A natural-log probability (or mass). `LogProb::ZERO` encodes `ln 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct LogProb(pub f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn from_prob(p: f64) -> Self {
        LogProb(p.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// `ln(e^a + e^b)` without leaving the log domain.
impl std::ops::Add for LogProb {
    type Output = LogProb;

    fn add(self, other: LogProb) -> LogProb {
        LogProb(log_add_exp(self.0, other.0))
    }
}

impl std::ops::Mul for LogProb {
    type Output = LogProb;

    // Multiplying probabilities adds their logs.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: LogProb) -> LogProb {
        LogProb(self.0 + other.0)
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x ≤ 0`, accurate near both ends.
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, finite far into the upper tail where `Q` itself underflows.
pub fn ln_q_func(x: f64) -> f64 {
    if x < 30.0 {
        return q_func(x).ln();
    }
    // Asymptotic series of the Mills ratio.
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`q_func`] on `(0, 1)`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("q_inv needs p in (0,1), got {p}")));
    }
    let mut x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // Two Newton steps polish the last few ulps of erfc_inv.
    for _ in 0..2 {
        let d = normal_pdf(x);
        if d <= 0.0 || !d.is_finite() {
            break;
        }
        let step = (q_func(x) - p) / d;
        if !step.is_finite() {
            break;
        }
        x += step;
    }
    Ok(x)
}

/// `ln [C(n,k) p^k (1-p)^(n-k)]` with `0·ln 0 = 0`.
pub fn log_binom_pmf(n: u64, k: u64, p: f64) -> Result<LogProb> {
    if k > n {
        return Err(domain(format!("binomial outcome {k} exceeds trials {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binomial parameter {p} outside [0,1]")));
    }
    let xlogy = |m: u64, q: f64| if m == 0 { 0.0 } else { m as f64 * q.ln() };
    Ok(LogProb(
        ln_binomial(n, k) + xlogy(k, p) + xlogy(n - k, (1.0 - p).max(0.0)),
    ))
}

/// All `n + 1` binomial log-masses at once. Uses `ln(1-p)` computed via
/// `ln_1p` so small `p` does not lose precision.
pub fn log_binom_pmf_all(n: u64, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binomial parameter {p} outside [0,1]")));
    }
    let lp = p.ln();
    let lq = (-p).ln_1p();
    let ln_n1 = ln_gamma(n as f64 + 1.0);
    Ok((0..=n)
        .map(|k| {
            let a = if k == 0 { 0.0 } else { k as f64 * lp };
            let b = if k == n { 0.0 } else { (n - k) as f64 * lq };
            let c = if k == 0 || k == n {
                0.0
            } else if n <= 170 {
                ln_binomial(n, k)
            } else {
                ln_n1 - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
            };
            a + b + c
        })
        .collect())
}

/// `ln Σ exp(t)` over a nonempty slice of log terms.
pub fn logsumexp(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(domain("logsumexp of an empty sequence"));
    }
    Ok(logsumexp_unchecked(terms))
}

pub(crate) fn logsumexp_unchecked(terms: &[f64]) -> f64 {
    if terms.len() == 1 {
        return terms[0];
    }
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    m + s.ln()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    h(p) + h(1.0 - p)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln I_x(a, b)`, the log of the regularized incomplete beta function.
///
/// Evaluated with the Lentz continued fraction entirely in the log domain so
/// results around `e^-4000` stay representable.
pub fn ln_beta_inc(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain(format!(
            "incomplete beta needs a, b > 0, got {a}, {b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("incomplete beta needs x in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    let front = |a: f64, b: f64, x: f64| a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b) - a.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front(a, b, x) + beta_cf(a, b, x)?.ln())
    } else {
        let other = front(b, a, 1.0 - x) + beta_cf(b, a, 1.0 - x)?.ln();
        Ok(ln_1m_exp(other.min(0.0)))
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::Solver(format!(
        "incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )))
}

// ---------------------------------------------------------------------------
// Solvers

/// A search interval `[lo, hi]` together with the absolute tolerance to
/// which it should be shrunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl BracketedRoot {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        Self::with_tol(lo, hi, ROOT_TOL)
    }

    pub fn with_tol(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(domain(format!(
                "bracket needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(tol > 0.0) {
            return Err(domain(format!(
                "bracket tolerance must be positive, got {tol}"
            )));
        }
        Ok(BracketedRoot { lo, hi, tol })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Shrinks `bracket` around the point where the monotone `f` crosses
/// `level` and returns the final interval.
///
/// The returned interval keeps the orientation of the input: `f(lo)` and
/// `f(hi)` remain on their original sides of `level` (ties go to `lo`'s
/// side). That makes it a pseudo-inverse for monotone step functions too.
pub fn bisect_bracket(
    mut f: impl FnMut(f64) -> f64,
    level: f64,
    bracket: BracketedRoot,
) -> Result<BracketedRoot> {
    let BracketedRoot {
        mut lo,
        mut hi,
        tol,
    } = bracket;
    let f_lo = f(lo);
    let f_hi = f(hi);
    let lo_below = f_lo <= level;
    let hi_below = f_hi <= level;
    if lo_below == hi_below || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo,
            f_hi,
            level,
        });
    }
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = f(mid) <= level;
        if below == lo_below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BracketedRoot { lo, hi, tol })
}

/// Solves `f(x) = level` for monotone `f` by bisection. The answer is the
/// midpoint of a final interval of width at most `bracket.tol`.
pub fn bisect_monotone(
    f: impl FnMut(f64) -> f64,
    level: f64,
    bracket: BracketedRoot,
) -> Result<f64> {
    Ok(bisect_bracket(f, level, bracket)?.mid())
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// The default `ln γ` grid for blocklength `n`: 512 points spanning
/// `[-2n ln 2, 2n ln 2]`.
pub fn default_log_gamma_grid(n: u64) -> Vec<f64> {
    let r = 2.0 * (n.max(1) as f64) * std::f64::consts::LN_2;
    linspace(-r, r, GAMMA_GRID_POINTS)
}

/// Result of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub argmin: f64,
    pub min: f64,
    /// The best grid point was the first or last grid entry.
    pub at_boundary: bool,
}

/// Grid scan followed by golden-section refinement inside the cell pair
/// around the best grid point. Non-finite evaluations count as `+∞`.
pub fn minimize_scalar(
    f: impl Fn(f64) -> f64,
    grid: &[f64],
    refine_iters: usize,
) -> Result<ScalarMin> {
    minimize_scalar_tol(f, grid, refine_iters, MIN_TOL)
}

pub fn minimize_scalar_tol(
    f: impl Fn(f64) -> f64,
    grid: &[f64],
    refine_iters: usize,
    tol: f64,
) -> Result<ScalarMin> {
    if grid.is_empty() {
        return Err(domain("minimize_scalar on an empty grid"));
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let vals: Vec<f64> = grid.iter().map(|&x| eval(x)).collect();
    let (mut best_i, mut best) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if v < best {
            best_i = i;
            best = v;
        }
    }
    let at_boundary = grid.len() > 1 && (best_i == 0 || best_i == grid.len() - 1);
    let mut argmin = grid[best_i];
    if grid.len() >= 2 && refine_iters > 0 {
        let mut a = grid[best_i.saturating_sub(1)];
        let mut b = grid[(best_i + 1).min(grid.len() - 1)];
        let invphi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - invphi * (b - a);
        let mut d = a + invphi * (b - a);
        let (mut fc, mut fd) = (eval(c), eval(d));
        for _ in 0..refine_iters {
            if (b - a).abs() <= tol {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = eval(d);
            }
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best {
                best = v;
                argmin = x;
            }
        }
    }
    Ok(ScalarMin {
        argmin,
        min: best,
        at_boundary,
    })
}
