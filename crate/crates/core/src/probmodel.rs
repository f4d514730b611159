//! Finite distributions and channels, and the three metrics the bounds are
//! phrased in: total variation, `E_γ`, and the Neyman–Pearson `β_α`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::ln_1m_exp;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Anything that exposes a flat vector of probability masses.
pub trait Masses {
    fn flat(&self) -> &[f64];
}

impl Masses for [f64] {
    fn flat(&self) -> &[f64] {
        self
    }
}

impl Masses for Vec<f64> {
    fn flat(&self) -> &[f64] {
        self
    }
}

fn check_masses(row: usize, masses: &[f64]) -> Result<()> {
    if masses.is_empty() {
        return Err(Error::InvalidDistribution {
            row,
            defect: "empty alphabet".into(),
        });
    }
    if let Some((i, &m)) = masses
        .iter()
        .enumerate()
        .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
    {
        return Err(Error::InvalidDistribution {
            row,
            defect: format!("entry {i} is {m}, expected a finite nonnegative mass"),
        });
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidDistribution {
            row,
            defect: format!("masses sum to {total} (defect {:+e})", total - 1.0),
        });
    }
    Ok(())
}

/// A probability mass function on `{0, …, len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteDist {
    masses: Vec<f64>,
}

impl TryFrom<Vec<f64>> for FiniteDist {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FiniteDist::new(v)
    }
}

impl From<FiniteDist> for Vec<f64> {
    fn from(d: FiniteDist) -> Self {
        d.masses
    }
}

impl FiniteDist {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        check_masses(0, &masses)?;
        Ok(FiniteDist { masses })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(domain("weights must be nonnegative with positive sum"));
        }
        Ok(FiniteDist {
            masses: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution on an empty alphabet");
        FiniteDist {
            masses: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        assert!(at < n, "point mass outside the alphabet");
        let mut masses = vec![0.0; n];
        masses[at] = 1.0;
        FiniteDist { masses }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, _)| i)
    }
}

impl std::ops::Index<usize> for FiniteDist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.masses[i]
    }
}

impl Masses for FiniteDist {
    fn flat(&self) -> &[f64] {
        &self.masses
    }
}

/// A distribution on a product alphabet, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    rows: usize,
    cols: usize,
    masses: Vec<f64>,
}

impl JointDist {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(
                "joint distribution needs a nonempty matrix".into(),
            ));
        }
        if let Some(r) = matrix.iter().position(|r| r.len() != cols) {
            return Err(Error::Shape(format!(
                "row {r} has {} entries, expected {cols}",
                matrix[r].len()
            )));
        }
        let masses: Vec<f64> = matrix.into_iter().flatten().collect();
        check_masses(0, &masses)?;
        Ok(JointDist { rows, cols, masses })
    }

    /// `P_X × P_{Z|X}`.
    pub fn from_input_channel(p: &FiniteDist, ch: &DiscreteChannel) -> Result<Self> {
        if p.len() != ch.input_size() {
            return Err(Error::Shape(format!(
                "input distribution has {} symbols, channel has {} inputs",
                p.len(),
                ch.input_size()
            )));
        }
        let cols = ch.output_size();
        let mut masses = Vec::with_capacity(p.len() * cols);
        for (x, row) in ch.rows().iter().enumerate() {
            masses.extend(row.masses().iter().map(|w| p[x] * w));
        }
        Ok(JointDist {
            rows: p.len(),
            cols,
            masses,
        })
    }

    /// `P_X × Q_Z`.
    pub fn product(p: &FiniteDist, q: &FiniteDist) -> Self {
        let mut masses = Vec::with_capacity(p.len() * q.len());
        for &a in p.masses() {
            masses.extend(q.masses().iter().map(|b| a * b));
        }
        JointDist {
            rows: p.len(),
            cols: q.len(),
            masses,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.masses[x * self.cols + z]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.masses[x * self.cols..(x + 1) * self.cols]
    }

    pub fn marginal_x(&self) -> FiniteDist {
        FiniteDist {
            masses: (0..self.rows).map(|x| self.row(x).iter().sum()).collect(),
        }
    }

    pub fn marginal_z(&self) -> FiniteDist {
        let mut m = vec![0.0; self.cols];
        for x in 0..self.rows {
            for (acc, v) in m.iter_mut().zip(self.row(x)) {
                *acc += v;
            }
        }
        FiniteDist { masses: m }
    }

    /// `P_{Z|X=x}`, or `None` when `P_X(x) = 0`.
    pub fn conditional_row(&self, x: usize) -> Option<FiniteDist> {
        let r = self.row(x);
        let s: f64 = r.iter().sum();
        (s > 0.0).then(|| FiniteDist {
            masses: r.iter().map(|v| v / s).collect(),
        })
    }
}

impl Masses for JointDist {
    fn flat(&self) -> &[f64] {
        &self.masses
    }
}

/// A row-stochastic transition matrix `W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DiscreteChannel {
    rows: Vec<FiniteDist>,
}

impl TryFrom<Vec<Vec<f64>>> for DiscreteChannel {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        DiscreteChannel::new(v)
    }
}

impl From<DiscreteChannel> for Vec<Vec<f64>> {
    fn from(c: DiscreteChannel) -> Self {
        c.rows.into_iter().map(Vec::from).collect()
    }
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Shape("channel has no input rows".into()))?;
        let mut out = Vec::with_capacity(rows.len());
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != width {
                return Err(Error::Shape(format!(
                    "row {i} has {} outputs, expected {width}",
                    r.len()
                )));
            }
            check_masses(i, &r)?;
            out.push(FiniteDist { masses: r });
        }
        Ok(DiscreteChannel { rows: out })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("crossover {p} outside [0,1]")));
        }
        DiscreteChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn identity(m: usize) -> Self {
        DiscreteChannel {
            rows: (0..m).map(|i| FiniteDist::point(m, i)).collect(),
        }
    }

    /// Channel whose output does not depend on the input.
    pub fn constant(inputs: usize, out: &FiniteDist) -> Self {
        DiscreteChannel {
            rows: vec![out.clone(); inputs],
        }
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[FiniteDist] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &FiniteDist {
        &self.rows[x]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Output distribution `Σ_x P(x) W(·|x)`.
    pub fn output(&self, p: &FiniteDist) -> Result<FiniteDist> {
        Ok(JointDist::from_input_channel(p, self)?.marginal_z())
    }

    pub fn joint(&self, p: &FiniteDist) -> Result<JointDist> {
        JointDist::from_input_channel(p, self)
    }

    /// `self` followed by `next`.
    pub fn compose(&self, next: &DiscreteChannel) -> Result<Self> {
        if self.output_size() != next.input_size() {
            return Err(Error::Shape(format!(
                "cannot feed {} outputs into a channel with {} inputs",
                self.output_size(),
                next.input_size()
            )));
        }
        Ok(DiscreteChannel {
            rows: self
                .rows
                .iter()
                .map(|r| next.output(r).expect("shapes checked"))
                .collect(),
        })
    }

    /// For a channel whose rows are point masses, the map `x ↦ y`.
    pub fn deterministic_map(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| r.masses().iter().position(|&m| m == 1.0))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Metrics

fn same_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "alphabet sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Total variation distance `½ Σ |P − Q|`.
pub fn total_variation<D: Masses + ?Sized>(p: &D, q: &D) -> Result<f64> {
    let (p, q) = (p.flat(), q.flat());
    same_len(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `E_γ(P, Q) = Σ (P − γQ)⁺`, i.e. `P[dP/dQ > γ] − γ Q[dP/dQ > γ]`.
///
/// Atoms with `Q = 0 < P` have likelihood ratio `+∞` and always count.
pub fn e_gamma<D: Masses + ?Sized>(p: &D, q: &D, gamma: f64) -> Result<f64> {
    let (p, q) = (p.flat(), q.flat());
    same_len(p, q)?;
    if !(gamma > 0.0) {
        return Err(domain(format!("E_gamma needs gamma > 0, got {gamma}")));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - gamma * b).max(0.0)).sum())
}

/// An atom of a pair of measures stored as natural logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAtom {
    pub log_p: f64,
    pub log_q: f64,
}

impl LogAtom {
    pub fn log_ratio(&self) -> f64 {
        if self.log_p == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if self.log_q == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            self.log_p - self.log_q
        }
    }
}

/// `E_γ` over log-domain atoms with `γ` given as `ln γ`.
pub fn e_gamma_log(atoms: &[LogAtom], log_gamma: f64) -> f64 {
    atoms
        .iter()
        .filter(|a| a.log_ratio() > log_gamma)
        .map(|a| (a.log_p + ln_1m_exp(log_gamma + a.log_q - a.log_p)).exp())
        .sum()
}

/// The optimal Neyman–Pearson test at level `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaResult {
    /// Minimal `Q`-mass of a test with `P`-mass `α`.
    pub beta: f64,
    /// Log likelihood ratio of the boundary atom group.
    pub log_threshold: f64,
    /// Probability with which the boundary group is accepted.
    pub randomization: f64,
}

/// [`BetaResult`] for log-domain atoms; `β` is reported as `ln β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogBetaResult {
    pub log_beta: f64,
    pub log_threshold: f64,
    pub randomization: f64,
}

/// Relative tolerance under which two log likelihood ratios are a tie.
const TIE_TOL: f64 = 1e-12;

fn is_tie(a: f64, b: f64) -> bool {
    a == b
        || (a.is_finite()
            && b.is_finite()
            && (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0))
}

/// Groups atoms into likelihood-ratio classes sorted by decreasing ratio.
/// Returns `(log ratio, member indices)`.
fn ratio_groups(atoms: &[LogAtom]) -> Vec<(f64, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..atoms.len())
        .filter(|&i| atoms[i].log_p > f64::NEG_INFINITY)
        .collect();
    idx.sort_by(|&a, &b| atoms[b].log_ratio().total_cmp(&atoms[a].log_ratio()));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in idx {
        let r = atoms[i].log_ratio();
        match groups.last_mut() {
            Some((gr, members)) if is_tie(*gr, r) => members.push(i),
            _ => groups.push((r, vec![i])),
        }
    }
    groups
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("beta needs alpha in (0,1], got {alpha}")));
    }
    Ok(())
}

/// `β_α(P, Q)`: the smallest `Q`-probability of a (randomized) test that
/// accepts `P` with probability `α`.
pub fn np_beta<D: Masses + ?Sized>(alpha: f64, p: &D, q: &D) -> Result<BetaResult> {
    let (p, q) = (p.flat(), q.flat());
    same_len(p, q)?;
    check_alpha(alpha)?;
    let atoms: Vec<LogAtom> = p
        .iter()
        .zip(q)
        .map(|(a, b)| LogAtom {
            log_p: a.ln(),
            log_q: b.ln(),
        })
        .collect();
    let mut p_acc = 0.0;
    let mut q_acc = 0.0;
    let groups = ratio_groups(&atoms);
    for (k, (r, members)) in groups.iter().enumerate() {
        let gp: f64 = members.iter().map(|&i| p[i]).sum();
        let gq: f64 = members.iter().map(|&i| q[i]).sum();
        if p_acc + gp >= alpha || k + 1 == groups.len() {
            let frac = ((alpha - p_acc) / gp).clamp(0.0, 1.0);
            return Ok(BetaResult {
                beta: (q_acc + frac * gq).min(1.0),
                log_threshold: *r,
                randomization: frac,
            });
        }
        p_acc += gp;
        q_acc += gq;
    }
    Err(domain("P has no mass"))
}

/// `ln β_α` for measures given as log atoms. `P` must be a probability
/// measure; `Q` may be any finite measure.
pub fn np_beta_log(alpha: f64, atoms: &[LogAtom]) -> Result<LogBetaResult> {
    check_alpha(alpha)?;
    let groups = ratio_groups(atoms);
    let mut p_acc = 0.0;
    let mut log_q_acc = f64::NEG_INFINITY;
    for (k, (r, members)) in groups.iter().enumerate() {
        let gp: f64 = members.iter().map(|&i| atoms[i].log_p.exp()).sum();
        let lq: Vec<f64> = members.iter().map(|&i| atoms[i].log_q).collect();
        let log_gq = crate::numerics::logsumexp_unchecked(&lq);
        if p_acc + gp >= alpha || k + 1 == groups.len() {
            let frac = ((alpha - p_acc) / gp).clamp(0.0, 1.0);
            let log_beta = crate::numerics::log_add_exp(log_q_acc, frac.ln() + log_gq);
            return Ok(LogBetaResult {
                log_beta,
                log_threshold: *r,
                randomization: frac,
            });
        }
        p_acc += gp;
        log_q_acc = crate::numerics::log_add_exp(log_q_acc, log_gq);
    }
    Err(domain("P has no mass"))
}

// ---------------------------------------------------------------------------
// Information densities

/// Which information density [`info_density_table`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    /// `ı(x;z) = ln [P(x) W(z|x)] − ln [Q(z)/|X|]`.
    PrivacyAmplification,
    /// `i(x;y) = ln W(y|x) − ln Q(y)`.
    Channel,
}

/// Table of information densities. `None` marks entries where numerator
/// and denominator both vanish; a vanishing numerator alone gives `−∞`.
pub fn info_density_table(
    p_in: &FiniteDist,
    ch: &DiscreteChannel,
    q_out: &FiniteDist,
    mode: DensityMode,
) -> Result<Vec<Vec<Option<f64>>>> {
    if p_in.len() != ch.input_size() || q_out.len() != ch.output_size() {
        return Err(Error::Shape(format!(
            "input {} / output {} do not fit a {}x{} channel",
            p_in.len(),
            q_out.len(),
            ch.input_size(),
            ch.output_size()
        )));
    }
    let nx = p_in.len() as f64;
    Ok((0..ch.input_size())
        .map(|x| {
            (0..ch.output_size())
                .map(|z| {
                    let (num, den) = match mode {
                        DensityMode::PrivacyAmplification => {
                            (p_in[x] * ch.prob(x, z), q_out[z] / nx)
                        }
                        DensityMode::Channel => (ch.prob(x, z), q_out[z]),
                    };
                    if num == 0.0 && den == 0.0 {
                        None
                    } else {
                        Some(num.ln() - den.ln())
                    }
                })
                .collect()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Secrecy metrics

/// Secrecy of a message `W` observed through `P_{Z|W}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyMetrics {
    /// `d(P_WZ, Q^unif_W P_Z)` for uniform `W`.
    pub s_avg: f64,
    /// `max_m d(P_{Z|W=m}, P_Z)`.
    pub s_max: f64,
    /// `max_{m, m'} d(P_{Z|W=m}, P_{Z|W=m'})`.
    pub ds: f64,
    /// Only one message: `DS` is zero by convention.
    pub single_message: bool,
}

pub fn secrecy_metrics(p_z_given_w: &DiscreteChannel) -> Result<SecrecyMetrics> {
    let m = p_z_given_w.input_size();
    let p_z = p_z_given_w.output(&FiniteDist::uniform(m))?;
    let dists: Vec<f64> = p_z_given_w
        .rows()
        .iter()
        .map(|r| total_variation(r, &p_z))
        .collect::<Result<_>>()?;
    let s_avg = dists.iter().sum::<f64>() / m as f64;
    let s_max = dists.iter().copied().fold(0.0, f64::max);
    let mut ds: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            ds = ds.max(total_variation(p_z_given_w.row(a), p_z_given_w.row(b))?);
        }
    }
    Ok(SecrecyMetrics {
        s_avg,
        s_max,
        ds,
        single_message: m < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> FiniteDist {
        FiniteDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation_reports_row_and_defect() {
        let err = DiscreteChannel::new(vec![vec![0.5, 0.5], vec![0.5, 0.48]]).unwrap_err();
        match err {
            Error::InvalidDistribution { row, defect } => {
                assert_eq!(row, 1);
                assert!(defect.contains("0.98"), "{defect}");
            }
            e => panic!("{e:?}"),
        }
        assert!(FiniteDist::new(vec![1.5, -0.5]).is_err());
        let ch: DiscreteChannel = serde_json::from_str("[[0.9,0.1],[0.1,0.9]]").unwrap();
        assert_eq!(ch, DiscreteChannel::bsc(0.1).unwrap());
        assert!(serde_json::from_str::<DiscreteChannel>("[[0.9,0.2]]").is_err());
    }

    #[test]
    fn tv_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        let a = FiniteDist::point(2, 0);
        let b = FiniteDist::point(2, 1);
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        assert!(total_variation(&a, &FiniteDist::uniform(3)).is_err());
    }

    #[test]
    fn e_gamma_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        let q = d(&[0.5, 0.25, 0.25]);
        for g in [1.0, 1.5, 7.0] {
            assert_eq!(e_gamma(&p, &p, g).unwrap(), 0.0);
        }
        assert!((e_gamma(&p, &q, 1.0).unwrap() - total_variation(&p, &q).unwrap()).abs() < 1e-15);
        // Q-null atom counts at every γ.
        let q0 = d(&[0.5, 0.5, 0.0]);
        assert!((e_gamma(&p, &q0, 1e9).unwrap() - 0.5).abs() < 1e-15);
        assert!(e_gamma(&p, &q, 0.0).is_err());
    }

    #[test]
    fn e_gamma_log_matches_linear() {
        let p = [0.2, 0.3, 0.5, 0.0];
        let q = [0.5, 0.25, 0.0, 0.25];
        let atoms: Vec<LogAtom> = p
            .iter()
            .zip(&q)
            .map(|(a, b): (&f64, &f64)| LogAtom {
                log_p: a.ln(),
                log_q: b.ln(),
            })
            .collect();
        for g in [0.3, 1.0, 1.2, 4.0] {
            let lin = e_gamma(&p[..], &q[..], g).unwrap();
            assert!((e_gamma_log(&atoms, f64::ln(g)) - lin).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        for a in [0.1, 0.5, 0.9] {
            assert!((np_beta(a, &p, &p).unwrap().beta - a).abs() < 1e-12);
        }
        let p = d(&[0.5, 0.5, 0.0]);
        let q = d(&[0.1, 0.3, 0.6]);
        let r = np_beta(1.0, &p, &q).unwrap();
        assert!((r.beta - 0.4).abs() < 1e-15);
        // Highest ratio first: atom 0 (ratio 5), then atom 1 (ratio 5/3).
        let r = np_beta(0.75, &p, &q).unwrap();
        assert!((r.beta - (0.1 + 0.5 * 0.3)).abs() < 1e-15);
        assert!((r.randomization - 0.5).abs() < 1e-15);
        assert!((r.log_threshold - (5.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!(np_beta(0.0, &p, &q).is_err());
    }

    #[test]
    fn beta_ties_are_order_independent() {
        let p1 = [0.25, 0.25, 0.5];
        let q1 = [0.125, 0.125, 0.75];
        let p2 = [0.5, 0.25, 0.25];
        let q2 = [0.75, 0.125, 0.125];
        for a in [0.1, 0.3, 0.5, 0.77] {
            let b1 = np_beta(a, &p1[..], &q1[..]).unwrap();
            let b2 = np_beta(a, &p2[..], &q2[..]).unwrap();
            assert!((b1.beta - b2.beta).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_log_matches_linear() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.4, 0.3, 0.2, 0.1];
        let atoms: Vec<LogAtom> = p
            .iter()
            .zip(&q)
            .map(|(a, b): (&f64, &f64)| LogAtom {
                log_p: a.ln(),
                log_q: b.ln(),
            })
            .collect();
        for a in [0.05, 0.4, 0.7, 1.0] {
            let lin = np_beta(a, &p[..], &q[..]).unwrap();
            let lg = np_beta_log(a, &atoms).unwrap();
            assert!((lg.log_beta.exp() - lin.beta).abs() < 1e-15);
        }
    }

    #[test]
    fn density_table_examples() {
        let u = FiniteDist::uniform(4);
        let t = info_density_table(
            &u,
            &DiscreteChannel::identity(4),
            &u,
            DensityMode::PrivacyAmplification,
        )
        .unwrap();
        for (x, row) in t.iter().enumerate() {
            for (z, v) in row.iter().enumerate() {
                if x == z {
                    assert!((v.unwrap() - 4f64.ln()).abs() < 1e-15);
                } else {
                    assert_eq!(*v, Some(f64::NEG_INFINITY));
                }
            }
        }
        let p = 0.11;
        let t = info_density_table(
            &FiniteDist::uniform(2),
            &DiscreteChannel::bsc(p).unwrap(),
            &FiniteDist::uniform(2),
            DensityMode::Channel,
        )
        .unwrap();
        assert!((t[0][0].unwrap() - (2.0 * (1.0 - p)).ln()).abs() < 1e-15);
        assert!((t[0][1].unwrap() - (2.0 * p).ln()).abs() < 1e-15);
    }

    #[test]
    fn secrecy_metric_examples() {
        let same = DiscreteChannel::new(vec![vec![0.3, 0.7]; 3]).unwrap();
        let s = secrecy_metrics(&same).unwrap();
        assert_eq!((s.s_avg, s.s_max, s.ds), (0.0, 0.0, 0.0));
        let disjoint = DiscreteChannel::identity(2);
        let s = secrecy_metrics(&disjoint).unwrap();
        assert_eq!((s.s_avg, s.s_max, s.ds), (0.5, 0.5, 1.0));
        let single = DiscreteChannel::new(vec![vec![0.3, 0.7]]).unwrap();
        let s = secrecy_metrics(&single).unwrap();
        assert!(s.single_message);
        assert_eq!(s.ds, 0.0);
    }

    #[test]
    fn compose_and_marginals() {
        let a = DiscreteChannel::bsc(0.1).unwrap();
        let b = DiscreteChannel::bsc(0.2).unwrap();
        let c = a.compose(&b).unwrap();
        assert!((c.prob(0, 1) - (0.1 * 0.8 + 0.9 * 0.2)).abs() < 1e-15);
        let j = a.joint(&d(&[0.25, 0.75])).unwrap();
        assert!((j.marginal_x()[1] - 0.75).abs() < 1e-15);
        assert!((j.marginal_z()[0] - (0.25 * 0.9 + 0.75 * 0.1)).abs() < 1e-15);
        assert_eq!(
            DiscreteChannel::identity(3).deterministic_map(),
            Some(vec![0, 1, 2])
        );
        assert_eq!(a.deterministic_map(), None);
    }
}
