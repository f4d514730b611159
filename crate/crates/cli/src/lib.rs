//! Blocklength sweeps, spec validation and report writing behind the
//! `wiretap` binary.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use wiretap_bounds::bsc::{
    bsc_ach, bsc_approx, bsc_converse, bsc_general_converse, BscAchForm, BscWtc,
};
use wiretap_bounds::dmc::{
    expansion_from_report, optimize_secrecy_capacity, semidet_expansion_from_report,
    DispersionReport, WiretapSpec,
};
use wiretap_bounds::gaussian::{
    achievability_from_ingredients, converse_from_samples, gaussian_approx,
    sample_converse_density, EmpiricalBeta, GaussianIngredients, GaussianWiretapParams, McConfig,
};
use wiretap_bounds::pa::{
    exhaustive_hash_oracle, log_gamma_grid, minimize_over_gamma, pa_avg_bound, pa_converse,
    pa_max_bound, PABoundInputs, PABoundValue,
};
use wiretap_bounds::probmodel::{FiniteDist, JointDist, MASS_TOL};
use wiretap_bounds::wiretap::{semidet_converse, AchTheorem, Metric};

const LN_2: f64 = std::f64::consts::LN_2;

/// Everything that can stop the CLI, each with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid request: {0}")]
    Validation(String),
    #[error(transparent)]
    Bound(#[from] wiretap_bounds::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("achievability {ach} exceeds converse {conv} at n = {n}; this is a solver bug")]
    Sandwich { n: u64, ach: f64, conv: f64 },
    #[error("no bound is feasible at any blocklength")]
    InfeasibleEverywhere,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wiretap_bounds::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Bound(E::Domain(_) | E::Shape(_) | E::InvalidDistribution { .. }) => 2,
            CliError::InfeasibleEverywhere => 3,
            CliError::Io { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Channel under study.
#[derive(Debug, Clone)]
pub enum Channel {
    /// Noiseless legitimate link, BSC(p) eavesdropper.
    Bsc {
        p: f64,
    },
    Gaussian(GaussianWiretapParams),
    Dmc(WiretapSpec),
}

/// Requested bound families.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Ach,
    Conv,
    Approx,
    /// The `1/(τ²β)` comparison converse.
    Hayashi,
    /// The general hypothesis-testing converse (BSC only).
    Bht,
}

/// Kind column of an output row. Ordered alphabetically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Ach,
    Approx,
    ApproxAch,
    ApproxConv,
    Bht,
    Conv,
    Hayashi,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("plain enum");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub channel: Channel,
    pub n_min: u64,
    pub n_max: u64,
    pub n_step: u64,
    pub eps: f64,
    pub delta: f64,
    pub metric: Metric,
    pub bounds: BTreeSet<BoundKind>,
    /// Required for Gaussian achievability and converses.
    pub mc: Option<McConfig>,
    pub bsc_form: BscAchForm,
}

impl SweepRequest {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.bounds.is_empty() {
            return bad("no bounds requested".into());
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            ));
        }
        if self.n_step == 0 {
            return bad("n_step must be at least 1".into());
        }
        if !(self.eps >= 0.0 && self.eps < 1.0 && self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!(
                "need eps in [0,1) and delta in (0,1), got {}, {}",
                self.eps, self.delta
            ));
        }
        match &self.channel {
            Channel::Bsc { p } => {
                if !(*p > 0.0 && *p < 0.5) {
                    return bad(format!(
                        "crossover probability must lie in (0, 1/2), got {p}"
                    ));
                }
            }
            Channel::Gaussian(_) => {
                let mc_needed = self
                    .bounds
                    .iter()
                    .any(|b| matches!(b, BoundKind::Ach | BoundKind::Conv | BoundKind::Hayashi));
                if mc_needed && self.mc.is_none() {
                    return bad("Gaussian Monte Carlo bounds need an explicit seed".into());
                }
                if self.bounds.contains(&BoundKind::Bht) {
                    return bad("bht is only available for the BSC; use conv".into());
                }
                if let Some(mc) = &self.mc {
                    if mc.samples < 2 {
                        return bad("need at least 2 Monte Carlo samples".into());
                    }
                }
            }
            Channel::Dmc(_) => {
                if self.bounds.contains(&BoundKind::Bht)
                    || self.bounds.contains(&BoundKind::Hayashi)
                {
                    return bad(
                        "bht and hayashi are only available for BSC and Gaussian channels".into(),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn blocklengths(&self) -> Vec<u64> {
        (self.n_min..=self.n_max)
            .step_by(self.n_step as usize)
            .collect()
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPoint {
    pub n: u64,
    pub kind: RowKind,
    /// Bits per channel use; `None` when the bound does not apply.
    pub rate_bits: Option<f64>,
    /// `log₂ γ*`.
    pub gamma_star: Option<f64>,
    pub tau_star: Option<f64>,
    pub k_star: Option<u64>,
    pub mc_halfwidth: Option<f64>,
    pub flags: Vec<&'static str>,
}

impl BoundPoint {
    fn new(n: u64, kind: RowKind, rate_bits: Option<f64>) -> Self {
        BoundPoint {
            n,
            kind,
            rate_bits,
            gamma_star: None,
            tau_star: None,
            k_star: None,
            mc_halfwidth: None,
            flags: vec![],
        }
    }

    fn flag(mut self, on: bool, name: &'static str) -> Self {
        if on {
            self.flags.push(name);
        }
        self
    }

    /// The row carries a usable rate.
    pub fn is_feasible(&self) -> bool {
        self.rate_bits.is_some() && !self.flags.contains(&"infeasible")
    }
}

pub const STRONG_CONVERSE_FAILS: &str = "strong_converse_fails";

/// Runs the sweep, sorted by `(n, kind)`, after checking that no
/// achievability row exceeds the converse at the same `n`.
pub fn run_sweep(req: &SweepRequest) -> Result<Vec<BoundPoint>> {
    req.validate()?;
    let ns = req.blocklengths();
    let dmc_report = match &req.channel {
        Channel::Dmc(w) => Some(optimize_secrecy_capacity(w)?),
        _ => None,
    };
    let rows: Vec<Vec<BoundPoint>> = ns
        .par_iter()
        .map(|&n| match &req.channel {
            Channel::Bsc { p } => bsc_rows(req, *p, n),
            Channel::Gaussian(gp) => gaussian_rows(req, gp, n),
            Channel::Dmc(w) => dmc_rows(req, w, dmc_report.as_ref().expect("computed"), n),
        })
        .collect::<Result<_>>()?;
    let mut points: Vec<BoundPoint> = rows.into_iter().flatten().collect();
    points.sort_by_key(|p| (p.n, p.kind));
    check_sandwich(&points)?;
    Ok(points)
}

/// Cross-row check: `ach ≤ conv` at every `n`, with a 3-sigma allowance
/// for Monte Carlo rows.
pub fn check_sandwich(points: &[BoundPoint]) -> Result<()> {
    for a in points
        .iter()
        .filter(|p| p.kind == RowKind::Ach && p.is_feasible())
    {
        for c in points
            .iter()
            .filter(|p| p.kind == RowKind::Conv && p.n == a.n && p.rate_bits.is_some())
        {
            let (ra, rc) = (a.rate_bits.unwrap(), c.rate_bits.unwrap());
            let se = |p: &BoundPoint| p.mc_halfwidth.unwrap_or(0.0) / 1.96;
            let slack = 3.0 * se(a).hypot(se(c)) + 1e-9;
            if ra > rc + slack {
                return Err(CliError::Sandwich {
                    n: a.n,
                    ach: ra,
                    conv: rc,
                });
            }
        }
    }
    Ok(())
}

fn theorem(metric: Metric) -> AchTheorem {
    match metric {
        Metric::Avg => AchTheorem::Avg,
        Metric::Max => AchTheorem::Max2,
    }
}

fn bsc_rows(req: &SweepRequest, p: f64, n: u64) -> Result<Vec<BoundPoint>> {
    let ch = BscWtc::new(p, n)?;
    let (eps, delta) = (req.eps, req.delta);
    let regime_ok = eps + delta < 1.0;
    let nl = n as f64 * LN_2;
    let mut out = vec![];
    for kind in &req.bounds {
        let row = if !regime_ok {
            let rk = match kind {
                BoundKind::Ach => RowKind::Ach,
                BoundKind::Conv => RowKind::Conv,
                BoundKind::Approx => RowKind::Approx,
                BoundKind::Hayashi => RowKind::Hayashi,
                BoundKind::Bht => RowKind::Bht,
            };
            BoundPoint::new(n, rk, None).flag(true, STRONG_CONVERSE_FAILS)
        } else {
            match kind {
                BoundKind::Ach => {
                    let a = bsc_ach(&ch, eps, delta, req.bsc_form, req.metric)?;
                    BoundPoint {
                        gamma_star: a.feasible.then_some(a.log_gamma / LN_2),
                        k_star: Some(a.k_star),
                        ..BoundPoint::new(n, RowKind::Ach, Some(a.rate_bits))
                    }
                    .flag(!a.feasible, "infeasible")
                    .flag(a.gamma_at_boundary, "gamma_at_boundary")
                }
                BoundKind::Conv => {
                    let c = bsc_converse(&ch, eps, delta)?;
                    BoundPoint {
                        gamma_star: Some(c.log_gamma / LN_2),
                        k_star: Some((c.log_m / LN_2 + 1e-9).floor() as u64),
                        ..BoundPoint::new(n, RowKind::Conv, Some(c.rate_bits))
                    }
                    .flag(c.infeasible, "infeasible")
                    .flag(c.vacuous, "vacuous")
                }
                BoundKind::Approx => {
                    BoundPoint::new(n, RowKind::Approx, Some(bsc_approx(p, n, eps, delta)?))
                }
                BoundKind::Hayashi | BoundKind::Bht => {
                    let g = bsc_general_converse(&ch, eps, delta)?;
                    let (rk, lm, tau) = if *kind == BoundKind::Bht {
                        (RowKind::Bht, g.log_m, g.tau_star)
                    } else {
                        (RowKind::Hayashi, g.hayashi_log_m, g.hayashi_tau)
                    };
                    BoundPoint {
                        tau_star: Some(tau),
                        ..BoundPoint::new(n, rk, Some((lm / nl).min(1.0)))
                    }
                    .flag(g.tau_at_boundary && rk == RowKind::Bht, "tau_at_boundary")
                }
            }
        };
        out.push(row);
    }
    Ok(out)
}

fn gaussian_rows(
    req: &SweepRequest,
    gp: &GaussianWiretapParams,
    n: u64,
) -> Result<Vec<BoundPoint>> {
    let (eps, delta) = (req.eps, req.delta);
    let regime_ok = eps + delta < 1.0;
    let mut out = vec![];
    if req.bounds.contains(&BoundKind::Approx) {
        let a = gaussian_approx(gp, n, eps, delta)?;
        out.push(
            BoundPoint::new(n, RowKind::ApproxAch, Some(a.ach))
                .flag(!a.regime_ok, "dispersion_regime"),
        );
        out.push(
            BoundPoint::new(n, RowKind::ApproxConv, a.conv)
                .flag(a.conv.is_none(), STRONG_CONVERSE_FAILS),
        );
    }
    if req.bounds.contains(&BoundKind::Ach) {
        let mc = req.mc.as_ref().expect("validated");
        let ing = GaussianIngredients::sample(gp, n, mc)?;
        let a = achievability_from_ingredients(&ing, gp, n, eps, delta, mc, theorem(req.metric))?;
        out.push(
            BoundPoint {
                gamma_star: a.feasible.then_some(a.log_gamma / LN_2),
                mc_halfwidth: Some(a.halfwidth_bits),
                ..BoundPoint::new(n, RowKind::Ach, Some(a.rate_bits))
            }
            .flag(!a.feasible, "infeasible")
            .flag(a.gamma_at_boundary, "gamma_at_boundary"),
        );
    }
    let want_conv = req.bounds.contains(&BoundKind::Conv);
    let want_hay = req.bounds.contains(&BoundKind::Hayashi);
    if want_conv || want_hay {
        if !regime_ok {
            for (on, rk) in [(want_conv, RowKind::Conv), (want_hay, RowKind::Hayashi)] {
                if on {
                    out.push(BoundPoint::new(n, rk, None).flag(true, STRONG_CONVERSE_FAILS));
                }
            }
        } else {
            let mc = req.mc.as_ref().expect("validated");
            let eb = EmpiricalBeta::new(sample_converse_density(gp, n, mc)?)?;
            let c = converse_from_samples(&eb, n, eps, delta, mc)?;
            if want_conv {
                out.push(BoundPoint {
                    tau_star: Some(c.tau_star),
                    mc_halfwidth: Some(c.halfwidth_bits),
                    ..BoundPoint::new(n, RowKind::Conv, Some(c.rate_bits))
                });
            }
            if want_hay {
                out.push(BoundPoint::new(
                    n,
                    RowKind::Hayashi,
                    Some(c.hayashi_rate_bits),
                ));
            }
        }
    }
    Ok(out)
}

fn dmc_rows(
    req: &SweepRequest,
    w: &WiretapSpec,
    report: &DispersionReport,
    n: u64,
) -> Result<Vec<BoundPoint>> {
    let (eps, delta) = (req.eps, req.delta);
    let semidet = w.tags.semi_deterministic;
    let mut out = vec![];
    let nu = report.non_unique_optimizer;
    for kind in &req.bounds {
        match kind {
            BoundKind::Approx if semidet => {
                let s =
                    semidet_expansion_from_report(report, w.legit.output_size(), n, eps, delta)?;
                out.push(
                    BoundPoint::new(n, RowKind::Approx, Some(s.rate))
                        .flag(s.vacuous, "vacuous")
                        .flag(s.clamped, "clamped")
                        .flag(nu, "non_unique_optimizer"),
                );
            }
            BoundKind::Approx => {
                let e = expansion_from_report(report, n, eps, delta)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                out.push(
                    BoundPoint::new(n, RowKind::ApproxAch, Some(e.ach))
                        .flag(e.clamped, "clamped")
                        .flag(nu, "non_unique_optimizer"),
                );
                out.push(
                    BoundPoint::new(n, RowKind::ApproxConv, e.conv)
                        .flag(e.strong_converse_fails, STRONG_CONVERSE_FAILS)
                        .flag(nu, "non_unique_optimizer"),
                );
            }
            BoundKind::Conv if semidet => {
                let row = match semidet_converse(w, n as usize, eps, delta) {
                    Ok(c) => {
                        let nl = n as f64 * LN_2;
                        BoundPoint::new(n, RowKind::Conv, Some(c.log_m.max(0.0) / nl))
                            .flag(c.infeasible, "infeasible")
                            .flag(c.vacuous, "vacuous")
                    }
                    Err(wiretap_bounds::Error::TooLarge(_)) => {
                        BoundPoint::new(n, RowKind::Conv, None).flag(true, "too_large")
                    }
                    Err(e) => return Err(e.into()),
                };
                out.push(row);
            }
            _ => out.push(
                BoundPoint::new(
                    n,
                    match kind {
                        BoundKind::Ach => RowKind::Ach,
                        _ => RowKind::Conv,
                    },
                    None,
                )
                .flag(true, "unsupported"),
            ),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Output

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "kind",
    "rate_bits",
    "gamma_star",
    "tau_star",
    "k_star",
    "mc_halfwidth",
    "flags",
];

#[derive(Serialize)]
struct CsvRow {
    n: u64,
    kind: String,
    rate_bits: Option<f64>,
    gamma_star: Option<f64>,
    tau_star: Option<f64>,
    k_star: Option<u64>,
    mc_halfwidth: Option<f64>,
    flags: String,
}

/// Writes the points as CSV or as a JSON array mirroring the CSV rows.
pub fn write_points(points: &[BoundPoint], format: Format, w: impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wr.write_record(CSV_HEADER)?;
            for p in points {
                wr.serialize(CsvRow {
                    n: p.n,
                    kind: p.kind.to_string(),
                    rate_bits: p.rate_bits,
                    gamma_star: p.gamma_star,
                    tau_star: p.tau_star,
                    k_star: p.k_star,
                    mc_halfwidth: p.mc_halfwidth,
                    flags: p.flags.join(";"),
                })?;
            }
            wr.flush()
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, points)?;
            writeln!(w)
        }
    }
}

/// Writes to `out`, or stdout when `None`.
pub fn emit(points: &[BoundPoint], format: Format, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(io_err(path))?;
            write_points(points, format, std::io::BufWriter::new(f)).map_err(io_err(path))
        }
        None => write_points(points, format, std::io::stdout().lock())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

/// Fails with [`CliError::InfeasibleEverywhere`] when no row has a usable
/// rate.
pub fn check_any_feasible(points: &[BoundPoint]) -> Result<()> {
    if points.iter().any(BoundPoint::is_feasible) {
        Ok(())
    } else {
        Err(CliError::InfeasibleEverywhere)
    }
}

// ---------------------------------------------------------------------------
// Spec validation

/// Problems found in a wiretap spec document.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Reads and checks a spec file. Malformed JSON is reported with its line
/// and column; I/O failures are errors.
pub fn validate_spec(path: &Path) -> Result<ValidationReport> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(validate_spec_str(&text))
}

pub fn validate_spec_str(text: &str) -> ValidationReport {
    let mut r = ValidationReport::default();
    let v: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            r.errors.push(format!(
                "malformed JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ));
            return r;
        }
    };
    let Some(obj) = v.as_object() else {
        r.errors
            .push("top level must be an object with `legit` and `eve`".into());
        return r;
    };
    let legit = check_matrix(obj.get("legit"), "legit", &mut r.errors);
    let eve = check_matrix(obj.get("eve"), "eve", &mut r.errors);
    if let (Some(a), Some(b)) = (&legit, &eve) {
        if a.len() != b.len() {
            r.errors.push(format!(
                "shape mismatch: legit has {} input rows, eve has {}",
                a.len(),
                b.len()
            ));
        }
    }
    for k in obj.keys() {
        if !["legit", "eve", "tags"].contains(&k.as_str()) {
            r.warnings.push(format!("unknown key `{k}` ignored"));
        }
    }
    let tags = obj.get("tags");
    let flag = |name: &str| tags.and_then(|t| t.get(name)).and_then(Value::as_bool);
    match tags {
        None => r
            .warnings
            .push("missing tags: assuming neither degraded nor semi_deterministic".into()),
        Some(t) if !t.is_object() => r.errors.push("`tags` must be an object".into()),
        Some(t) => {
            for name in ["degraded", "semi_deterministic"] {
                match t.get(name) {
                    None => r
                        .warnings
                        .push(format!("missing tag `{name}`: assuming false")),
                    Some(x) if !x.is_boolean() => {
                        r.errors.push(format!("tag `{name}` must be true or false"))
                    }
                    _ => {}
                }
            }
        }
    }
    if flag("degraded") == Some(true) {
        r.warnings
            .push("the degraded tag is informational and is not checked".into());
    }
    if flag("semi_deterministic") == Some(true) {
        if let Some(rows) = &legit {
            let width = rows.first().map_or(0, Vec::len);
            let mut hit = vec![false; width];
            for (i, row) in rows.iter().enumerate() {
                match row.iter().position(|&x| x == 1.0) {
                    Some(y) if row.iter().filter(|&&x| x != 0.0).count() == 1 => hit[y] = true,
                    _ => r.errors.push(format!(
                        "tag contradiction: semi_deterministic, but legit row {i} is not a point mass"
                    )),
                }
            }
            let all_point_masses = rows
                .iter()
                .all(|row| row.iter().filter(|&&x| x != 0.0).count() == 1);
            for (y, h) in hit.iter().enumerate() {
                if !h && all_point_masses {
                    r.errors.push(format!(
                        "tag contradiction: semi_deterministic, but legit output {y} is never produced"
                    ));
                }
            }
        }
    }
    if r.errors.is_empty() {
        if let Err(e) = WiretapSpec::from_json(text) {
            r.errors.push(e.to_string());
        }
    }
    r
}

fn check_matrix(v: Option<&Value>, name: &str, errors: &mut Vec<String>) -> Option<Vec<Vec<f64>>> {
    let Some(v) = v else {
        errors.push(format!("missing `{name}` channel matrix"));
        return None;
    };
    let Some(rows) = v.as_array() else {
        errors.push(format!("`{name}` must be an array of rows"));
        return None;
    };
    if rows.is_empty() {
        errors.push(format!("`{name}` has no rows"));
        return None;
    }
    let mut out = Vec::with_capacity(rows.len());
    let mut ok = true;
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let Some(cells) = row.as_array() else {
            errors.push(format!("{name} row {i} is not an array"));
            ok = false;
            continue;
        };
        let mut vals = Vec::with_capacity(cells.len());
        for (j, c) in cells.iter().enumerate() {
            match c.as_f64() {
                Some(x) if x.is_finite() => {
                    if x < 0.0 {
                        errors.push(format!("{name} row {i}, column {j}: negative entry {x}"));
                    }
                    vals.push(x);
                }
                _ => {
                    errors.push(format!("{name} row {i}, column {j}: not a finite number"));
                    ok = false;
                }
            }
        }
        match width {
            None => width = Some(vals.len()),
            Some(w) if w != vals.len() => {
                errors.push(format!(
                    "shape mismatch: {name} row {i} has {} entries, row 0 has {w}",
                    vals.len()
                ));
                ok = false;
            }
            _ => {}
        }
        let s: f64 = vals.iter().sum();
        if (s - 1.0).abs() > MASS_TOL && !vals.is_empty() {
            errors.push(format!(
                "mass defect: {name} row {i} sums to {s} (defect {:+e})",
                s - 1.0
            ));
        }
        out.push(vals);
    }
    ok.then_some(out)
}

// ---------------------------------------------------------------------------
// Privacy amplification report

/// Input document of the `pa` subcommand.
#[derive(Debug, Clone, Deserialize)]
pub struct PaSpec {
    /// `P_XZ` as a row-per-`x` matrix.
    pub joint: Vec<Vec<f64>>,
    pub key_size: usize,
    /// Reference output measure; defaults to the marginal `P_Z`.
    #[serde(default)]
    pub q_z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaReport {
    pub l: f64,
    pub avg_bound: PABoundValue,
    /// Requires uniform `P_X` and `|K|` dividing `|X|`.
    pub max_bound: Option<PABoundValue>,
    pub converse: f64,
    /// Best balanced hash found by exhaustive search, when small enough.
    pub oracle_s_avg: Option<f64>,
    pub oracle_s_max: Option<f64>,
}

pub fn pa_report(spec: &PaSpec) -> Result<PaReport> {
    let joint = JointDist::new(spec.joint.clone())?;
    let q_z = match &spec.q_z {
        Some(q) => FiniteDist::new(q.clone())?,
        None => joint.marginal_z(),
    };
    let inp = PABoundInputs::new(joint.clone(), spec.key_size, q_z.clone())?;
    let grid = log_gamma_grid(&joint, &q_z);
    let avg = minimize_over_gamma(|g| pa_avg_bound(&inp, g), &grid)?;
    let max = minimize_over_gamma(|g| pa_max_bound(&inp, g), &grid).ok();
    let l = inp.ratio_l();
    let converse = pa_converse(&joint, l)?;
    let oracle = exhaustive_hash_oracle(&joint, spec.key_size).ok();
    Ok(PaReport {
        l,
        avg_bound: avg,
        max_bound: max,
        converse,
        oracle_s_avg: oracle.as_ref().map(|o| o.best_s_avg),
        oracle_s_max: oracle.as_ref().map(|o| o.best_s_max),
    })
}

/// Writes the report as JSON, or as `quantity,value` CSV rows.
pub fn write_pa_report(r: &PaReport, format: Format, w: impl Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, r)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wr.write_record(["quantity", "value"])?;
            let mut rows = vec![
                ("l", Some(r.l)),
                ("avg_bound", Some(r.avg_bound.total)),
                ("avg_bound_log2_gamma", Some(r.avg_bound.gamma_used.log2())),
                ("max_bound", r.max_bound.map(|b| b.total)),
                ("converse", Some(r.converse)),
            ];
            rows.push(("oracle_s_avg", r.oracle_s_avg));
            rows.push(("oracle_s_max", r.oracle_s_max));
            for (k, v) in rows {
                wr.serialize((k, v))?;
            }
            wr.flush()
        }
    }
}

/// `(P, N1, N2)` from SNRs in dB with `N1 = 1`.
pub fn gaussian_from_snr_db(snr_legit_db: f64, snr_eve_db: f64) -> Result<GaussianWiretapParams> {
    let p = 10f64.powf(snr_legit_db / 10.0);
    let n2 = p / 10f64.powf(snr_eve_db / 10.0);
    Ok(GaussianWiretapParams::new(p, 1.0, n2)?)
}
