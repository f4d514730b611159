use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wiretap_bounds::bsc::BscAchForm;
use wiretap_bounds::dmc::WiretapSpec;
use wiretap_bounds::gaussian::McConfig;
use wiretap_bounds::wiretap::Metric;
use wiretap_cli::{
    check_any_feasible, emit, gaussian_from_snr_db, pa_report, run_sweep, validate_spec,
    write_pa_report, BoundKind, Channel, CliError, Format, PaSpec, Result, SweepRequest,
};

/// Finite-blocklength secrecy rate bounds for wiretap channels.
///
/// Exit codes: 0 ok, 1 internal failure, 2 invalid input, 3 infeasible at
/// every blocklength, 4 I/O failure.
#[derive(Parser)]
#[command(name = "wiretap", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Noiseless legitimate link with a BSC(p) eavesdropper.
    Bsc {
        /// Eavesdropper crossover probability.
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = FormArg::Squared)]
        form: FormArg,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Gaussian wiretap channel with noise variance 1 at the legitimate receiver.
    Gaussian {
        /// Legitimate SNR in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr_legit_db: f64,
        /// Eavesdropper SNR in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr_eve_db: f64,
        /// Seed for the Monte Carlo bounds. There is no default.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Bootstrap resamples for the half-widths.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
        /// Worker threads; 0 uses all cores. Does not change the output.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Discrete memoryless wiretap channel read from a JSON spec.
    Dmc {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Privacy amplification bounds for a joint distribution read from JSON.
    Pa {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a wiretap channel spec and lists every problem found.
    Validate { spec: PathBuf },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n_min: u64,
    #[arg(long)]
    n_max: u64,
    #[arg(long, default_value_t = 1)]
    n_step: u64,
    /// Decoding error probability.
    #[arg(long)]
    eps: f64,
    /// Secrecy (total variation) level.
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Avg)]
    metric: MetricArg,
    /// Comma-separated list of bounds.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BoundKind::Ach, BoundKind::Conv])]
    bounds: Vec<BoundKind>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Avg,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Squared,
    Printed,
    Proof,
    Generic,
}

impl From<FormArg> for BscAchForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Squared => BscAchForm::Squared,
            FormArg::Printed => BscAchForm::Printed,
            FormArg::Proof => BscAchForm::Proof,
            FormArg::Generic => BscAchForm::Generic,
        }
    }
}

fn sweep(channel: Channel, a: SweepArgs, mc: Option<McConfig>, form: BscAchForm) -> Result<()> {
    let req = SweepRequest {
        channel,
        n_min: a.n_min,
        n_max: a.n_max,
        n_step: a.n_step,
        eps: a.eps,
        delta: a.delta,
        metric: match a.metric {
            MetricArg::Avg => Metric::Avg,
            MetricArg::Max => Metric::Max,
        },
        bounds: a.bounds.into_iter().collect::<BTreeSet<_>>(),
        mc,
        bsc_form: form,
    };
    let points = run_sweep(&req)?;
    emit(&points, a.format, a.out.as_deref())?;
    check_any_feasible(&points)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Bsc { p, form, sweep: a } => sweep(Channel::Bsc { p }, a, None, form.into()),
        Cmd::Gaussian {
            snr_legit_db,
            snr_eve_db,
            seed,
            samples,
            bootstrap,
            workers,
            sweep: a,
        } => {
            let gp = gaussian_from_snr_db(snr_legit_db, snr_eve_db)?;
            let mc = seed.map(|seed| McConfig {
                samples,
                seed,
                workers,
                bootstrap,
            });
            sweep(Channel::Gaussian(gp), a, mc, BscAchForm::default())
        }
        Cmd::Dmc { spec, sweep: a } => {
            let w = WiretapSpec::from_json(&read(&spec)?)?;
            sweep(Channel::Dmc(w), a, None, BscAchForm::default())
        }
        Cmd::Pa { spec, format, out } => {
            let s: PaSpec = serde_json::from_str(&read(&spec)?)
                .map_err(|e| CliError::Validation(format!("{}: {e}", spec.display())))?;
            let r = pa_report(&s)?;
            match out {
                Some(path) => {
                    let io = |source| CliError::Io {
                        path: path.clone(),
                        source,
                    };
                    let f = std::fs::File::create(&path).map_err(io)?;
                    write_pa_report(&r, format, f).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })
                }
                None => write_pa_report(&r, format, std::io::stdout().lock()).map_err(|source| {
                    CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    }
                }),
            }
        }
        Cmd::Validate { spec } => {
            let r = validate_spec(&spec)?;
            for w in &r.warnings {
                println!("warning: {w}");
            }
            for e in &r.errors {
                println!("error: {e}");
            }
            if r.is_valid() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "{} problem(s) in {}",
                    r.errors.len(),
                    spec.display()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
