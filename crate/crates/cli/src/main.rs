use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onebit_core::{
    run_diag, run_experiment, summarize, write_csv, Error, Estimator, Experiment, ExperimentOutput,
    ModelKind, RunConfig,
};
use serde::Deserialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "onebit",
    version,
    about = "Spectral recovery experiments for one-bit single-index models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Top two eigenvalues of M/4 across noise levels.
    Eigs(RunArgs),
    /// Dense power-method error against sqrt(p/n).
    Lowdim(RunArgs),
    /// Sparse pipeline error against sqrt(s log p / n).
    Sparse(RunArgs),
    /// Moments and contraction constants, no sampling.
    Diag(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON file with the same keys as the long flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print per-grid-point summaries to stderr.
    #[arg(long)]
    summary: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Overrides {
    /// Link family: flr, cs or pr.
    #[arg(long)]
    model: Option<String>,
    /// Flip probabilities (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pe: Option<Vec<f64>>,
    /// Noise standard deviations (comma-separated).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Thresholds (comma-separated).
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tmax")]
    #[serde(rename = "tmax")]
    t_max: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rho_const: Option<f64>,
    /// Fixed penalty, overriding rho-const.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "shat")]
    #[serde(rename = "shat")]
    s_hat: Option<usize>,
    #[arg(long)]
    admm_tol: Option<f64>,
    #[arg(long)]
    admm_max_iter: Option<usize>,
    #[arg(long)]
    admm_penalty: Option<f64>,
    /// auto, m or m-prime.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    quad_order: Option<usize>,
    /// Run trials on one thread.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    serial: Option<bool>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! prefer {
    ($hi:expr, $lo:expr; $($field:ident),+) => {
        Overrides { $($field: $hi.$field.or($lo.$field)),+ }
    };
}

impl Overrides {
    fn over(self, base: Overrides) -> Overrides {
        prefer!(self, base; model, pe, sigma, theta, zeta, n, p, s, trials, seed, t_max, tol, rho_const, rho,
            s_hat, admm_tol, admm_max_iter, admm_penalty, estimator, quad_order, serial, out)
    }

    fn build(self, experiment: Experiment) -> Result<(RunConfig, Option<PathBuf>), Error> {
        let model: ModelKind = self.model.as_deref().unwrap_or("flr").parse()?;
        let mut cfg = RunConfig::defaults(experiment, model);
        macro_rules! set {
            ($($field:ident),+) => { $(if let Some(v) = self.$field { cfg.$field = v; })+ };
        }
        set!(
            pe,
            sigma,
            theta,
            zeta,
            n,
            p,
            s,
            trials,
            seed,
            t_max,
            tol,
            rho_const,
            admm_tol,
            admm_max_iter,
            admm_penalty,
            quad_order,
            serial
        );
        if self.rho.is_some() {
            cfg.rho = self.rho;
        }
        if self.s_hat.is_some() {
            cfg.s_hat = self.s_hat;
        }
        if let Some(e) = self.estimator {
            cfg.estimator = e.parse::<Estimator>()?;
        }
        cfg.validate()?;
        Ok((cfg, self.out))
    }
}

fn load_file(path: &PathBuf) -> Result<Overrides, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn open_output(out: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(experiment: Experiment, args: RunArgs) -> Result<(), Error> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => Overrides::default(),
    };
    let (cfg, out) = args.overrides.over(file).build(experiment)?;
    log::debug!("{cfg:?}");
    if experiment == Experiment::Diag {
        let reports = run_diag(&cfg)?;
        let mut w = open_output(out.as_ref())?;
        for (i, r) in reports.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            write!(w, "{r}")?;
        }
        w.flush()?;
        return Ok(());
    }
    let ExperimentOutput::Rows(rows) = run_experiment(&cfg)? else {
        unreachable!("sampling experiments return rows");
    };
    write_csv(&rows, open_output(out.as_ref())?)?;
    if args.summary {
        for group in summarize(&rows) {
            eprintln!("{group}");
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Eigs(a) => (Experiment::Eigs, a),
        Command::Lowdim(a) => (Experiment::Lowdim, a),
        Command::Sparse(a) => (Experiment::Sparse, a),
        Command::Diag(a) => (Experiment::Diag, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
