use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::execute;

/// Environment variable giving the default worker count.
pub const THREADS_ENV: &str = "MIXCOC_THREADS";

#[derive(Parser)]
#[command(name = "mixcoc", version, about = "Experiments on mixed random-quasiperiodic cocycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Top exponent or full spectrum of one model.
    Lyapunov(RunArgs),
    /// L₁ over an energy grid with a positivity verdict per energy.
    PositivityScan(RunArgs),
    /// L₁(ε) over a coupling grid containing 0.
    StabilityCurve(RunArgs),
    /// |ΔL₁| against the W₁ size of weight perturbations.
    HolderScan(RunArgs),
    /// Tail tables and fitted rates c(ε).
    LdtRate(RunArgs),
    /// Mixing Diophantine check and kernel decay rates.
    MixingCheck(RunArgs),
    /// Moments and KS distance of standardized Birkhoff sums.
    CltCheck(RunArgs),
    /// Ball-hitting probabilities over (r, ε) grids.
    H2Scan(RunArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Self::Lyapunov(a) => ("lyapunov", a),
            Self::PositivityScan(a) => ("positivity-scan", a),
            Self::StabilityCurve(a) => ("stability-curve", a),
            Self::HolderScan(a) => ("holder-scan", a),
            Self::LdtRate(a) => ("ldt-rate", a),
            Self::MixingCheck(a) => ("mixing-check", a),
            Self::CltCheck(a) => ("clt-check", a),
            Self::H2Scan(a) => ("h2-scan", a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 or unset uses $MIXCOC_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads_from_env() -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| format!("{THREADS_ENV}={s:?} is not a count")),
        Err(_) => Ok(0),
    }
}

/// Exit code 0 on success, 1 on a usage or config error, 2 on a runtime
/// error. Messages go to standard error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, args) = cli.command.parts();
    let mut cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mixcoc: {e}");
            return 1;
        }
    };
    if cfg.experiment.name() != name {
        eprintln!(
            "mixcoc: config {} describes a {} experiment, not {name}",
            args.config.display(),
            cfg.experiment.name()
        );
        return 1;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    let threads = match args.threads.map_or_else(threads_from_env, Ok) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("mixcoc: {e}");
            return 1;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("mixcoc: cannot start worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cfg)) {
        Ok((_, files)) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("mixcoc: {name} failed: {e}");
            2
        }
    }
}
