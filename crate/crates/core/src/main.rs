use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quasifree::app::{self, Options, Outcome, EXIT_INPUT};
use quasifree::model::AlgebraTag;

#[derive(Parser)]
#[command(
    name = "quasifree",
    version,
    about = "Charge data and Fock-space checks for quasi-free endomorphisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Absolute tolerance for membership checks.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for sampled gauge elements (overrides the model file).
    #[arg(long)]
    seed: Option<u64>,
    /// Upper bound on worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Overrides the algebra tag of the model file.
    #[arg(long, value_enum)]
    algebra: Option<AlgebraTag>,
    #[command(flatten)]
    common: Common,
    /// Largest Fock-space dimension the oracle may build.
    #[arg(long, default_value_t = 4096)]
    fock_cap: usize,
    /// Per-mode occupation cutoff of the bosonic oracle.
    #[arg(long, default_value_t = 8)]
    bose_cutoff: usize,
    /// Number of species for the assembled circle operator.
    #[arg(long, default_value_t = 1)]
    gauge_n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Membership, charge data and sector table.
    Analyze(ModelArgs),
    /// Analysis plus the brute-force Fock-space verification.
    Oracle(ModelArgs),
    /// Convergence study of the localized isometry on the circle.
    Dirac {
        /// Ascending Fourier cutoffs.
        #[arg(long, value_delimiter = ',', default_values_t = app::DEFAULT_CUTOFFS.to_vec())]
        cutoffs: Vec<usize>,
        /// Number of species.
        #[arg(long, default_value_t = 1)]
        gauge_n: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn options(common: &Common) -> Options {
    Options {
        tol: common.tol,
        seed: common.seed,
        ..Options::default()
    }
}

fn with_pool(threads: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Result<Outcome, String> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| e.to_string()),
    }
}

fn emit(outcome: &Outcome, report: Option<&PathBuf>) -> Result<(), String> {
    let text = outcome.render();
    match report {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            for line in &outcome.summary {
                println!("{line}");
            }
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| e.to_string())?;
            for line in &outcome.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn run_model(args: &ModelArgs, oracle: bool) -> Result<Outcome, String> {
    let input = std::fs::read(&args.input).map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let opts = Options {
        algebra: args.algebra,
        fock_cap: args.fock_cap,
        bose_cutoff: args.bose_cutoff,
        gauge_n: args.gauge_n,
        ..options(&args.common)
    };
    with_pool(args.common.threads, || {
        if oracle {
            app::oracle_cmd(&input, &opts)
        } else {
            app::analyze(&input, &opts)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, report) = match &cli.command {
        Command::Analyze(a) => (run_model(a, false), a.common.report.clone()),
        Command::Oracle(a) => (run_model(a, true), a.common.report.clone()),
        Command::Dirac {
            cutoffs,
            gauge_n,
            common,
        } => {
            let opts = Options {
                cutoffs: cutoffs.clone(),
                gauge_n: *gauge_n,
                ..options(common)
            };
            (
                with_pool(common.threads, || app::dirac_cmd(&opts)),
                common.report.clone(),
            )
        }
    };
    let outcome = match result {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    if let Err(msg) = emit(&outcome, report.as_ref()) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
