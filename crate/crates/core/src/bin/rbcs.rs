use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use robust_bcs::cli::config::Config;
use robust_bcs::cli::surrogate::{run_surrogate_to, SurrogateRun};
use robust_bcs::cli::sweep::{run_sweep_to, SweepSpec};
use robust_bcs::cli::{io_err, matrix_io, report, CliError, CliResult};
use robust_bcs::signalgen::BasisKind;
use robust_bcs::solvers::{solve, SolverConfig, Variant};

#[derive(Parser)]
#[command(name = "rbcs", version, about = "Sparse Bayesian compressive-sensing experiments")]
struct Args {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded trial grid over K, noise level and algorithm.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock time per trial.
        #[arg(long)]
        timing: bool,
    },
    /// Run the two-case wavelet pipeline on the synthetic vibration record.
    Surrogate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timing: bool,
    },
    /// Summarize a trial CSV.
    Report { csv: PathBuf },
    /// Reconstruct one instance; writes `mean std` per sample.
    Reconstruct {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value = "identity")]
        basis: BasisKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(args: Args) -> CliResult<()> {
    match args.cmd {
        Command::Sweep { config, out, threads, seed, timing } => {
            let mut spec = SweepSpec::from_config(&Config::load(&config)?)?;
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            spec.timing |= timing;
            let rows = run_sweep_to(&spec, &out, threads)?;
            print!("{}", report::render_table(&rows, &spec.thresholds));
        }
        Command::Surrogate { config, out, threads, seed, timing } => {
            let mut run = SurrogateRun::from_config(&Config::load(&config)?)?;
            if let Some(s) = seed {
                run.signal.seed = s;
            }
            run.timing |= timing;
            let rows = run_surrogate_to(&run, &out, threads)?;
            print!("{}", report::render_table(&rows, &run.thresholds));
        }
        Command::Report { csv } => print!("{}", report::report(&csv)?),
        Command::Reconstruct { theta, y, variant, basis, seed, out } => {
            let theta = matrix_io::read_matrix(&theta)?;
            let y = matrix_io::read_vector(&y)?;
            if theta.nrows() != y.len() {
                return Err(CliError::Config(format!(
                    "theta has {} rows but y has {} entries",
                    theta.nrows(),
                    y.len()
                )));
            }
            let cfg = SolverConfig::new(variant).with_seed(seed).with_basis(basis);
            let r = solve(&theta, &y, &cfg)?;
            let mut text = String::new();
            for (m, s) in r.x_hat.as_slice().iter().zip(&r.error_bars) {
                text.push_str(&format!("{m:e} {s:e}\n"));
            }
            std::fs::write(&out, text).map_err(io_err(&out))?;
            eprintln!(
                "{}: {} active terms, log evidence {:.6}, converged {}",
                variant.label(),
                r.model_size(),
                r.final_log_evidence,
                r.converged
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rbcs: {e}");
            ExitCode::FAILURE
        }
    }
}
