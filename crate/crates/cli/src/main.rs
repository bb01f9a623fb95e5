use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gspsim_cli::bench::{cmd_bench, GridSpec};
use gspsim_cli::commands::{cmd_generate, cmd_solve, cmd_verify, Algorithm, SolveOptions};
use gspsim_cli::{HarnessError, ValueList, EXIT_USAGE};
use gspsim_core::instance::ProblemParams;

#[derive(Parser)]
#[command(
    name = "gspsim",
    version,
    about = "Generate, solve, verify, and benchmark distributed hidden-subgroup instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file with a planted hidden subgroup.
    Generate {
        /// Total input bits.
        #[arg(long)]
        n: u32,
        /// Node-index bits (the network has 2^t nodes).
        #[arg(long)]
        t: u32,
        /// Output bits.
        #[arg(long)]
        m: u32,
        /// Planted subgroup rank.
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a solving pipeline against an instance file.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Measurement seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algorithm::Full)]
        algorithm: Algorithm,
        /// Write the trace/report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drop the last sampled measurement before the non-exact assembly,
        /// making its candidate subgroup strictly larger.
        #[arg(long)]
        perturb_sl: bool,
        /// Bad-probability tolerance for the exactness report.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Sweep a parameter grid with the exact pipeline and write CSV rows.
    Bench {
        /// Input sizes: "6", "4,6,8", or "3..8".
        #[arg(long, value_parser = ValueList::parse)]
        n: ValueList,
        /// Node-index bits, same forms as --n.
        #[arg(long, value_parser = ValueList::parse)]
        t: ValueList,
        /// Planted ranks; defaults to all feasible 0..=n.
        #[arg(long, value_parser = ValueList::parse)]
        k: Option<ValueList>,
        /// Fixed output width; defaults to max(n-k, 1) per combination.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        /// Master seed; per-row sub-seeds are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Check an instance file against the hidden-subgroup promise.
    Verify {
        #[arg(long)]
        instance: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate {
            n,
            t,
            m,
            k,
            seed,
            out,
        } => cmd_generate(ProblemParams { n, t, m, k, seed }, &out),
        Command::Solve {
            instance,
            seed,
            algorithm,
            out,
            perturb_sl,
            tolerance,
        } => cmd_solve(&SolveOptions {
            instance,
            seed,
            algorithm,
            out,
            perturb_sl,
            tolerance,
        }),
        Command::Bench {
            n,
            t,
            k,
            m,
            trials,
            seed,
            out,
            tolerance,
        } => {
            let spec = GridSpec {
                ns: n.0,
                ts: t.0,
                ks: k.map(|list| list.0),
                m_override: m,
                trials,
                master_seed: seed,
                tolerance,
            };
            cmd_bench(&spec, &out)
        }
        Command::Verify { instance } => cmd_verify(&instance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
