use clap::{Parser, Subcommand};
use ratdegen::cli::{self, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Degeneration analysis for families of complex rational maps.
#[derive(Parser)]
#[command(name = "ratdegen", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Working precision in bits (overrides the spec file).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Seed for the Lyapunov sampler (overrides the spec file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest tracked period (overrides the spec file).
    #[arg(long = "l-max", global = true)]
    l_max: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write machine-readable reports.
    Analyze {
        /// Family spec file (JSON).
        spec: PathBuf,
        /// Directory for the report files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print periodic points, multipliers, and expansion rates at one
    /// parameter value, one record per line.
    Periodic {
        /// Family spec file (JSON).
        spec: PathBuf,
        /// Parameter value n.
        #[arg(long)]
        n: u64,
        /// Period l.
        #[arg(long)]
        l: u32,
    },
    /// Print the exact piecewise-linear limit data of the family.
    Skeleton {
        /// Family spec file (JSON).
        spec: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let ov = Overrides { precision: args.precision, seed: args.seed, l_max: args.l_max };
    let code = match args.command {
        Command::Analyze { spec, out } => cli::cmd_analyze_with(&spec, &out, &ov),
        Command::Periodic { spec, n, l } => cli::cmd_periodic_with(&spec, n, l, &ov),
        Command::Skeleton { spec } => cli::cmd_skeleton_with(&spec, &ov),
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
