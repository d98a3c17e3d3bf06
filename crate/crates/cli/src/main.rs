use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dephasim_cli::{run_to_files, Experiment, Overrides};

/// Simulate controllable two-qubit dephasing and measure its
/// non-Markovianity globally (mutual-information backflow) and locally
/// (Fisher-information flows per channel).
#[derive(Parser)]
#[command(name = "dephasim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (default `<experiment>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for the deterministic ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of noise realizations for Monte Carlo modes.
    #[arg(long)]
    ensemble: Option<usize>,
    /// Comb base frequency in MHz.
    #[arg(long)]
    omega0: Option<f64>,
    /// Sweep grid `lo:hi:step` in MHz.
    #[arg(long, value_name = "LO:HI:STEP")]
    omega0_grid: Option<String>,
    /// Evolution horizon in us.
    #[arg(long, value_name = "US")]
    tf: Option<f64>,
    /// Time-grid spacing in us.
    #[arg(long, value_name = "US")]
    dt: Option<f64>,
    /// Noisy channel selection: s, a, or sa.
    #[arg(long)]
    channels: Option<String>,
    /// Coherence route: analytic, bessel, or mc.
    #[arg(long)]
    mode: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate sweep points in parallel.
    #[arg(long)]
    parallel_sweep: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Non-Markovianity measures vs base frequency (phase diagram).
    Sweep(CommonArgs),
    /// Coherence, QFI and QFI flow for the s / a / sa channel setups.
    Channels(CommonArgs),
    /// QFI two ways plus the per-channel flow decomposition via the SLD.
    Decompose(CommonArgs),
    /// Plain trajectory dump: f, chi and QMI over time.
    Trajectory(CommonArgs),
}

impl Command {
    fn split(self) -> (Experiment, CommonArgs) {
        match self {
            Self::Sweep(a) => (Experiment::Sweep, a),
            Self::Channels(a) => (Experiment::Channels, a),
            Self::Decompose(a) => (Experiment::Decompose, a),
            Self::Trajectory(a) => (Experiment::Trajectory, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = cli.command.split();
    let flags = Overrides {
        out: args.out,
        seed: args.seed,
        ensemble: args.ensemble,
        omega0: args.omega0,
        omega0_grid: args.omega0_grid,
        tf: args.tf,
        dt: args.dt,
        channels: args.channels,
        mode: args.mode,
        threads: args.threads,
        parallel_sweep: args.parallel_sweep,
    };
    match run_to_files(experiment, args.config.as_deref(), &flags) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dephasim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
