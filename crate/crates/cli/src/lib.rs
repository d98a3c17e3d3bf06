//! Experiment driver for the two-qubit dephasing simulator: configuration
//! resolution, the four experiments (`sweep`, `channels`, `decompose`,
//! `trajectory`) and deterministic CSV emission.

pub mod config;
pub mod experiments;

pub use config::{
    resolve, ChannelSel, ConfigError, Experiment, Mode, Overrides, RunConfig, TOOL_VERSION,
};
pub use experiments::{
    channel_out_path, execute, run_channels, run_decompose, run_sweep, run_trajectory, RunError,
    SweepRow,
};

/// Process exit codes: 0 success, 2 configuration error, 3 numeric
/// failure, 4 I/O failure.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(dephasim_core::Error),
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "config error: {e}"),
            Self::Numeric(e) => write!(f, "numeric failure: {e}"),
            Self::Io { path, source } => {
                write!(f, "i/o failure on `{}`: {source}", path.display())
            }
        }
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => Self::Config(c),
            RunError::Numeric(n) => Self::Numeric(n),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

/// Resolve, run, and write every output file of one invocation.
pub fn run_to_files(
    experiment: Experiment,
    file: Option<&std::path::Path>,
    flags: &Overrides,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let cfg = resolve(experiment, file, flags)?;
    let outputs = execute(&cfg)?;
    let mut written = Vec::with_capacity(outputs.len());
    for (path, text) in outputs {
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
