//! Run configuration: defaults, flat `key = value` config files, and
//! command-line overrides, resolved with precedence flags > file > defaults.
//!
//! All frequency-like inputs are quoted in MHz (ordinary frequencies) and
//! converted to angular rad/us at the core boundary; times are in us.

use std::fmt;
use std::path::{Path, PathBuf};

use dephasim_core::noise::SpectralModel;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// MHz (cycles/us) -> angular rad/us.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    mhz * std::f64::consts::TAU
}

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sweep,
    Channels,
    Decompose,
    Trajectory,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sweep => "sweep",
            Self::Channels => "channels",
            Self::Decompose => "decompose",
            Self::Trajectory => "trajectory",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "sweep" => Ok(Self::Sweep),
            "channels" => Ok(Self::Channels),
            "decompose" => Ok(Self::Decompose),
            "trajectory" => Ok(Self::Trajectory),
            other => Err(err(format!(
                "unknown experiment `{other}` (expected sweep|channels|decompose|trajectory)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Bessel,
    MonteCarlo,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Bessel => "bessel",
            Self::MonteCarlo => "mc",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "bessel" => Ok(Self::Bessel),
            "mc" | "monte_carlo" => Ok(Self::MonteCarlo),
            other => Err(err(format!(
                "unknown mode `{other}` (expected analytic|bessel|mc)"
            ))),
        }
    }

    pub fn kind(&self) -> dephasim_core::TrajectoryKind {
        match self {
            Self::Analytic => dephasim_core::TrajectoryKind::Analytic,
            Self::Bessel => dephasim_core::TrajectoryKind::Bessel,
            Self::MonteCarlo => dephasim_core::TrajectoryKind::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSel {
    S,
    A,
    Sa,
}

impl ChannelSel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::S => "s",
            Self::A => "a",
            Self::Sa => "sa",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "s" => Ok(Self::S),
            "a" => Ok(Self::A),
            "sa" => Ok(Self::Sa),
            other => Err(err(format!(
                "unknown channel selection `{other}` (expected s|a|sa)"
            ))),
        }
    }
}

/// Fully resolved run parameters. Frequencies in MHz, times in us.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub seed: u64,
    pub ensemble: usize,
    pub mode: Mode,
    pub channels: Option<ChannelSel>,
    pub dt_us: f64,
    pub tf_us: f64,
    pub lambda_mhz: f64,
    pub gamma_mhz: f64,
    pub omega_j_mhz: f64,
    pub theta_mhz: f64,
    pub omega0_mhz: f64,
    pub omega0_grid: Vec<f64>,
    /// Zeeman splittings (MHz); zero keeps the interaction picture.
    pub omega_s_mhz: f64,
    pub omega_a_mhz: f64,
    /// Channel-experiment baths: system (monotone) and ancilla
    /// (oscillatory) defaults bracket the backflow regimes.
    pub omega0_s_mhz: f64,
    pub theta_s_mhz: f64,
    pub omega0_a_mhz: f64,
    pub theta_a_mhz: f64,
    /// Worker threads (0 = library default).
    pub threads: usize,
    /// Evaluate sweep points in parallel (memory scales with mode count).
    pub parallel_sweep: bool,
    /// Odd window size for Monte Carlo flow smoothing (0 = off).
    pub smooth_window: usize,
    /// Step for the finite-difference state derivative in `decompose`.
    pub dtheta: f64,
}

impl RunConfig {
    fn defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            out: PathBuf::from(format!("{}.csv", experiment.name())),
            seed: 7,
            ensemble: 150,
            mode: Mode::Analytic,
            channels: None,
            dt_us: 0.01,
            tf_us: 5.0,
            lambda_mhz: 2e-4,
            gamma_mhz: 0.9,
            omega_j_mhz: 5000.0,
            theta_mhz: 100.0,
            omega0_mhz: 0.05,
            omega0_grid: grid_from_spec(0.02, 0.2, 0.01),
            omega_s_mhz: 0.0,
            omega_a_mhz: 0.0,
            omega0_s_mhz: 0.05,
            theta_s_mhz: 100.0,
            omega0_a_mhz: 0.19,
            theta_a_mhz: 30.0,
            threads: 0,
            parallel_sweep: false,
            smooth_window: 0,
            dtheta: 1e-5,
        }
    }

    /// Number of time-grid steps (grid length is `steps + 1`).
    pub fn steps(&self) -> usize {
        (self.tf_us / self.dt_us).round() as usize
    }

    /// Drude-Lorentz bath from MHz-quoted knobs, converted to angular.
    pub fn bath(&self, omega0_mhz: f64, theta_mhz: f64) -> Result<SpectralModel, ConfigError> {
        let modes = (self.omega_j_mhz / omega0_mhz).floor() as usize;
        if modes == 0 {
            return Err(err(format!(
                "cutoff omega_j_mhz = {} lies below omega0_mhz = {omega0_mhz}",
                self.omega_j_mhz
            )));
        }
        SpectralModel::drude_lorentz(
            mhz_to_angular(self.lambda_mhz),
            mhz_to_angular(self.gamma_mhz),
            mhz_to_angular(theta_mhz),
            mhz_to_angular(omega0_mhz),
            modes,
        )
        .map_err(|e| err(e.to_string()))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positives = [
            ("lambda_mhz", self.lambda_mhz),
            ("gamma_mhz", self.gamma_mhz),
            ("omega_j_mhz", self.omega_j_mhz),
            ("theta_mhz", self.theta_mhz),
            ("omega0_mhz", self.omega0_mhz),
            ("omega0_s_mhz", self.omega0_s_mhz),
            ("theta_s_mhz", self.theta_s_mhz),
            ("omega0_a_mhz", self.omega0_a_mhz),
            ("theta_a_mhz", self.theta_a_mhz),
            ("dt_us", self.dt_us),
            ("tf_us", self.tf_us),
            ("dtheta", self.dtheta),
        ];
        for (name, value) in positives {
            if !value.is_finite() || value <= 0.0 {
                return Err(err(format!(
                    "key `{name}` must be finite and > 0, got {value}"
                )));
            }
        }
        if self.tf_us < self.dt_us {
            return Err(err(format!(
                "key `tf_us` = {} must be at least dt_us = {}",
                self.tf_us, self.dt_us
            )));
        }
        if self.ensemble == 0 {
            return Err(err("key `ensemble` must be at least 1"));
        }
        if self.omega0_grid.is_empty() {
            return Err(err("key `omega0_grid` produced no points"));
        }
        let mut prev = 0.0;
        for &w in &self.omega0_grid {
            if !w.is_finite() || w <= prev {
                return Err(err(format!(
                    "key `omega0_grid` must be strictly increasing and > 0 (offending point {w})"
                )));
            }
            prev = w;
        }
        if self.smooth_window != 0
            && (self.smooth_window < 3 || self.smooth_window.is_multiple_of(2))
        {
            return Err(err(format!(
                "key `smooth_window` must be 0 (off) or an odd number >= 3, got {}",
                self.smooth_window
            )));
        }
        Ok(())
    }

    /// Resolved-config lines echoed into every CSV header.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# dephasim {TOOL_VERSION}"),
            format!("# experiment = {}", self.experiment.name()),
        ];
        let mut kv: Vec<(String, String)> = vec![
            ("dt_us".into(), fmt_f64(self.dt_us)),
            ("ensemble".into(), self.ensemble.to_string()),
            ("gamma_mhz".into(), fmt_f64(self.gamma_mhz)),
            ("lambda_mhz".into(), fmt_f64(self.lambda_mhz)),
            ("mode".into(), self.mode.name().into()),
            ("omega_j_mhz".into(), fmt_f64(self.omega_j_mhz)),
            ("seed".into(), self.seed.to_string()),
            ("tf_us".into(), fmt_f64(self.tf_us)),
        ];
        match self.experiment {
            Experiment::Sweep => {
                kv.push(("theta_mhz".into(), fmt_f64(self.theta_mhz)));
                kv.push((
                    "omega0_grid".into(),
                    self.omega0_grid
                        .iter()
                        .map(|w| fmt_f64(*w))
                        .collect::<Vec<_>>()
                        .join(" "),
                ));
            }
            Experiment::Channels => {
                kv.push(("omega0_s_mhz".into(), fmt_f64(self.omega0_s_mhz)));
                kv.push(("theta_s_mhz".into(), fmt_f64(self.theta_s_mhz)));
                kv.push(("omega0_a_mhz".into(), fmt_f64(self.omega0_a_mhz)));
                kv.push(("theta_a_mhz".into(), fmt_f64(self.theta_a_mhz)));
            }
            Experiment::Decompose | Experiment::Trajectory => {
                kv.push(("theta_mhz".into(), fmt_f64(self.theta_mhz)));
                kv.push(("omega0_mhz".into(), fmt_f64(self.omega0_mhz)));
                kv.push((
                    "channels".into(),
                    self.channels.unwrap_or(ChannelSel::S).name().into(),
                ));
            }
        }
        if self.experiment == Experiment::Decompose {
            kv.push(("dtheta".into(), fmt_f64(self.dtheta)));
        }
        kv.sort();
        lines.extend(kv.into_iter().map(|(k, v)| format!("# {k} = {v}")));
        lines
    }
}

/// Shortest round-trip decimal for CSV and headers (negative zero folds
/// onto plain zero).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x}")
}

/// Expand `lo:hi:step` into grid points, rounded to 9 decimals so the
/// emitted values match the intended decimal grid.
fn grid_from_spec(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut points = Vec::new();
    let mut k = 0u32;
    loop {
        let x = lo + k as f64 * step;
        if x > hi + 1e-9 * step.abs().max(1.0) {
            break;
        }
        points.push((x * 1e9).round() / 1e9);
        k += 1;
        if k > 1_000_000 {
            break;
        }
    }
    points
}

fn parse_grid_spec(s: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err(format!(
            "omega0 grid `{s}` must have the form lo:hi:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("malformed number `{p}` in omega0 grid `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    let well_formed =
        nums.iter().all(|n| n.is_finite()) && nums[0] > 0.0 && nums[1] >= nums[0] && nums[2] > 0.0;
    if !well_formed {
        return Err(err(format!(
            "omega0 grid `{s}` needs 0 < lo <= hi and step > 0"
        )));
    }
    Ok(grid_from_spec(nums[0], nums[1], nums[2]))
}

/// Optional command-line overrides (highest precedence).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub omega0: Option<f64>,
    pub omega0_grid: Option<String>,
    pub tf: Option<f64>,
    pub dt: Option<f64>,
    pub channels: Option<String>,
    pub mode: Option<String>,
    pub threads: Option<usize>,
    pub parallel_sweep: bool,
}

fn apply_pair(
    cfg: &mut RunConfig,
    key: &str,
    value: &str,
    location: &str,
) -> Result<(), ConfigError> {
    let bad_num = |k: &str| {
        err(format!(
            "malformed numeric value `{value}` for key `{k}` at {location}"
        ))
    };
    match key {
        "experiment" => {
            let exp = Experiment::parse(value)?;
            if exp != cfg.experiment {
                return Err(err(format!(
                    "config file names experiment `{value}` but the `{}` subcommand was invoked",
                    cfg.experiment.name()
                )));
            }
        }
        "out" => cfg.out = PathBuf::from(value),
        "seed" => cfg.seed = value.parse().map_err(|_| bad_num("seed"))?,
        "ensemble" => cfg.ensemble = value.parse().map_err(|_| bad_num("ensemble"))?,
        "mode" => cfg.mode = Mode::parse(value)?,
        "channels" => cfg.channels = Some(ChannelSel::parse(value)?),
        "dt_us" => cfg.dt_us = value.parse().map_err(|_| bad_num("dt_us"))?,
        "tf_us" => cfg.tf_us = value.parse().map_err(|_| bad_num("tf_us"))?,
        "lambda_mhz" => cfg.lambda_mhz = value.parse().map_err(|_| bad_num("lambda_mhz"))?,
        "gamma_mhz" => cfg.gamma_mhz = value.parse().map_err(|_| bad_num("gamma_mhz"))?,
        "omega_j_mhz" => cfg.omega_j_mhz = value.parse().map_err(|_| bad_num("omega_j_mhz"))?,
        "theta_mhz" => cfg.theta_mhz = value.parse().map_err(|_| bad_num("theta_mhz"))?,
        "omega0_mhz" => cfg.omega0_mhz = value.parse().map_err(|_| bad_num("omega0_mhz"))?,
        "omega0_grid" => cfg.omega0_grid = parse_grid_spec(value)?,
        "omega_s_mhz" => cfg.omega_s_mhz = value.parse().map_err(|_| bad_num("omega_s_mhz"))?,
        "omega_a_mhz" => cfg.omega_a_mhz = value.parse().map_err(|_| bad_num("omega_a_mhz"))?,
        "omega0_s_mhz" => cfg.omega0_s_mhz = value.parse().map_err(|_| bad_num("omega0_s_mhz"))?,
        "theta_s_mhz" => cfg.theta_s_mhz = value.parse().map_err(|_| bad_num("theta_s_mhz"))?,
        "omega0_a_mhz" => cfg.omega0_a_mhz = value.parse().map_err(|_| bad_num("omega0_a_mhz"))?,
        "theta_a_mhz" => cfg.theta_a_mhz = value.parse().map_err(|_| bad_num("theta_a_mhz"))?,
        "threads" => cfg.threads = value.parse().map_err(|_| bad_num("threads"))?,
        "parallel_sweep" => {
            cfg.parallel_sweep = value.parse().map_err(|_| {
                err(format!(
                    "key `parallel_sweep` expects true|false at {location}"
                ))
            })?
        }
        "smooth_window" => {
            cfg.smooth_window = value.parse().map_err(|_| bad_num("smooth_window"))?
        }
        "dtheta" => cfg.dtheta = value.parse().map_err(|_| bad_num("dtheta"))?,
        other => {
            return Err(err(format!("unknown config key `{other}` at {location}")));
        }
    }
    Ok(())
}

fn apply_file(cfg: &mut RunConfig, path: &Path) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config `{}`: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let location = format!("{}:{}", path.display(), idx + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value` at {location}")))?;
        apply_pair(cfg, key.trim(), value.trim(), &location)?;
    }
    Ok(())
}

/// Resolve the effective configuration: defaults, then the config file,
/// then command-line flags.
pub fn resolve(
    experiment: Experiment,
    file: Option<&Path>,
    flags: &Overrides,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::defaults(experiment);
    if let Some(path) = file {
        apply_file(&mut cfg, path)?;
    }
    if let Some(out) = &flags.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(n) = flags.ensemble {
        cfg.ensemble = n;
    }
    if let Some(w) = flags.omega0 {
        cfg.omega0_mhz = w;
    }
    if let Some(spec) = &flags.omega0_grid {
        cfg.omega0_grid = parse_grid_spec(spec)?;
    }
    if let Some(tf) = flags.tf {
        cfg.tf_us = tf;
    }
    if let Some(dt) = flags.dt {
        cfg.dt_us = dt;
    }
    if let Some(ch) = &flags.channels {
        cfg.channels = Some(ChannelSel::parse(ch)?);
    }
    if let Some(mode) = &flags.mode {
        cfg.mode = Mode::parse(mode)?;
    }
    if let Some(threads) = flags.threads {
        cfg.threads = threads;
    }
    if flags.parallel_sweep {
        cfg.parallel_sweep = true;
    }
    cfg.validate()?;
    Ok(cfg)
}
