//! The four experiments behind the CLI subcommands.
//!
//! Each run produces deterministic CSV text: a `#`-commented header echoing
//! the resolved configuration, a column-name line, and one row per grid
//! point, with every float in shortest round-trip decimal form.

use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;

use dephasim_core::dynamics::{evolve, EnsembleConfig, TimeGrid, TrajectoryKind};
use dephasim_core::measures::{
    channel_flow_decomposition, fd_param_derivative, measure_report, qfi, qfi_flow, sld,
    ChannelSpec, MeasureConfig, Smoothing, SLD_FLOOR,
};
use dephasim_core::quantum::{CMatrix, DensityMatrix, HermitianOperator, Subsystem};
use dephasim_core::ChannelConfig;

use crate::config::{fmt_f64, mhz_to_angular, ChannelSel, ConfigError, Experiment, RunConfig};

/// Sweep output row: measures vs the comb base frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega0_mhz: f64,
    pub n0_bits: f64,
    pub n_blp: f64,
    pub n_rhp: f64,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(dephasim_core::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<dephasim_core::Error> for RunError {
    fn from(e: dephasim_core::Error) -> Self {
        Self::Numeric(e)
    }
}

fn ensemble(cfg: &RunConfig) -> Result<EnsembleConfig, RunError> {
    Ok(EnsembleConfig {
        realizations: cfg.ensemble,
        master_seed: cfg.seed,
        grid: TimeGrid::uniform(cfg.dt_us, cfg.steps())?,
    })
}

fn measure_config(cfg: &RunConfig) -> MeasureConfig {
    MeasureConfig {
        t_f: cfg.tf_us,
        smoothing: (cfg.smooth_window >= 3).then_some(Smoothing {
            window: cfg.smooth_window,
        }),
        ..Default::default()
    }
}

fn csv(header: &[String], columns: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for line in header {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(columns);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Channel configuration for one selection, using the trajectory bath for
/// whichever qubits are active.
fn trajectory_channels(cfg: &RunConfig, sel: ChannelSel) -> Result<ChannelConfig, RunError> {
    let bath = || cfg.bath(cfg.omega0_mhz, cfg.theta_mhz);
    let config = match sel {
        ChannelSel::S => ChannelConfig::system_only(bath()?),
        ChannelSel::A => ChannelConfig::ancilla_only(bath()?),
        ChannelSel::Sa => ChannelConfig::both(bath()?, bath()?),
    };
    Ok(config.with_zeeman(
        mhz_to_angular(cfg.omega_s_mhz),
        mhz_to_angular(cfg.omega_a_mhz),
    ))
}

/// Measure the sweep point at one base frequency.
fn sweep_point(cfg: &RunConfig, omega0_mhz: f64) -> Result<SweepRow, RunError> {
    let model = cfg.bath(omega0_mhz, cfg.theta_mhz)?;
    let ens = ensemble(cfg)?;
    let traj = evolve(&ChannelConfig::system_only(model), &ens, cfg.mode.kind())?;
    let report = measure_report(&traj, &measure_config(cfg))?;
    Ok(SweepRow {
        omega0_mhz,
        n0_bits: report.n0,
        n_blp: report.n_blp,
        n_rhp: report.n_rhp,
    })
}

/// Non-Markovianity measures vs base frequency over the configured grid.
pub fn run_sweep(cfg: &RunConfig) -> Result<(Vec<SweepRow>, String), RunError> {
    let rows: Vec<SweepRow> = if cfg.parallel_sweep {
        cfg.omega0_grid
            .par_iter()
            .map(|&w| sweep_point(cfg, w))
            .collect::<Result<_, _>>()?
    } else {
        cfg.omega0_grid
            .iter()
            .map(|&w| sweep_point(cfg, w))
            .collect::<Result<_, _>>()?
    };
    let text = csv(
        &cfg.header_lines(),
        "omega0_mhz,n0_bits,n_blp,n_rhp",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                fmt_f64(r.omega0_mhz),
                fmt_f64(r.n0_bits),
                fmt_f64(r.n_blp),
                fmt_f64(r.n_rhp)
            )
        }),
    );
    Ok((rows, text))
}

/// Per-channel-configuration trajectory table: analytic and Monte Carlo
/// coherence, spectral QFI with its central-difference flow, and the
/// closed-form pair.
fn channels_table(cfg: &RunConfig, sel: ChannelSel) -> Result<String, RunError> {
    let model_s = cfg.bath(cfg.omega0_s_mhz, cfg.theta_s_mhz)?;
    let model_a = cfg.bath(cfg.omega0_a_mhz, cfg.theta_a_mhz)?;
    let channel = match sel {
        ChannelSel::S => ChannelConfig::system_only(model_s),
        ChannelSel::A => ChannelConfig::ancilla_only(model_a),
        ChannelSel::Sa => ChannelConfig::both(model_s, model_a),
    };
    let ens = ensemble(cfg)?;
    let analytic = evolve(&channel, &ens, TrajectoryKind::Analytic)?;
    let mc = evolve(&channel, &ens, TrajectoryKind::MonteCarlo)?;

    let gen = HermitianOperator::phase_generator();
    let q: Vec<f64> = analytic
        .rho
        .iter()
        .map(|r| qfi(r, &gen))
        .collect::<dephasim_core::Result<_>>()?;
    let flow = qfi_flow(&q, analytic.dt(), &measure_config(cfg))?;

    let mut header = cfg.header_lines();
    header.push(format!("# channels = {}", sel.name()));
    let rows = (0..analytic.len()).map(|k| {
        let t = analytic.times[k];
        // Closed forms straight from the decoherence factor the analytic
        // trajectory already carries.
        let q_closed = 4.0 * (-4.0 * analytic.chi[k]).exp();
        let flow_closed = -16.0 * analytic.chi_dot[k] * (-4.0 * analytic.chi[k]).exp();
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(t),
            fmt_f64(analytic.f[k]),
            fmt_f64(mc.f[k]),
            fmt_f64(mc.f_stderr[k]),
            fmt_f64(q[k]),
            fmt_f64(flow[k]),
            fmt_f64(q_closed),
            fmt_f64(flow_closed)
        )
    });
    Ok(csv(
        &header,
        "t_us,f_analytic,f_mc,f_stderr,qfi,qfi_flow,qfi_closed,qfi_flow_closed",
        rows,
    ))
}

/// One CSV per requested channel configuration (all three by default).
pub fn run_channels(cfg: &RunConfig) -> Result<Vec<(ChannelSel, String)>, RunError> {
    let selections = match cfg.channels {
        Some(sel) => vec![sel],
        None => vec![ChannelSel::S, ChannelSel::A, ChannelSel::Sa],
    };
    selections
        .into_iter()
        .map(|sel| Ok((sel, channels_table(cfg, sel)?)))
        .collect()
}

/// Unitary phase imprint `exp(-i theta O) rho exp(i theta O)` for the
/// generator `(sigma_z_s + sigma_z_a)/2` (diagonal, so the exponential is
/// exact).
fn phase_family(rho: &DensityMatrix, theta: f64) -> DensityMatrix {
    let u = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, -theta),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, theta),
    ]));
    DensityMatrix::new(&u * rho.matrix() * u.adjoint())
        .expect("unitary conjugation preserves state validity")
}

/// QFI two ways (spectral formula vs `Tr(rho L^2)` through the
/// finite-difference SLD pipeline) plus the per-channel flow decomposition
/// of the default dephasing channel with rate `gamma(t) = 2 chi'(t)`.
pub fn run_decompose(cfg: &RunConfig) -> Result<String, RunError> {
    let sel = cfg.channels.unwrap_or(ChannelSel::S);
    let channel = trajectory_channels(cfg, sel)?;
    let ens = ensemble(cfg)?;
    let traj = evolve(&channel, &ens, TrajectoryKind::Analytic)?;

    let gen = HermitianOperator::phase_generator();
    let q_spectral: Vec<f64> = traj
        .rho
        .iter()
        .map(|r| qfi(r, &gen))
        .collect::<dephasim_core::Result<_>>()?;
    let flow_fd = qfi_flow(&q_spectral, traj.dt(), &measure_config(cfg))?;

    // Jump operators per active qubit; the dephasing rate identification
    // gamma(t) = 2 chi'(t) splits the total chi' evenly over the active
    // channels only when both actually carry it, so decompose per channel.
    let active: Vec<Subsystem> = [
        channel.system.as_ref().map(|_| Subsystem::System),
        channel.ancilla.as_ref().map(|_| Subsystem::Ancilla),
    ]
    .into_iter()
    .flatten()
    .collect();

    let per_channel_chidot: Vec<Vec<f64>> = active
        .iter()
        .map(|sub| {
            let model = match sub {
                Subsystem::System => channel.system.as_ref().unwrap(),
                Subsystem::Ancilla => channel.ancilla.as_ref().unwrap(),
            };
            dephasim_core::dynamics::chi_series(model, &traj.times).1
        })
        .collect();

    let labels: Vec<&str> = active
        .iter()
        .map(|s| match s {
            Subsystem::System => "z_s",
            Subsystem::Ancilla => "z_a",
        })
        .collect();

    let mut rows = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let rho = &traj.rho[k];
        let drho = fd_param_derivative(|theta| phase_family(rho, theta), 0.0, cfg.dtheta)?;
        let l = sld(rho, &drho, SLD_FLOOR)?;
        let q_sld = (rho.matrix() * l.matrix() * l.matrix()).trace().re;

        let spec = ChannelSpec::new(
            active
                .iter()
                .zip(&per_channel_chidot)
                .flat_map(|(sub, chidot)| ChannelSpec::dephasing_z(*sub, 2.0 * chidot[k]).channels)
                .collect(),
        );
        let flows = channel_flow_decomposition(rho, &l, &spec)?;
        let total: f64 = flows.iter().sum();

        let mut row = format!(
            "{},{},{},{},{}",
            fmt_f64(traj.times[k]),
            fmt_f64(q_spectral[k]),
            fmt_f64(q_sld),
            fmt_f64(flow_fd[k]),
            fmt_f64(total)
        );
        for flow in &flows {
            row.push(',');
            row.push_str(&fmt_f64(*flow));
        }
        rows.push(row);
    }

    let mut columns = String::from("t_us,qfi_spectral,qfi_sld,qfi_flow,flow_total");
    for label in &labels {
        columns.push_str(",flow_");
        columns.push_str(label);
    }
    Ok(csv(&cfg.header_lines(), &columns, rows.into_iter()))
}

/// Plain trajectory dump: coherence, errors, decoherence factor and QMI.
pub fn run_trajectory(cfg: &RunConfig) -> Result<String, RunError> {
    let sel = cfg.channels.unwrap_or(ChannelSel::S);
    let channel = trajectory_channels(cfg, sel)?;
    let ens = ensemble(cfg)?;
    let traj = evolve(&channel, &ens, cfg.mode.kind())?;
    let qmi_vals = dephasim_core::measures::qmi_curve(&traj)?;
    let rows = (0..traj.len()).map(|k| {
        format!(
            "{},{},{},{},{}",
            fmt_f64(traj.times[k]),
            fmt_f64(traj.f[k]),
            fmt_f64(traj.f_stderr[k]),
            fmt_f64(traj.chi[k]),
            fmt_f64(qmi_vals[k])
        )
    });
    Ok(csv(
        &cfg.header_lines(),
        "t_us,f,f_stderr,chi,qmi_bits",
        rows,
    ))
}

/// Output-file name for one channel selection when several tables are
/// written: `channels.csv` becomes `channels_s.csv` and so on.
pub fn channel_out_path(base: &std::path::Path, sel: ChannelSel, multi: bool) -> PathBuf {
    if !multi {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "channels".into());
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_{}{ext}", sel.name()))
}

/// Run the configured experiment and collect `(path, csv)` outputs.
pub fn execute(cfg: &RunConfig) -> Result<Vec<(PathBuf, String)>, RunError> {
    let run = || -> Result<Vec<(PathBuf, String)>, RunError> {
        match cfg.experiment {
            Experiment::Sweep => {
                let (_, text) = run_sweep(cfg)?;
                Ok(vec![(cfg.out.clone(), text)])
            }
            Experiment::Channels => {
                let tables = run_channels(cfg)?;
                let multi = tables.len() > 1;
                Ok(tables
                    .into_iter()
                    .map(|(sel, text)| (channel_out_path(&cfg.out, sel, multi), text))
                    .collect())
            }
            Experiment::Decompose => Ok(vec![(cfg.out.clone(), run_decompose(cfg)?)]),
            Experiment::Trajectory => Ok(vec![(cfg.out.clone(), run_trajectory(cfg)?)]),
        }
    };
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| ConfigError {
                message: format!("cannot build a {}-thread worker pool: {e}", cfg.threads),
            })?;
        pool.install(run)
    } else {
        run()
    }
}
