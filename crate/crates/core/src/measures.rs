//! Global and local non-Markovianity measures.
//!
//! Global: quantum mutual information `I = S(rho_s) + S(rho_a) - S(rho_sa)`
//! (bits), its rate, and the accumulated-rise measure; the trace-distance
//! witness (summed rises of the distance between the optimally-chosen
//! dephasing pair); and the divisibility witness (summed rises of `ln f`,
//! since the intermediate dephasing map from `t` to `t + dt` has coherence
//! factor `f(t + dt)/f(t)` and stops being completely positive exactly
//! when `f` rises).
//!
//! Local: quantum Fisher information of the phase parameter generated by
//! `(sigma_z_s + sigma_z_a)/2`, its flow `dQ/dt`, the symmetric
//! logarithmic derivative, and the per-jump-operator decomposition of the
//! flow `F = sum_ij gamma_ij J_ij` with
//! `J_ij = -Tr(rho [L, A_ij]^dag [L, A_ij])`.

use num_complex::Complex64;

use crate::dynamics::{
    analytic_chi, analytic_chi_derivative, ChannelConfig, Trajectory, TrajectoryKind,
};
use crate::error::{Error, Result};
use crate::quantum::{
    clamp_eigenvalue, commutator, eigh, partial_trace, von_neumann_entropy, CMatrix, DensityMatrix,
    HermitianOperator, Subsystem,
};

/// Eigenpair sums below this are excluded from the QFI spectral sum.
pub const QFI_FLOOR: f64 = 1e-12;
/// Default support floor for the symmetric logarithmic derivative.
pub const SLD_FLOOR: f64 = 1e-10;

/// Local quadratic smoothing for noisy series (window size must be odd).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing {
    pub window: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { window: 11 }
    }
}

/// Integration horizon and thresholds for the measures.
///
/// Integrals are trapezoid sums on the trajectory grid (a rising interval
/// contributes exactly its endpoint difference); derivatives are central
/// differences with one-sided ends. Rises are counted only above
/// `eps_pos`, so eigensolver-level jitter cannot fake backflow.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureConfig {
    /// Horizon (us); the trajectory must cover it.
    pub t_f: f64,
    /// Positive-part threshold for rise detection.
    pub eps_pos: f64,
    /// Optional smoothing for Monte Carlo flow estimates; off by default.
    pub smoothing: Option<Smoothing>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            t_f: 5.0,
            eps_pos: 1e-12,
            smoothing: None,
        }
    }
}

/// Index of the last grid point inside the horizon.
fn horizon_index(traj: &Trajectory, cfg: &MeasureConfig) -> Result<usize> {
    let last = *traj
        .times
        .last()
        .ok_or(Error::SeriesTooShort { min: 1, got: 0 })?;
    if cfg.t_f > last + 1e-9 {
        return Err(Error::InvalidParameter {
            name: "t_f",
            value: cfg.t_f,
            constraint: "horizon must lie inside the trajectory grid",
        });
    }
    Ok(traj
        .times
        .iter()
        .rposition(|&t| t <= cfg.t_f + 1e-9)
        .unwrap_or(0))
}

/// Sum of increments exceeding `eps` over a series.
fn summed_rises(series: &[f64], eps: f64) -> f64 {
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > eps)
        .fold(0.0, |acc, d| acc + d)
}

/// Quantum mutual information `S(rho_s) + S(rho_a) - S(rho_sa)` in bits.
pub fn qmi(rho_sa: &DensityMatrix) -> Result<f64> {
    if rho_sa.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho_sa.dim(),
        });
    }
    let s = von_neumann_entropy(&partial_trace(rho_sa, Subsystem::System)?);
    let a = von_neumann_entropy(&partial_trace(rho_sa, Subsystem::Ancilla)?);
    Ok(s + a - von_neumann_entropy(rho_sa))
}

/// QMI at every trajectory point.
pub fn qmi_curve(traj: &Trajectory) -> Result<Vec<f64>> {
    traj.rho.iter().map(qmi).collect()
}

/// Time derivative of the QMI at grid index `k` (bits/us).
///
/// Analytic trajectories use the closed form
/// `-chi'(t) f(t) log2[(1 + f)/(1 - f)]`; at `f = 1` the rate is the limit
/// value 0 (`chi'` vanishes wherever the coherence is full). Other
/// trajectory kinds fall back to central differences of the QMI curve.
pub fn qmi_rate(traj: &Trajectory, k: usize) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::SeriesTooShort {
            min: 3,
            got: traj.len(),
        });
    }
    match traj.kind {
        TrajectoryKind::Analytic => {
            let f = traj.f[k];
            if f >= 1.0 - 1e-15 || f <= 0.0 {
                // log2((1+f)/(1-f)) diverges at f = 1 but chi' = 0 there;
                // at f = 0 the prefactor kills the rate.
                return Ok(0.0);
            }
            Ok(-traj.chi_dot[k] * f * ((1.0 + f) / (1.0 - f)).log2())
        }
        _ => {
            let i_curve = qmi_curve(traj)?;
            let dt = traj.dt();
            let n = i_curve.len();
            Ok(if k == 0 {
                (i_curve[1] - i_curve[0]) / dt
            } else if k == n - 1 {
                (i_curve[n - 1] - i_curve[n - 2]) / dt
            } else {
                (i_curve[k + 1] - i_curve[k - 1]) / (2.0 * dt)
            })
        }
    }
}

/// Accumulated QMI rise over `[0, t_f]` (bits): the summed increases of
/// `I(t)` across maximal rising intervals.
pub fn n0_measure(traj: &Trajectory, cfg: &MeasureConfig) -> Result<f64> {
    let hi = horizon_index(traj, cfg)?;
    let i_curve = traj.rho[..=hi]
        .iter()
        .map(qmi)
        .collect::<Result<Vec<f64>>>()?;
    Ok(summed_rises(&i_curve, cfg.eps_pos))
}

/// Trace-distance witness using the canonical dephasing pair
/// `(|0> +- |1>)/sqrt(2)`, whose distance under pure dephasing equals the
/// coherence norm: the measure is the summed rises of `f`.
pub fn blp_measure(traj: &Trajectory, cfg: &MeasureConfig) -> Result<f64> {
    let hi = horizon_index(traj, cfg)?;
    Ok(summed_rises(&traj.f[..=hi], cfg.eps_pos))
}

/// Trace-distance witness for an arbitrary evolved state pair.
pub fn blp_from_pair(
    first: &[DensityMatrix],
    second: &[DensityMatrix],
    cfg: &MeasureConfig,
) -> Result<f64> {
    if first.len() != second.len() {
        return Err(Error::SeriesTooShort {
            min: first.len(),
            got: second.len(),
        });
    }
    let d = first
        .iter()
        .zip(second)
        .map(|(a, b)| crate::quantum::trace_distance(a, b))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summed_rises(&d, cfg.eps_pos))
}

/// Divisibility witness: accumulated log-growth of the coherence,
/// `int max(0, f'/f) dt`, summed as rises of `ln f` on the grid.
///
/// Fails when the coherence reaches zero inside the horizon: the
/// intermediate map `f(t + dt)/f(t)` is then undefined.
pub fn rhp_measure(traj: &Trajectory, cfg: &MeasureConfig) -> Result<f64> {
    let hi = horizon_index(traj, cfg)?;
    let mut log_f = Vec::with_capacity(hi + 1);
    for k in 0..=hi {
        if traj.f[k] <= 0.0 {
            return Err(Error::NonpositiveCoherence {
                value: traj.f[k],
                t: traj.times[k],
            });
        }
        log_f.push(traj.f[k].ln());
    }
    Ok(summed_rises(&log_f, cfg.eps_pos))
}

/// Quantum Fisher information of the phase parameter encoded by `gen`:
/// `Q = 2 sum_{P_i + P_j != 0} (P_i - P_j)^2 / (P_i + P_j) |<psi_i|O|psi_j>|^2`.
pub fn qfi(rho: &DensityMatrix, gen: &HermitianOperator) -> Result<f64> {
    qfi_with_floor(rho, gen, QFI_FLOOR)
}

/// [`qfi`] with an explicit eigenpair-sum floor.
pub fn qfi_with_floor(rho: &DensityMatrix, gen: &HermitianOperator, floor: f64) -> Result<f64> {
    if rho.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: gen.dim(),
        });
    }
    let spec = eigh(rho);
    let dim = spec.dim();
    // Generator matrix elements in the eigenbasis.
    let o = spec.eigenvectors.adjoint() * gen.matrix() * &spec.eigenvectors;
    let mut q = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let pi = clamp_eigenvalue(spec.eigenvalues[i]);
            let pj = clamp_eigenvalue(spec.eigenvalues[j]);
            let sum = pi + pj;
            if sum < floor {
                continue;
            }
            let diff = pi - pj;
            q += 2.0 * diff * diff / sum * o[(i, j)].norm_sqr();
        }
    }
    Ok(q)
}

/// Quadratic local fit of `y` at index `k` over a window clipped to the
/// series bounds.
fn quadratic_fit_at(y: &[f64], k: usize, half: usize) -> f64 {
    let lo = k.saturating_sub(half);
    let hi = (k + half).min(y.len() - 1);
    let m = hi - lo + 1;
    if m < 3 {
        return y[k];
    }
    // Normal equations for y = a + b x + c x^2 with x centered on k.
    let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for (i, &yi) in y.iter().enumerate().take(hi + 1).skip(lo) {
        let x = i as f64 - k as f64;
        let x2 = x * x;
        s0 += 1.0;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        t0 += yi;
        t1 += yi * x;
        t2 += yi * x2;
    }
    let det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) + s2 * (s1 * s3 - s2 * s2);
    if det.abs() < 1e-300 {
        return y[k];
    }
    // Cramer's rule for the constant coefficient a = fit value at x = 0.
    let det_a = t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - s3 * t2) + s2 * (t1 * s3 - s2 * t2);
    det_a / det
}

/// Smooth a series with a local quadratic fit (exact on quadratics).
fn smooth_series(y: &[f64], window: usize) -> Vec<f64> {
    let half = (window.max(3)) / 2;
    (0..y.len()).map(|k| quadratic_fit_at(y, k, half)).collect()
}

/// QFI flow `dQ/dt` by central differences on a uniform grid (one-sided at
/// the endpoints), with optional local-quadratic pre-smoothing for noisy
/// Monte Carlo series.
pub fn qfi_flow(q: &[f64], dt: f64, cfg: &MeasureConfig) -> Result<Vec<f64>> {
    if q.len() < 3 {
        return Err(Error::SeriesTooShort {
            min: 3,
            got: q.len(),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            constraint: "grid spacing must be > 0",
        });
    }
    let smoothed;
    let series = match cfg.smoothing {
        Some(s) => {
            smoothed = smooth_series(q, s.window);
            &smoothed
        }
        None => q,
    };
    let n = series.len();
    Ok((0..n)
        .map(|k| {
            if k == 0 {
                (series[1] - series[0]) / dt
            } else if k == n - 1 {
                (series[n - 1] - series[n - 2]) / dt
            } else {
                (series[k + 1] - series[k - 1]) / (2.0 * dt)
            }
        })
        .collect())
}

/// Closed-form QFI and flow for the configured channels at time `t`:
/// `Q = 4 exp(-4 chi_tot)`, `F = -16 chi_tot' exp(-4 chi_tot)` with
/// `chi_tot` summed over the noisy channels.
pub fn closed_form_qfi(config: &ChannelConfig, t: f64) -> (f64, f64) {
    let mut chi = 0.0;
    let mut chi_dot = 0.0;
    for model in [&config.system, &config.ancilla].into_iter().flatten() {
        chi += analytic_chi(model, t);
        chi_dot += analytic_chi_derivative(model, t);
    }
    let q = 4.0 * (-4.0 * chi).exp();
    (q, -16.0 * chi_dot * (-4.0 * chi).exp())
}

/// Symmetric logarithmic derivative `L` solving
/// `d_theta rho = (L rho + rho L)/2`:
/// `L_ij = 2 <psi_i| d_theta rho |psi_j> / (P_i + P_j)` in the eigenbasis
/// of `rho`, with elements on eigenpair sums below `floor` set to zero.
pub fn sld(
    rho: &DensityMatrix,
    drho_dtheta: &HermitianOperator,
    floor: f64,
) -> Result<HermitianOperator> {
    if rho.dim() != drho_dtheta.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: drho_dtheta.dim(),
        });
    }
    let trace = drho_dtheta.matrix().trace();
    if trace.norm() > 1e-10 {
        return Err(Error::NotTraceless { trace: trace.re });
    }
    let spec = eigh(rho);
    let dim = spec.dim();
    let d = spec.eigenvectors.adjoint() * drho_dtheta.matrix() * &spec.eigenvectors;
    let mut l_eig = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let sum = clamp_eigenvalue(spec.eigenvalues[i]) + clamp_eigenvalue(spec.eigenvalues[j]);
            if sum >= floor {
                l_eig[(i, j)] = Complex64::new(2.0, 0.0) * d[(i, j)] / Complex64::new(sum, 0.0);
            }
        }
    }
    let l = &spec.eigenvectors * l_eig * spec.eigenvectors.adjoint();
    HermitianOperator::new(l)
}

/// Central-difference derivative of a state family:
/// `(rho(theta0 + dtheta) - rho(theta0 - dtheta)) / (2 dtheta)`, hermitized.
pub fn fd_param_derivative<F>(evolve_fn: F, theta0: f64, dtheta: f64) -> Result<HermitianOperator>
where
    F: Fn(f64) -> DensityMatrix,
{
    if !dtheta.is_finite() || dtheta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dtheta",
            value: dtheta,
            constraint: "finite-difference step must be > 0",
        });
    }
    let plus = evolve_fn(theta0 + dtheta);
    let minus = evolve_fn(theta0 - dtheta);
    let diff = (plus.matrix() - minus.matrix()) / Complex64::new(2.0 * dtheta, 0.0);
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::new(herm)
}

/// One decoherence pathway: a jump operator with its instantaneous rate.
///
/// Jump operators are arbitrary matrices (eigenbasis matrix units
/// `|e_i><e_j|` are not Hermitian for `i != j`).
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub label: String,
    pub operator: CMatrix,
    pub rate: f64,
}

/// A set of decoherence channels for the flow decomposition.
#[derive(Debug, Clone, Default)]
pub struct ChannelSpec {
    pub channels: Vec<JumpChannel>,
}

impl ChannelSpec {
    pub fn new(channels: Vec<JumpChannel>) -> Self {
        Self { channels }
    }

    /// Single pure-dephasing channel `A = sigma_z / sqrt(2)` on one qubit.
    ///
    /// With this normalization the rate `gamma(t) = 2 chi'(t)` makes the
    /// Lindblad dephasing reproduce the coherence decay `f = exp(-2 chi)`
    /// exactly, so the decomposed flow matches the closed form.
    pub fn dephasing_z(on: Subsystem, rate: f64) -> Self {
        let op = HermitianOperator::sigma_z(on).matrix()
            * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(vec![JumpChannel {
            label: match on {
                Subsystem::System => "z_s".into(),
                Subsystem::Ancilla => "z_a".into(),
            },
            operator: op,
            rate,
        }])
    }

    /// Matrix-unit channels `A_ij = |e_i><e_j|` in the supplied orthonormal
    /// basis (columns), one per `(i, j, rate)` entry.
    pub fn matrix_units(basis: &CMatrix, rates: &[(usize, usize, f64)]) -> Self {
        let dim = basis.nrows();
        let channels = rates
            .iter()
            .map(|&(i, j, rate)| {
                let mut op = CMatrix::zeros(dim, dim);
                let ei = basis.column(i);
                let ej = basis.column(j);
                for r in 0..dim {
                    for c in 0..dim {
                        op[(r, c)] = ei[r] * ej[c].conj();
                    }
                }
                JumpChannel {
                    label: format!("a_{i}{j}"),
                    operator: op,
                    rate,
                }
            })
            .collect();
        Self::new(channels)
    }
}

/// Per-channel QFI flows `F_ij = gamma_ij J_ij` with
/// `J_ij = -Tr(rho [L, A_ij]^dag [L, A_ij])`.
///
/// Each `J_ij` is nonpositive (the trace form is a Gram term), so positive
/// flow through a channel requires a negative instantaneous rate.
pub fn channel_flow_decomposition(
    rho: &DensityMatrix,
    l: &HermitianOperator,
    channels: &ChannelSpec,
) -> Result<Vec<f64>> {
    if rho.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: l.dim(),
        });
    }
    channels
        .channels
        .iter()
        .map(|ch| {
            if ch.operator.nrows() != rho.dim() || ch.operator.ncols() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rho.dim(),
                    got: ch.operator.nrows(),
                });
            }
            let m = commutator(l.matrix(), &ch.operator);
            let j = -(rho.matrix() * m.adjoint() * &m).trace().re;
            Ok(ch.rate * j)
        })
        .collect()
}

/// Scalar measures plus the curves they integrate.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    /// Accumulated QMI rise (bits).
    pub n0: f64,
    /// Summed trace-distance rises.
    pub n_blp: f64,
    /// Accumulated coherence log-growth.
    pub n_rhp: f64,
    pub curves: MeasureCurves,
}

/// Per-grid-point diagnostics behind the scalar measures.
#[derive(Debug, Clone)]
pub struct MeasureCurves {
    pub times: Vec<f64>,
    pub qmi: Vec<f64>,
    pub qmi_rate: Vec<f64>,
    /// Trace distance of the canonical dephasing pair (= coherence norm).
    pub trace_distance: Vec<f64>,
    /// Divisibility witness `max(0, f'/f)`.
    pub rhp_witness: Vec<f64>,
    pub qfi: Vec<f64>,
    pub qfi_flow: Vec<f64>,
}

/// Evaluate every measure on one trajectory.
pub fn measure_report(traj: &Trajectory, cfg: &MeasureConfig) -> Result<MeasureReport> {
    let hi = horizon_index(traj, cfg)?;
    let n0 = n0_measure(traj, cfg)?;
    let n_blp = blp_measure(traj, cfg)?;
    let n_rhp = rhp_measure(traj, cfg)?;

    let gen = HermitianOperator::phase_generator();
    let times = traj.times[..=hi].to_vec();
    let qmi_vals = traj.rho[..=hi]
        .iter()
        .map(qmi)
        .collect::<Result<Vec<_>>>()?;
    let rate = (0..=hi)
        .map(|k| qmi_rate(traj, k))
        .collect::<Result<Vec<_>>>()?;
    let q = traj.rho[..=hi]
        .iter()
        .map(|r| qfi(r, &gen))
        .collect::<Result<Vec<_>>>()?;
    let flow = qfi_flow(&q, traj.dt(), cfg)?;
    let dt = traj.dt();
    let rhp_witness = (0..=hi)
        .map(|k| {
            let dlnf = if k == 0 {
                (traj.f[1].ln() - traj.f[0].ln()) / dt
            } else if k == hi {
                (traj.f[k].ln() - traj.f[k - 1].ln()) / dt
            } else {
                (traj.f[k + 1].ln() - traj.f[k - 1].ln()) / (2.0 * dt)
            };
            dlnf.max(0.0)
        })
        .collect();

    Ok(MeasureReport {
        n0,
        n_blp,
        n_rhp,
        curves: MeasureCurves {
            times,
            qmi: qmi_vals,
            qmi_rate: rate,
            trace_distance: traj.f[..=hi].to_vec(),
            rhp_witness,
            qfi: q,
            qfi_flow: flow,
        },
    })
}
