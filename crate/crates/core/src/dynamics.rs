//! Two-qubit dephasing trajectories.
//!
//! The register starts in the Bell state `(|00> + |11>)/sqrt(2)`; random
//! sinusoidal fields couple through `sigma_z` on the system qubit, the
//! ancilla, or both. Per realization the `|00><11|` coherence picks up the
//! phase `exp(-2i int_0^t beta)` (the `sigma_z` eigenvalues differ by 2
//! across that coherence), so three routes to the coherence norm `f(t)`
//! coexist:
//!
//! * `analytic`: `f = exp(-2 chi)` with the closed-form partial sum
//!   `chi(t) = lambda gamma omega0 sum_j coth(omega_j / 2 theta)
//!   / (omega_j (omega_j^2 + gamma^2)) sin^2(omega_j t / 2)`,
//! * `bessel`: the exact large-ensemble limit
//!   `prod_j J0(4 (c_j/omega_j) sin(omega_j t / 2))`, which averages the
//!   per-mode phase exactly and serves as the oracle for the Monte Carlo,
//! * `monte_carlo`: the finite-ensemble average of `exp(-2i int beta)`
//!   (complex mean first, modulus second).
//!
//! Realizations are evaluated with a parallel map and reduced in fixed
//! realization order, so results are bit-identical for any worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{
    integrated_field_series, mode_amplitudes, sample_realization, ModeAmplitudes, SpectralModel,
};
use crate::quantum::{bell_dephased_state, DensityMatrix, Subsystem};
use crate::rng::derive_seed;

/// Uniform time grid `t_k = k dt`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn uniform(dt: f64, steps: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                constraint: "grid spacing must be finite and > 0",
            });
        }
        Ok(Self { dt, steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// Ensemble size, master seed and evaluation grid for Monte Carlo runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub realizations: usize,
    pub master_seed: u64,
    pub grid: TimeGrid,
}

/// Which qubits see noise, with their bath models and optional Zeeman
/// splittings (rad/us; zero by default, i.e. the interaction picture).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub system: Option<SpectralModel>,
    pub ancilla: Option<SpectralModel>,
    pub omega_s: f64,
    pub omega_a: f64,
}

impl ChannelConfig {
    pub fn new(system: Option<SpectralModel>, ancilla: Option<SpectralModel>) -> Self {
        Self {
            system,
            ancilla,
            omega_s: 0.0,
            omega_a: 0.0,
        }
    }

    pub fn system_only(model: SpectralModel) -> Self {
        Self::new(Some(model), None)
    }

    pub fn ancilla_only(model: SpectralModel) -> Self {
        Self::new(None, Some(model))
    }

    pub fn both(system: SpectralModel, ancilla: SpectralModel) -> Self {
        Self::new(Some(system), Some(ancilla))
    }

    pub fn with_zeeman(mut self, omega_s: f64, omega_a: f64) -> Self {
        self.omega_s = omega_s;
        self.omega_a = omega_a;
        self
    }

    /// Noisy channels as `(stream tag, model)` pairs; the tag keys the
    /// per-channel random streams.
    fn active(&self) -> Vec<(u64, &SpectralModel)> {
        let mut v = Vec::new();
        if let Some(m) = &self.system {
            v.push((Subsystem::System as u64, m));
        }
        if let Some(m) = &self.ancilla {
            v.push((Subsystem::Ancilla as u64, m));
        }
        v
    }
}

/// How a trajectory's coherence norm was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Analytic,
    Bessel,
    MonteCarlo,
}

/// A evolved trajectory on a uniform grid: per-point coherence norm `f`
/// (with standard error for Monte Carlo data), decoherence factor `chi`
/// and its time derivative, and the full density matrix.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub f: Vec<f64>,
    pub f_stderr: Vec<f64>,
    pub chi: Vec<f64>,
    pub chi_dot: Vec<f64>,
    pub rho: Vec<DensityMatrix>,
    pub kind: TrajectoryKind,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// Build a trajectory directly from a coherence series (no noise model).
    ///
    /// `chi` is inferred as `-ln(f)/2` and `chi_dot` by central differences;
    /// states are Bell-dephased with zero deterministic phase.
    pub fn from_coherence(times: Vec<f64>, f: Vec<f64>, kind: TrajectoryKind) -> Result<Self> {
        if times.len() != f.len() {
            return Err(Error::SeriesTooShort {
                min: times.len(),
                got: f.len(),
            });
        }
        let chi: Vec<f64> = f
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    -x.ln() / 2.0
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let mut chi_dot = vec![0.0; chi.len()];
        if chi.len() >= 2 {
            for k in 0..chi.len() {
                let (a, b, span) = if k == 0 {
                    (chi[0], chi[1], times[1] - times[0])
                } else if k == chi.len() - 1 {
                    (chi[k - 1], chi[k], times[k] - times[k - 1])
                } else {
                    (chi[k - 1], chi[k + 1], times[k + 1] - times[k - 1])
                };
                chi_dot[k] = if a.is_finite() && b.is_finite() {
                    (b - a) / span
                } else {
                    0.0
                };
            }
        }
        let rho = f
            .iter()
            .map(|&x| bell_dephased_state(x, 0.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            f_stderr: vec![0.0; times.len()],
            chi,
            chi_dot,
            rho,
            kind,
            times,
            f,
        })
    }
}

/// Per-mode weights of the decoherence-factor partial sum
/// `chi(t) = sum_j w_j sin^2(omega_j t / 2)`.
///
/// For Drude-Lorentz this is the literal closed form
/// `w_j = lambda gamma omega0 coth(omega_j / 2 theta) / (omega_j (omega_j^2 + gamma^2))`;
/// for custom modes `w_j = 2 (c_j / omega_j)^2`. The two routes agree to
/// rounding by the amplitude convention in [`crate::noise`].
fn chi_weights(model: &SpectralModel) -> (Vec<f64>, Vec<f64>, Option<f64>) {
    match model {
        SpectralModel::DrudeLorentz(dl) => {
            let mut omegas = Vec::with_capacity(dl.modes);
            let mut weights = Vec::with_capacity(dl.modes);
            for j in 1..=dl.modes {
                let omega = j as f64 * dl.omega0;
                let w =
                    dl.lambda * dl.gamma * dl.omega0 * crate::noise::coth(omega / (2.0 * dl.theta))
                        / (omega * (omega * omega + dl.gamma * dl.gamma));
                omegas.push(omega);
                weights.push(w);
            }
            (omegas, weights, Some(dl.omega0))
        }
        SpectralModel::Custom(_) => {
            let amps = mode_amplitudes(model);
            let omegas = amps.omegas().to_vec();
            let weights = amps
                .omegas()
                .iter()
                .zip(amps.amplitudes())
                .map(|(&w, &c)| 2.0 * (c / w) * (c / w))
                .collect();
            (omegas, weights, None)
        }
    }
}

/// Decoherence factor `chi(t)`: the closed-form partial sum over all modes.
pub fn analytic_chi(model: &SpectralModel, t: f64) -> f64 {
    let (omegas, weights, _) = chi_weights(model);
    omegas
        .iter()
        .zip(&weights)
        .map(|(&w, &wt)| {
            let s = (w * t / 2.0).sin();
            wt * s * s
        })
        .sum()
}

/// Term-wise derivative `chi'(t) = sum_j w_j (omega_j / 2) sin(omega_j t)`.
pub fn analytic_chi_derivative(model: &SpectralModel, t: f64) -> f64 {
    let (omegas, weights, _) = chi_weights(model);
    omegas
        .iter()
        .zip(&weights)
        .map(|(&w, &wt)| wt * (w / 2.0) * (w * t).sin())
        .sum()
}

/// `chi` and `chi'` on a whole grid in one pass per time point.
///
/// On the Drude-Lorentz comb, `sin^2(j x / 2)` and `sin(j x)` are read off
/// a `z^j` phasor recurrence instead of per-mode trig calls.
pub fn chi_series(model: &SpectralModel, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (omegas, weights, comb) = chi_weights(model);
    let n = omegas.len();
    match comb {
        Some(omega0) => {
            let total: f64 = weights.iter().sum();
            let mut chi = Vec::with_capacity(times.len());
            let mut chi_dot = Vec::with_capacity(times.len());
            for &t in times {
                let (zs, zc) = (omega0 * t).sin_cos();
                let mut pre = zc;
                let mut pim = zs;
                let mut cos_acc = 0.0;
                let mut dot_acc = 0.0;
                for j in 0..n {
                    cos_acc += weights[j] * pre;
                    dot_acc += weights[j] * omegas[j] * pim;
                    let nre = pre * zc - pim * zs;
                    pim = pre * zs + pim * zc;
                    pre = nre;
                }
                // sin^2(x/2) = (1 - cos x)/2
                chi.push(0.5 * (total - cos_acc));
                chi_dot.push(0.5 * dot_acc);
            }
            (chi, chi_dot)
        }
        None => {
            let chi = times
                .iter()
                .map(|&t| {
                    omegas
                        .iter()
                        .zip(&weights)
                        .map(|(&w, &wt)| {
                            let s = (w * t / 2.0).sin();
                            wt * s * s
                        })
                        .sum()
                })
                .collect();
            let chi_dot = times
                .iter()
                .map(|&t| {
                    omegas
                        .iter()
                        .zip(&weights)
                        .map(|(&w, &wt)| wt * (w / 2.0) * (w * t).sin())
                        .sum()
                })
                .collect();
            (chi, chi_dot)
        }
    }
}

/// Exact large-ensemble coherence norm
/// `prod_j J0(4 (c_j / omega_j) sin(omega_j t / 2))`.
///
/// This is the phase average of `exp(-2i int beta)` done mode by mode, with
/// no Gaussian approximation; it differs from `exp(-2 chi)` by at most
/// `sum_j x_j^4 / 16` in the small-argument regime.
pub fn bessel_f(model: &SpectralModel, t: f64) -> f64 {
    let amps = mode_amplitudes(model);
    amps.omegas()
        .iter()
        .zip(amps.amplitudes())
        .map(|(&w, &c)| libm::j0(4.0 * (c / w) * (w * t / 2.0).sin()))
        .product()
}

/// [`bessel_f`] on a whole grid, with the comb phasor recurrence.
pub fn bessel_series(model: &SpectralModel, times: &[f64]) -> Vec<f64> {
    let amps = mode_amplitudes(model);
    let n = amps.len();
    match amps.comb_base() {
        Some(omega0) => times
            .iter()
            .map(|&t| {
                let (zs, zc) = (omega0 * t / 2.0).sin_cos();
                let mut pre = zc;
                let mut pim = zs;
                let mut prod = 1.0;
                for j in 0..n {
                    let x = 4.0 * (amps.amplitudes()[j] / amps.omegas()[j]) * pim;
                    prod *= libm::j0(x);
                    let nre = pre * zc - pim * zs;
                    pim = pre * zs + pim * zc;
                    pre = nre;
                }
                prod
            })
            .collect(),
        None => times.iter().map(|&t| bessel_f(model, t)).collect(),
    }
}

/// Ensemble mean coherence with standard errors for an arbitrary set of
/// noisy channels. Complex amplitudes are averaged first and the modulus
/// taken second; the standard error comes from the complex sample
/// variance `s^2 = sum |z_n - mean|^2 / (N - 1)` as `sqrt(s^2 / N)`.
fn mc_ensemble(
    channels: &[(u64, &SpectralModel)],
    ens: &EnsembleConfig,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ens.realizations;
    if n == 0 {
        return Err(Error::EmptyEnsemble { min: 1, got: 0 });
    }
    let prepared: Vec<(u64, &SpectralModel, ModeAmplitudes)> = channels
        .iter()
        .map(|&(tag, model)| (tag, model, mode_amplitudes(model)))
        .collect();

    // Parallel map over realizations; each row depends only on
    // (master_seed, channel tag, realization index).
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut phase = vec![0.0f64; times.len()];
            for (tag, model, amps) in &prepared {
                let seed = derive_seed(ens.master_seed, *tag, idx as u64);
                let r = sample_realization(model, seed);
                let phi = integrated_field_series(&r, amps, times);
                for (acc, p) in phase.iter_mut().zip(phi) {
                    *acc += p;
                }
            }
            phase
                .iter()
                .map(|&p| Complex64::from_polar(1.0, -2.0 * p))
                .collect()
        })
        .collect();

    // Reduce in fixed realization order: bit-identical for any worker count.
    let k = times.len();
    let mut mean = vec![Complex64::new(0.0, 0.0); k];
    for row in &rows {
        for (m, z) in mean.iter_mut().zip(row) {
            *m += z;
        }
    }
    let inv_n = 1.0 / n as f64;
    for m in mean.iter_mut() {
        *m *= inv_n;
    }

    let mut stderr = vec![0.0f64; k];
    if n >= 2 {
        for row in &rows {
            for (s, (z, m)) in stderr.iter_mut().zip(row.iter().zip(&mean)) {
                *s += (z - m).norm_sqr();
            }
        }
        for s in stderr.iter_mut() {
            *s = (*s / (n - 1) as f64 * inv_n).sqrt();
        }
    }

    let f = mean
        .iter()
        .map(|m| {
            let norm = m.norm();
            debug_assert!(norm <= 1.0 + 1e-12, "ensemble mean modulus {norm} > 1");
            norm.min(1.0)
        })
        .collect();
    Ok((f, stderr))
}

/// Monte Carlo coherence of a single noisy channel: the ensemble mean of
/// `exp(-2i int beta)` and its pointwise standard error.
pub fn mc_coherence(model: &SpectralModel, ens: &EnsembleConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let times = ens.grid.times();
    mc_ensemble(&[(Subsystem::System as u64, model)], ens, &times)
}

/// Evolve the Bell probe state under the configured channels.
///
/// Per grid point, `rho(t_k)` is the dephased Bell state with coherence
/// norm `f(t_k)` and deterministic phase `(omega_s + omega_a) t_k`. With
/// both channels noisy the coherence is the product of the per-channel
/// coherences (independent phase draws per channel).
pub fn evolve(
    config: &ChannelConfig,
    ens: &EnsembleConfig,
    kind: TrajectoryKind,
) -> Result<Trajectory> {
    let times = ens.grid.times();
    let channels = config.active();

    let mut chi = vec![0.0f64; times.len()];
    let mut chi_dot = vec![0.0f64; times.len()];
    for (_, model) in &channels {
        let (c, cd) = chi_series(model, &times);
        for k in 0..times.len() {
            chi[k] += c[k];
            chi_dot[k] += cd[k];
        }
    }

    let (f, f_stderr) = match kind {
        TrajectoryKind::Analytic => {
            let f = chi.iter().map(|&x| (-2.0 * x).exp()).collect();
            (f, vec![0.0; times.len()])
        }
        TrajectoryKind::Bessel => {
            let mut f = vec![1.0f64; times.len()];
            for (_, model) in &channels {
                let b = bessel_series(model, &times);
                for (acc, v) in f.iter_mut().zip(b) {
                    *acc *= v;
                }
            }
            (f, vec![0.0; times.len()])
        }
        TrajectoryKind::MonteCarlo => {
            if channels.is_empty() {
                (vec![1.0; times.len()], vec![0.0; times.len()])
            } else {
                mc_ensemble(&channels, ens, &times)?
            }
        }
    };

    let phase_rate = config.omega_s + config.omega_a;
    let rho = times
        .iter()
        .zip(&f)
        .map(|(&t, &fk)| bell_dephased_state(fk.abs().min(1.0), phase_rate * t))
        .collect::<Result<Vec<_>>>()?;

    Ok(Trajectory {
        times,
        f,
        f_stderr,
        chi,
        chi_dot,
        rho,
        kind,
    })
}
