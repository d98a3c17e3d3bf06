//! Dense linear algebra for one- and two-qubit states.
//!
//! Everything here is exact 2x2 / 4x4 complex matrix work: validated
//! density matrices, Hermitian eigendecomposition, partial trace, von
//! Neumann entropy (in bits) and trace distance. All operations are pure
//! functions on value types and safe to call concurrently.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for states and operators.
pub type CMatrix = DMatrix<Complex64>;

/// Max allowed `|m - m^dag|` entry for Hermitian inputs.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Max allowed deviation of `Tr(rho)` from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated before a state is rejected.
pub const PSD_TOL: f64 = -1e-10;

/// Which qubit of the two-qubit register an operation refers to.
///
/// Basis ordering is `|00>, |01>, |10>, |11>` with the system qubit first,
/// so the system index is the high bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Ancilla,
}

fn max_hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let dev = max_hermiticity_deviation(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    Ok(())
}

/// Replace `m` by `(m + m^dag) / 2`, removing rounding-level asymmetry.
fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// A validated density matrix: Hermitian, unit trace, positive
/// semidefinite (within the module tolerances), of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let dim = mat.nrows();
        if (dim != 2 && dim != 4) || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: dim,
            });
        }
        check_hermitian(&mat)?;
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        let mat = hermitize(&mat);
        let eigs = nalgebra::SymmetricEigen::new(mat.clone()).eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Maximally mixed state `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: dim,
            });
        }
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self::new(m)
    }

    /// Projector onto a (normalized) ket.
    pub fn pure_state(ket: &[Complex64]) -> Result<Self> {
        let dim = ket.len();
        let norm2: f64 = ket.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTrace { trace: norm2 });
        }
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        Self::new(m)
    }

    /// Tensor product of two states.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        Self::new(a.mat.kronecker(&b.mat))
    }
}

/// Two-qubit Bell-diagonal dephased state
/// `(|00><00| + |11><11| + g|00><11| + g*|11><00|) / 2`
/// with `g = f exp(-i phase)`.
///
/// `f = 1` is the pure Bell state `(|00> + |11>)/sqrt(2)`, `f = 0` the fully
/// dephased classical mixture. Nonvanishing eigenvalues are `(1 +- f)/2`.
pub fn bell_dephased_state(f: f64, phase: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) || !f.is_finite() {
        return Err(Error::InvalidParameter {
            name: "f",
            value: f,
            constraint: "coherence norm must lie in [0, 1]",
        });
    }
    let g = Complex64::from_polar(f, -phase);
    let half = Complex64::new(0.5, 0.0);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = half;
    m[(3, 3)] = half;
    m[(0, 3)] = g * half;
    m[(3, 0)] = g.conj() * half;
    DensityMatrix::new(m)
}

/// Single-qubit dephased superposition `(I +- f sigma_x)/2`, the canonical
/// state pair whose trace distance under pure dephasing equals `f`.
pub fn dephased_pair(f: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter {
            name: "f",
            value: f,
            constraint: "coherence norm must lie in [0, 1]",
        });
    }
    let half = Complex64::new(0.5, 0.0);
    let c = Complex64::new(0.5 * f, 0.0);
    let mut plus = CMatrix::zeros(2, 2);
    plus[(0, 0)] = half;
    plus[(1, 1)] = half;
    plus[(0, 1)] = c;
    plus[(1, 0)] = c;
    let mut minus = plus.clone();
    minus[(0, 1)] = -c;
    minus[(1, 0)] = -c;
    Ok((DensityMatrix::new(plus)?, DensityMatrix::new(minus)?))
}

/// Eigendecomposition of a density matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Matching orthonormal eigenvectors as matrix columns.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_i P_i |psi_i><psi_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (k, &p) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += Complex64::new(p, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        m
    }
}

/// Diagonalize `rho = sum_i P_i |psi_i><psi_i|`.
///
/// Eigenvectors are defined only up to phase (and mixing inside degenerate
/// subspaces); downstream quantities must be basis-invariant.
pub fn eigh(rho: &DensityMatrix) -> Spectrum {
    eigh_raw(rho.matrix())
}

/// Eigendecomposition of an arbitrary Hermitian matrix (hermitized first).
pub(crate) fn eigh_raw(m: &CMatrix) -> Spectrum {
    let se = nalgebra::SymmetricEigen::new(hermitize(m));
    let dim = m.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        eigenvectors.set_column(col, &se.eigenvectors.column(k));
    }
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Trace out one qubit of a two-qubit state.
///
/// `keep = System` returns the first (high-bit) qubit's reduced state.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    let mut r = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += match keep {
                    Subsystem::System => m[(2 * i + k, 2 * j + k)],
                    Subsystem::Ancilla => m[(2 * k + i, 2 * k + j)],
                };
            }
            r[(i, j)] = acc;
        }
    }
    DensityMatrix::new(r)
}

/// Clamp a numerically-noisy eigenvalue of a valid state onto `[0, 1]`.
///
/// Values in `[PSD_TOL, 0)` are rounding noise from the eigensolver and
/// are mapped to zero so they cannot poison `p log p`.
#[inline]
pub(crate) fn clamp_eigenvalue(p: f64) -> f64 {
    debug_assert!(p >= PSD_TOL, "eigenvalue {p} below PSD tolerance");
    if p < 0.0 {
        0.0
    } else {
        p
    }
}

/// Von Neumann entropy `-Tr(rho log2 rho)` in bits, with `0 log 0 := 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    eigh(rho)
        .eigenvalues
        .iter()
        .map(|&p| {
            let p = clamp_eigenvalue(p);
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// Trace distance `0.5 * sum_i |lambda_i(rho - sigma)|`, in `[0, 1]`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let spec = eigh_raw(&diff);
    Ok(0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// A validated Hermitian operator (observable, generator, SLD, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        check_hermitian(&mat)?;
        Ok(Self {
            mat: hermitize(&mat),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    /// `sigma_z` acting on one qubit of the two-qubit register.
    pub fn sigma_z(on: Subsystem) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        for idx in 0..4 {
            let bit = match on {
                Subsystem::System => idx >> 1,
                Subsystem::Ancilla => idx & 1,
            };
            let sign = if bit == 0 { 1.0 } else { -1.0 };
            m[(idx, idx)] = Complex64::new(sign, 0.0);
        }
        Self { mat: m }
    }

    /// The phase generator `(sigma_z_s + sigma_z_a) / 2` used for all QFI
    /// quantities: eigenvalue +1 on `|00>`, -1 on `|11>`, 0 elsewhere.
    pub fn phase_generator() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(3, 3)] = Complex64::new(-1.0, 0.0);
        Self { mat: m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{binary_entropy, TestRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_state_at_full_coherence_is_pure() {
        let rho = bell_dephased_state(1.0, 0.0).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let ket = [
            c(inv_sqrt2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(inv_sqrt2, 0.0),
        ];
        let expected = DensityMatrix::pure_state(&ket).unwrap();
        let dev = (rho.matrix() - expected.matrix()).map(|z| z.norm()).max();
        assert!(dev < 1e-15);
        let purity = (rho.matrix() * rho.matrix()).trace().re;
        assert!((purity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bell_state_at_zero_coherence_is_classical_mixture() {
        let rho = bell_dephased_state(0.0, 1.234).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && (i == 0 || i == 3) {
                    0.5
                } else {
                    0.0
                };
                assert!((rho.entry(i, j) - c(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_state_half_coherence_block_spectrum() {
        let rho = bell_dephased_state(0.5, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((rho.entry(0, 3).norm() - 0.25).abs() < 1e-15);
        let spec = eigh(&rho);
        // Coherence block eigenvalues (1 +- f)/2; the other two vanish.
        let expected = [0.75, 0.25, 0.0, 0.0];
        for (got, want) in spec.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn bell_state_rejects_out_of_range_coherence() {
        assert!(bell_dephased_state(-0.1, 0.0).is_err());
        assert!(bell_dephased_state(1.1, 0.0).is_err());
        assert!(bell_dephased_state(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn density_matrix_rejects_bad_inputs() {
        // Non-Hermitian.
        let mut m = CMatrix::identity(4, 4) * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        // Wrong trace.
        let m = CMatrix::identity(4, 4) * c(0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::InvalidTrace { .. })
        ));
        // Not positive semidefinite.
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.5, 0.0);
        m[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotPositive { .. })
        ));
        // Unsupported dimension.
        let m = CMatrix::identity(3, 3) * c(1.0 / 3.0, 0.0);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigh_of_maximally_mixed_state() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let spec = eigh(&rho);
        for p in &spec.eigenvalues {
            assert!((p - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_of_dephased_bell_state() {
        let rho = bell_dephased_state(0.6, 0.0).unwrap();
        let spec = eigh(&rho);
        let expected = [0.8, 0.2, 0.0, 0.0];
        for (got, want) in spec.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs_random_states() {
        let mut rng = TestRng::new(0x51ec);
        for _ in 0..1000 {
            let rho = rng.random_density(4);
            let spec = eigh(&rho);
            // Reconstruction.
            let resid = (spec.reconstruct() - rho.matrix()).map(|z| z.norm()).max();
            assert!(resid < 1e-10, "residual {resid}");
            // Descending order and near-unit total weight.
            let sum: f64 = spec.eigenvalues.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for w in spec.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
            // Orthonormality: Gram matrix = identity.
            let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
            let dev = (gram - CMatrix::identity(4, 4)).map(|z| z.norm()).max();
            assert!(dev < 1e-10);
        }
    }

    #[test]
    fn eigh_recovers_planted_spectrum() {
        // Independent factorization: build rho from a known spectrum and a
        // random orthonormal basis, then check eigh returns that spectrum.
        let mut rng = TestRng::new(0xfac7);
        for _ in 0..200 {
            let (probs, basis) = rng.random_spectral_factorization(4);
            let mut m = CMatrix::zeros(4, 4);
            for (k, &p) in probs.iter().enumerate() {
                let v = basis.column(k);
                for i in 0..4 {
                    for j in 0..4 {
                        m[(i, j)] += c(p, 0.0) * v[i] * v[j].conj();
                    }
                }
            }
            let rho = DensityMatrix::new(m).unwrap();
            let spec = eigh(&rho);
            let mut sorted = probs.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            for (got, want) in spec.eigenvalues.iter().zip(&sorted) {
                assert!((got - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_family_is_maximally_mixed() {
        for f in [0.0, 0.3, 0.7, 1.0] {
            let rho = bell_dephased_state(f, 0.4).unwrap();
            for keep in [Subsystem::System, Subsystem::Ancilla] {
                let red = partial_trace(&rho, keep).unwrap();
                let dev = (red.matrix() - DensityMatrix::maximally_mixed(2).unwrap().matrix())
                    .map(|z| z.norm())
                    .max();
                assert!(dev < 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_state_returns_factor() {
        let mut rng = TestRng::new(0x0a0b);
        let a = rng.random_density(2);
        let b = rng.random_density(2);
        let rho = DensityMatrix::product(&a, &b).unwrap();
        let got_a = partial_trace(&rho, Subsystem::System).unwrap();
        let got_b = partial_trace(&rho, Subsystem::Ancilla).unwrap();
        assert!((got_a.matrix() - a.matrix()).map(|z| z.norm()).max() < 1e-12);
        assert!((got_b.matrix() - b.matrix()).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_and_rejects_qubits() {
        let mut rng = TestRng::new(0x77aa);
        for _ in 0..100 {
            let rho = rng.random_density(4);
            let red = partial_trace(&rho, Subsystem::Ancilla).unwrap();
            assert!((red.matrix().trace().re - 1.0).abs() < 1e-12);
        }
        let q = rng.random_density(2);
        assert!(partial_trace(&q, Subsystem::System).is_err());
    }

    #[test]
    fn entropy_of_reference_states() {
        let pure = bell_dephased_state(1.0, 0.0).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-10);

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-14);

        // S(rho) at f = 0.5 is the binary entropy of (1 + f)/2 = 0.75.
        let rho = bell_dephased_state(0.5, 0.0).unwrap();
        let expected = binary_entropy(0.75);
        assert!((expected - 0.8112781244591328).abs() < 1e-15);
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_subadditivity_on_random_states() {
        let mut rng = TestRng::new(0x5ab_add);
        for _ in 0..200 {
            let rho = rng.random_density(4);
            let s_sa = von_neumann_entropy(&rho);
            let s_s = von_neumann_entropy(&partial_trace(&rho, Subsystem::System).unwrap());
            let s_a = von_neumann_entropy(&partial_trace(&rho, Subsystem::Ancilla).unwrap());
            assert!(s_sa <= s_s + s_a + 1e-9);
        }
    }

    #[test]
    fn trace_distance_reference_values() {
        let rho = bell_dephased_state(0.8, 0.0).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-14);

        let zero = DensityMatrix::pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let one = DensityMatrix::pure_state(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);

        for f in [0.05, 0.4, 0.93] {
            let (plus, minus) = dephased_pair(f).unwrap();
            assert!((trace_distance(&plus, &minus).unwrap() - f).abs() < 1e-13);
        }

        let q = DensityMatrix::maximally_mixed(2).unwrap();
        let r = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(trace_distance(&q, &r).is_err());
    }

    #[test]
    fn trace_distance_is_symmetric_and_triangular() {
        let mut rng = TestRng::new(0x771a);
        for _ in 0..200 {
            let a = rng.random_density(4);
            let b = rng.random_density(4);
            let cst = rng.random_density(4);
            let dab = trace_distance(&a, &b).unwrap();
            let dba = trace_distance(&b, &a).unwrap();
            assert!((dab - dba).abs() < 1e-12);
            let dac = trace_distance(&a, &cst).unwrap();
            let dcb = trace_distance(&cst, &b).unwrap();
            assert!(dab <= dac + dcb + 1e-9);
            assert!((0.0..=1.0 + 1e-12).contains(&dab));
        }
    }

    #[test]
    fn hermitian_operator_constructors() {
        let zs = HermitianOperator::sigma_z(Subsystem::System);
        let za = HermitianOperator::sigma_z(Subsystem::Ancilla);
        let gen = HermitianOperator::phase_generator();
        let sum = (zs.matrix() + za.matrix()) * c(0.5, 0.0);
        assert!((gen.matrix() - sum).map(|z| z.norm()).max() < 1e-15);

        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(HermitianOperator::new(bad).is_err());
    }
}
