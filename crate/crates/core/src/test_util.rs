//! Shared helpers for unit tests: a deterministic RNG, random state
//! factories, and small independent numeric oracles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::quantum::{CMatrix, DensityMatrix};
use crate::rng::keyed_unit;

/// Deterministic counter-based RNG for tests.
pub struct TestRng {
    seed: u64,
    counter: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn unit(&mut self) -> f64 {
        let u = keyed_unit(self.seed, self.counter);
        self.counter += 1;
        u
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = (1.0 - self.unit()).max(f64::MIN_POSITIVE);
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian())
    }

    /// Random full-rank density matrix `G G^dag / Tr(G G^dag)`.
    pub fn random_density(&mut self, dim: usize) -> DensityMatrix {
        let g = DMatrix::from_fn(dim, dim, |_, _| self.complex_gaussian());
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m / Complex64::new(tr, 0.0)).expect("Gram matrix is a valid state")
    }

    /// A random probability vector and a random orthonormal basis
    /// (Gram-Schmidt on Gaussian vectors), independent of any
    /// eigendecomposition routine.
    pub fn random_spectral_factorization(&mut self, dim: usize) -> (Vec<f64>, CMatrix) {
        let mut probs: Vec<f64> = (0..dim).map(|_| self.unit() + 1e-3).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);

        let mut basis = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut v: Vec<Complex64> = (0..dim).map(|_| self.complex_gaussian()).collect();
            for prev in 0..k {
                let col = basis.column(prev);
                let overlap: Complex64 = (0..dim).map(|i| col[i].conj() * v[i]).sum();
                for i in 0..dim {
                    v[i] -= overlap * col[i];
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for (i, z) in v.iter().enumerate() {
                basis[(i, k)] = z / norm;
            }
        }
        (probs, basis)
    }
}

/// Binary entropy `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

/// Adaptive Simpson quadrature, used as an independent integration oracle.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)), fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, _) = simpson(f, a, m);
        let (right, _) = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let (whole, _) = simpson(f, a, b);
    recurse(f, a, b, whole, tol, 40)
}
