//! Small shared linear-algebra helpers: Hermitian checks, complex Gaussian
//! sampling, and a reusable Cholesky factorization of a covariance matrix.

use nalgebra::{Cholesky, Dyn};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{RadarError, Result};
use crate::{C64, CMatrix, CVector};

/// Jitter added to the diagonal before factorizing a covariance matrix.
pub const COV_JITTER: f64 = 1e-12;

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            let d = (m[(a, b)] - m[(b, a)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Standard circularly-symmetric complex Gaussian vector, unit variance per
/// entry (real and imaginary parts each N(0, 1/2)).
pub fn standard_complex_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// One draw of a circularly-symmetric complex Gaussian scalar with the given
/// variance `E{|x|^2}`.
pub fn complex_gaussian_scalar<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * scale, im * scale)
}

/// Cholesky factor of a Hermitian PSD matrix, reused across solves.
///
/// If the plain factorization fails, it is retried on `M + jitter * I`;
/// the jitter keeps numerically semidefinite inputs factorizable without
/// perturbing well-conditioned ones.
pub struct CovarianceFactor {
    chol: Cholesky<C64, Dyn>,
    dim: usize,
}

impl CovarianceFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(RadarError::InvalidArgument(format!(
                "covariance must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermitian_defect(m);
        if defect > 1e-9 * (1.0 + m.norm()) {
            return Err(RadarError::InvalidArgument(format!(
                "covariance is not Hermitian (defect {defect:.3e})"
            )));
        }
        let n = m.nrows();
        let chol = Cholesky::new(m.clone()).or_else(|| {
            let mut jittered = m.clone();
            for i in 0..n {
                jittered[(i, i)] += C64::new(COV_JITTER, 0.0);
            }
            Cholesky::new(jittered)
        });
        let chol = chol.ok_or_else(|| {
            RadarError::Numerical("covariance is not positive semidefinite".into())
        })?;
        Ok(Self { chol, dim: n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `R x = v`.
    pub fn solve_vec(&self, v: &CVector) -> CVector {
        self.chol.solve(v)
    }

    /// Dense `R^{-1}`.
    pub fn inverse(&self) -> CMatrix {
        self.chol.inverse()
    }

    /// `trace(R^{-1})`.
    pub fn inverse_trace(&self) -> f64 {
        self.inverse().diagonal().iter().map(|c| c.re).sum()
    }

    /// Lower-triangular factor `L` with `L L^H = R` (up to the fallback
    /// jitter); used to draw correlated complex Gaussian vectors.
    pub fn lower(&self) -> CMatrix {
        self.chol.l()
    }

    /// One draw of `CN(mean, R)`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &CVector, rng: &mut R) -> CVector {
        mean + self.lower() * standard_complex_gaussian(self.dim, rng)
    }
}
