//! Small dense complex linear-algebra helpers shared by the solver modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(A + A^H) / 2`
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().sum()
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Squared Frobenius norm, i.e. `Tr(A A^H)`.
pub fn power(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn check_dims(
    context: &'static str,
    m: &CMat,
    expected: (usize, usize),
) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: m.shape(),
        });
    }
    Ok(())
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky, symmetrized.
pub fn inverse_hpd(a: &CMat, what: &'static str) -> Result<CMat> {
    let chol = hermitian_part(a).cholesky().ok_or(Error::Singular(what))?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn solve_hpd(a: &CMat, b: &CMat, what: &'static str) -> Result<CMat> {
    let chol = hermitian_part(a).cholesky().ok_or(Error::Singular(what))?;
    Ok(chol.solve(b))
}

/// `log2 det A` for Hermitian positive-definite `A`.
pub fn log2_det_hpd(a: &CMat, what: &'static str) -> Result<f64> {
    let chol = hermitian_part(a).cholesky().ok_or(Error::Singular(what))?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>())
}

/// Eigendecomposition of a Hermitian matrix, returning eigenvalues and the
/// unitary matrix of eigenvectors (columns).
pub fn eigh(a: &CMat) -> (DVector<f64>, CMat) {
    let eig = hermitian_part(a).symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Diagonal matrix from a complex vector.
pub fn diag(v: &CVec) -> CMat {
    CMat::from_diagonal(v)
}

/// Hadamard (entrywise) product.
pub fn hadamard(a: &CMat, b: &CMat) -> CMat {
    a.component_mul(b)
}

/// Draws an `rows x cols` matrix of i.i.d. CN(0, 1) entries.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn log_det_matches_product_of_eigenvalues() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = complex_gaussian(&mut rng, 4, 4);
        let a = &x * x.adjoint() + identity(4);
        let (vals, _) = eigh(&a);
        let expected: f64 = vals.iter().map(|v| v.log2()).sum();
        assert!((log2_det_hpd(&a, "a").unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn inverse_of_singular_matrix_is_rejected() {
        assert!(inverse_hpd(&zeros(2, 2), "zero").is_err());
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = complex_gaussian(&mut rng, 3, 5);
        let a = &x * x.adjoint();
        let (vals, q) = eigh(&a);
        let back = &q * CMat::from_diagonal(&vals.map(|v| Complex64::new(v, 0.0))) * q.adjoint();
        assert!((back - a).norm() < 1e-10);
    }
}
