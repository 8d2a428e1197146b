//! Dense symmetric-definite generalized eigenproblems for diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest `λ` with `A x = λ B x`, for symmetric `A` and symmetric positive definite `B`.
///
/// Reduces to a standard problem through the Cholesky factor of `B`. The
/// returned vector is `B`-normalized.
pub fn generalized_symmetric_smallest_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::SizeMismatch(format!("A is {}x{}, B is {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    if n == 0 {
        return Err(Error::SizeMismatch("empty eigenproblem".into()));
    }
    let b_sym = (b + b.transpose()) * 0.5;
    let chol = b_sym.cholesky().ok_or_else(|| Error::NotPositiveDefinite("B".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let a_sym = (a + a.transpose()) * 0.5;
    let y = l.solve_lower_triangular(&a_sym).expect("triangular factor is invertible");
    let c = l.solve_lower_triangular(&y.transpose()).expect("triangular factor is invertible");
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty spectrum");
    let z = eig.eigenvectors.column(k).into_owned();
    let x = l.transpose().solve_upper_triangular(&z).expect("triangular factor is invertible");
    Ok((lambda, x))
}

/// `‖A x − λ B x‖₂`.
pub fn eigen_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, lambda: f64, x: &DVector<f64>) -> f64 {
    (a * x - b * x * lambda).norm()
}
