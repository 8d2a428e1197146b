//! Linear algebra: sparse storage, direct solves and dense diagnostic eigensolves.

pub mod band;
pub mod dense;
pub mod eigen;
pub mod ordering;
pub mod sparse;

pub use band::BandLu;
pub use dense::{DenseLu, DenseMatrix};
pub use eigen::{eigen_residual, generalized_symmetric_smallest_eig};
pub use sparse::CsrMatrix;

use crate::scalar::Real;

/// Relative residual above which a completed solve is still reported singular.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Square operator, load vector and the essential constraints it carries.
#[derive(Debug, Clone)]
pub struct SparseSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub load: Vec<T>,
    /// `(dof, prescribed value)`, sorted by dof.
    pub constraints: Vec<(usize, T)>,
    pub symmetric: bool,
}

impl<T: Real> SparseSystem<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// `‖K x − F‖₂ / ‖F‖₂` against the unfactored matrix (absolute when `F = 0`).
    pub relative_residual: f64,
    /// `max |U| / max |K|`.
    pub pivot_growth: f64,
    pub singular: bool,
}

/// Direct solve with one step of iterative refinement.
///
/// Singularity is reported through the flag, never as an error: either an
/// all-zero pivot column or a final residual above [`RESIDUAL_TOLERANCE`].
pub fn solve_linear<T: Real>(system: &SparseSystem<T>) -> (Vec<T>, SolveReport) {
    solve_csr(&system.matrix, &system.load)
}

pub fn solve_csr<T: Real>(matrix: &CsrMatrix<T>, rhs: &[T]) -> (Vec<T>, SolveReport) {
    let lu = BandLu::factor(matrix);
    let max_a = matrix.max_abs().to_f64_lossy();
    let pivot_growth = if max_a > 0.0 { lu.max_abs_u().to_f64_lossy() / max_a } else { f64::INFINITY };
    let norm_f = norm2(rhs);
    if lu.is_singular() {
        let nan = vec![T::nan(); rhs.len()];
        return (nan, SolveReport { relative_residual: f64::INFINITY, pivot_growth, singular: true });
    }
    let mut x = lu.solve(rhs);
    let r = residual(matrix, &x, rhs);
    let correction = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(&correction) {
        *xi += *di;
    }
    let r = residual(matrix, &x, rhs);
    let res = norm2(&r);
    let relative_residual = if norm_f > 0.0 { res / norm_f } else { res };
    let singular = !(relative_residual <= RESIDUAL_TOLERANCE);
    (x, SolveReport { relative_residual, pivot_growth, singular })
}

fn residual<T: Real>(matrix: &CsrMatrix<T>, x: &[T], rhs: &[T]) -> Vec<T> {
    matrix.matvec(x).iter().zip(rhs).map(|(&ax, &b)| b - ax).collect()
}

pub fn norm2<T: Real>(v: &[T]) -> f64 {
    v.iter().map(|x| x.to_f64_lossy().powi(2)).sum::<f64>().sqrt()
}
