//! Cubic Hermite element on a segment.

use super::element::BasisEval;
use crate::scalar::Real;

/// Basis at reference coordinate `t ∈ [0, 1]` of a cell of signed length
/// `cell_length`. Local order: value at the left node, slope at the left node,
/// value at the right node, slope at the right node.
pub fn hermite_basis<T: Real>(t: T, cell_length: T) -> BasisEval<T> {
    let mut out = BasisEval::with_len(4);
    hermite_basis_into(t, cell_length, &mut out);
    out
}

pub fn hermite_basis_into<T: Real>(t: T, cell_length: T, out: &mut BasisEval<T>) {
    let l = cell_length;
    let c = T::lit;
    let t2 = t * t;
    let t3 = t2 * t;
    let values = [
        T::one() - c(3.0) * t2 + c(2.0) * t3,
        l * (t - c(2.0) * t2 + t3),
        c(3.0) * t2 - c(2.0) * t3,
        l * (t3 - t2),
    ];
    let first = [
        (c(6.0) * t2 - c(6.0) * t) / l,
        T::one() - c(4.0) * t + c(3.0) * t2,
        (c(6.0) * t - c(6.0) * t2) / l,
        c(3.0) * t2 - c(2.0) * t,
    ];
    let second = [
        (c(12.0) * t - c(6.0)) / (l * l),
        (c(6.0) * t - c(4.0)) / l,
        (c(6.0) - c(12.0) * t) / (l * l),
        (c(6.0) * t - c(2.0)) / l,
    ];
    for i in 0..4 {
        out.values[i] = values[i];
        out.gradients[i] = [first[i], T::zero()];
        out.hessians[i] = [second[i], T::zero(), T::zero()];
        out.laplacians[i] = second[i];
    }
}
