//! C¹ reference elements, degree-of-freedom maps and quadrature.

pub mod argyris;
pub mod dofmap;
pub mod element;
pub mod hermite;
pub mod quadrature;

pub use argyris::{argyris_basis, ArgyrisElement};
pub use dofmap::{build_dof_map, CellBasis, DofKind, DofMap};
pub use element::{BasisEval, ElementKind, Jet};
pub use hermite::hermite_basis;
pub use quadrature::{quadrature_rule, QuadratureRule};

/// Default exactness degree of cell rules on triangles.
pub const DEFAULT_DEGREE_2D: usize = 12;
/// Default exactness degree of cell rules on segments.
pub const DEFAULT_DEGREE_1D: usize = 8;

pub fn default_quadrature_degree(dimension: usize) -> usize {
    if dimension == 1 {
        DEFAULT_DEGREE_1D
    } else {
        DEFAULT_DEGREE_2D
    }
}
