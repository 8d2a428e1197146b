//! C¹ finite elements for the vanishing moment method applied to
//! non-divergence elliptic equations.
//!
//! Mesh, element and linear-algebra layers are generic over [`Real`]; the
//! problem, assembly and study layers work in `f64` through the aliases below.

pub mod assembly;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod scalar;
pub mod study;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = mesh::Mesh<f64>;
pub type BasisEval = fem::BasisEval<f64>;
pub type Jet = fem::Jet<f64>;
pub type CsrMatrix = linalg::CsrMatrix<f64>;
pub type SparseSystem = linalg::SparseSystem<f64>;
pub type QuadratureRule = fem::QuadratureRule<f64>;

pub use assembly::{assemble_gram, assemble_load, assemble_operator, assemble_system, GramKind};
pub use diagnostics::{discrete_cz_constant, discrete_dual_norm, CzReport, DualNormKind};
pub use fem::{build_dof_map, DofMap, ElementKind};
pub use problems::{builtin_problem, ProblemSpec};
pub use study::{convergence_study, error_norms, solve_vmm, ConvergenceTable, Schedule, SolutionField};
