//! Discrete dual norms and discrete Calderón–Zygmund stability constants.
//!
//! All quantities live on the free (unconstrained) subspace of `V_h` and are
//! computed through dense Gram-matrix identities, so they are meant for small
//! meshes only.

use nalgebra::{DMatrix, DVector};

use crate::assembly::{assemble_blocks, assemble_functional, assemble_gram, GramKind};
use crate::error::{Error, Result};
use crate::fem::{build_dof_map, DofMap, ElementKind};
use crate::linalg::{generalized_symmetric_smallest_eig, CsrMatrix};
use crate::problems::{EvalError, ProblemSpec};
use crate::Mesh;

/// Default dense-diagnostic limit on the global DOF count.
pub const DENSE_CEILING: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualNormKind {
    /// `sup (v, w_h) / ‖w_h‖_{L²}`
    L2h,
    /// `sup (v, w_h) / ‖w_h‖_{H²}`
    Hm2h,
}

/// Dense `rows × cols` block of a sparse matrix.
pub fn dense_block(m: &CsrMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let block = m.dense_block(rows, cols);
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| block[i][j])
}

fn cholesky(m: DMatrix<f64>, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    m.cholesky().ok_or_else(|| Error::NotPositiveDefinite(format!("{what} Gram matrix")))
}

/// Discrete dual norm of `v` over the free subspace of `dofmap`.
pub fn discrete_dual_norm(
    v: &(dyn Fn([f64; 2]) -> Result<f64, EvalError> + Sync),
    mesh: &Mesh,
    dofmap: &DofMap,
    kind: DualNormKind,
    quad_degree: Option<usize>,
) -> Result<f64> {
    let free = dofmap.free_dofs();
    let r_full = assemble_functional(mesh, dofmap, quad_degree, v)?;
    let r = DVector::from_iterator(free.len(), free.iter().map(|&d| r_full[d]));
    let (gram, name) = match kind {
        DualNormKind::L2h => (GramKind::L2, "L2"),
        DualNormKind::Hm2h => (GramKind::H2, "H2"),
    };
    let g = dense_block(&assemble_gram(mesh, dofmap, gram, quad_degree)?, &free, &free);
    let y = cholesky(g, name)?.solve(&r);
    Ok(r.dot(&y).max(0.0).sqrt())
}

/// Free-subspace blocks of the operator and the Gram matrices.
#[derive(Debug, Clone)]
pub struct CzOperators {
    pub free: Vec<usize>,
    pub k: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub h2: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzOptions {
    pub ceiling: usize,
    pub quad_degree: Option<usize>,
}

impl Default for CzOptions {
    fn default() -> Self {
        CzOptions { ceiling: DENSE_CEILING, quad_degree: None }
    }
}

impl CzOperators {
    pub fn new(problem: &ProblemSpec, mesh: &Mesh, eps: f64, options: CzOptions) -> Result<Self> {
        let kind = ElementKind::for_dimension(mesh.dimension())
            .ok_or_else(|| Error::InvalidMesh(format!("unsupported dimension {}", mesh.dimension())))?;
        let dofmap = build_dof_map(mesh, kind)?;
        if dofmap.num_dofs() > options.ceiling {
            return Err(Error::CeilingExceeded { dofs: dofmap.num_dofs(), ceiling: options.ceiling });
        }
        let free = dofmap.free_dofs();
        let k = assemble_blocks(mesh, &dofmap, problem, options.quad_degree)?.operator(eps);
        let mass = assemble_gram(mesh, &dofmap, GramKind::L2, options.quad_degree)?;
        let h2 = assemble_gram(mesh, &dofmap, GramKind::H2, options.quad_degree)?;
        Ok(CzOperators {
            k: dense_block(&k, &free, &free),
            mass: dense_block(&mass, &free, &free),
            h2: dense_block(&h2, &free, &free),
            free,
        })
    }

    /// Numerator and denominator matrices of the Rayleigh quotient.
    ///
    /// Primal: `(Kᵀ M⁻¹ K, H)`. Adjoint: `(K H⁻¹ Kᵀ, M)`.
    pub fn pencil(&self, adjoint: bool) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (inner, outer, name, apply) = if adjoint {
            (&self.h2, &self.mass, "H2", self.k.transpose())
        } else {
            (&self.mass, &self.h2, "L2", self.k.clone())
        };
        let chol = cholesky(inner.clone(), name)?;
        let x = chol.l().solve_lower_triangular(&apply).expect("triangular factor is invertible");
        Ok((x.transpose() * &x, outer.clone()))
    }

    /// Square root of the Rayleigh quotient at `v` (free coefficients).
    pub fn rayleigh(&self, v: &DVector<f64>, adjoint: bool) -> Result<f64> {
        let (a, b) = self.pencil(adjoint)?;
        Ok((v.dot(&(&a * v)) / v.dot(&(&b * v))).max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CzReport {
    pub eps: f64,
    pub h: f64,
    pub dofs: usize,
    pub c_h: f64,
    pub adjoint: bool,
    /// Minimizing mode on the free subspace, normalized in the denominator norm.
    pub mode: Vec<f64>,
}

pub fn discrete_cz_constant(problem: &ProblemSpec, mesh: &Mesh, eps: f64, adjoint: bool, options: CzOptions) -> Result<CzReport> {
    let ops = CzOperators::new(problem, mesh, eps, options)?;
    cz_from_operators(&ops, mesh, eps, adjoint)
}

pub fn cz_from_operators(ops: &CzOperators, mesh: &Mesh, eps: f64, adjoint: bool) -> Result<CzReport> {
    let (a, b) = ops.pencil(adjoint)?;
    let (lambda, x) = generalized_symmetric_smallest_eig(&a, &b)?;
    Ok(CzReport {
        eps,
        h: mesh.h(),
        dofs: ops.free.len(),
        c_h: lambda.max(0.0).sqrt(),
        adjoint,
        mode: x.iter().copied().collect(),
    })
}

/// Ratio of the smallest to the largest constant across levels.
pub fn uniformity_ratio(reports: &[CzReport]) -> f64 {
    let min = reports.iter().map(|r| r.c_h).fold(f64::INFINITY, f64::min);
    let max = reports.iter().map(|r| r.c_h).fold(0.0, f64::max);
    min / max
}
