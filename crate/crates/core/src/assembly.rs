//! Assembly of the regularized bilinear form, load vectors, Gram matrices and
//! essential boundary constraints.
//!
//! The operator is stored as two blocks sharing one sparsity pattern:
//! `B_ij = (Δφ_j, Δφ_i)` and `N_ij = −(A:D²φ_j, φ_i) + (b·∇φ_j + c φ_j, φ_i)`,
//! so that `K(ε) = ε B + N`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{default_quadrature_degree, quadrature_rule, BasisEval, DofKind, DofMap, Jet, QuadratureRule};
use crate::linalg::{CsrMatrix, SparseSystem};
use crate::problems::{BoundaryData, EvalError, ProblemSpec};
use crate::Mesh;

/// Cells handed to the thread pool at a time; bounds the memory held by local matrices.
const CHUNK: usize = 512;

/// Basis data of one cell at its physical quadrature points.
pub struct CellQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub basis: Vec<BasisEval<f64>>,
}

/// Reference rule mapped onto the physical cell `c`, with the cell basis evaluated at each point.
pub fn cell_quadrature(mesh: &Mesh, dofmap: &DofMap, rule: &QuadratureRule<f64>, c: usize) -> Result<CellQuadrature> {
    let basis_fn = dofmap.cell_basis(mesh, c)?;
    let [p0, p1, p2] = mesh.cell_points(c);
    let jac = if mesh.dimension() == 1 {
        (p1[0] - p0[0]).abs()
    } else {
        ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs()
    };
    let mut points = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    let mut basis = Vec::with_capacity(rule.len());
    for (r, &w) in rule.points.iter().zip(&rule.weights) {
        let x = if mesh.dimension() == 1 {
            [p0[0] + (p1[0] - p0[0]) * r[0], 0.0]
        } else {
            [
                p0[0] + (p1[0] - p0[0]) * r[0] + (p2[0] - p0[0]) * r[1],
                p0[1] + (p1[1] - p0[1]) * r[0] + (p2[1] - p0[1]) * r[1],
            ]
        };
        points.push(x);
        weights.push(w * jac);
        basis.push(basis_fn.eval(x));
    }
    Ok(CellQuadrature { points, weights, basis })
}

fn coefficient_error(cell: usize, p: [f64; 2]) -> impl FnOnce(EvalError) -> Error {
    move |source| Error::CoefficientEval { cell, x: p[0], y: p[1], source }
}

pub fn rule_for(mesh: &Mesh, quad_degree: Option<usize>) -> Result<QuadratureRule<f64>> {
    quadrature_rule(mesh.dimension(), quad_degree.unwrap_or_else(|| default_quadrature_degree(mesh.dimension())))
}

fn check_dimensions(mesh: &Mesh, dofmap: &DofMap, problem: Option<&ProblemSpec>) -> Result<()> {
    if dofmap.kind().dimension() != mesh.dimension() || dofmap.num_cells() != mesh.num_cells() {
        return Err(Error::DimensionMismatch { mesh: mesh.dimension(), element: dofmap.kind().dimension() });
    }
    if let Some(p) = problem {
        if p.dimension() != mesh.dimension() {
            return Err(Error::DimensionMismatch { mesh: mesh.dimension(), element: p.dimension() });
        }
    }
    Ok(())
}

/// Runs `local` on every cell (in parallel chunks) and adds the dense local
/// matrices into `targets` in ascending cell order.
fn assemble_cells<const K: usize>(
    mesh: &Mesh,
    dofmap: &DofMap,
    targets: &mut [CsrMatrix<f64>; K],
    local: impl Fn(usize) -> Result<[Vec<f64>; K]> + Sync,
) -> Result<()> {
    let cells: Vec<usize> = (0..mesh.num_cells()).collect();
    for chunk in cells.chunks(CHUNK) {
        let locals: Vec<Result<[Vec<f64>; K]>> = chunk.par_iter().map(|&c| local(c)).collect();
        for (&c, mats) in chunk.iter().zip(locals) {
            let mats = mats?;
            let dofs = dofmap.cell_dofs(c);
            let n = dofs.len();
            for (target, m) in targets.iter_mut().zip(&mats) {
                for (a, &i) in dofs.iter().enumerate() {
                    for (b, &j) in dofs.iter().enumerate() {
                        target.add(i, j, m[a * n + b]);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Empty matrix with the element coupling pattern.
pub fn pattern(dofmap: &DofMap) -> CsrMatrix<f64> {
    CsrMatrix::from_blocks(dofmap.num_dofs(), (0..dofmap.num_cells()).map(|c| dofmap.cell_dofs(c)))
}

#[derive(Debug, Clone)]
pub struct OperatorBlocks {
    /// `(Δφ_j, Δφ_i)`
    pub biharmonic: CsrMatrix<f64>,
    /// `−(A:D²φ_j, φ_i) + (b·∇φ_j + c φ_j, φ_i)`
    pub second_order: CsrMatrix<f64>,
}

impl OperatorBlocks {
    /// `ε B + N`.
    pub fn operator(&self, eps: f64) -> CsrMatrix<f64> {
        self.biharmonic.linear_combination(eps, &self.second_order, 1.0)
    }
}

pub fn assemble_blocks(mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec, quad_degree: Option<usize>) -> Result<OperatorBlocks> {
    check_dimensions(mesh, dofmap, Some(problem))?;
    let rule = rule_for(mesh, quad_degree)?;
    let dim = mesh.dimension();
    let mut targets = [pattern(dofmap), pattern(dofmap)];
    assemble_cells(mesh, dofmap, &mut targets, |c| {
        let q = cell_quadrature(mesh, dofmap, &rule, c)?;
        let n = dofmap.cell_dofs(c).len();
        let mut bih = vec![0.0; n * n];
        let mut sec = vec![0.0; n * n];
        let mut trial = vec![0.0; n];
        for ((&p, &w), e) in q.points.iter().zip(&q.weights).zip(&q.basis) {
            let err = || coefficient_error(c, p);
            let a = problem.a.eval(p).map_err(err())?;
            let b = match &problem.b {
                Some([b1, b2]) => [b1.eval(p).map_err(err())?, if dim == 2 { b2.eval(p).map_err(err())? } else { 0.0 }],
                None => [0.0, 0.0],
            };
            let cc = match &problem.c {
                Some(f) => f.eval(p).map_err(err())?,
                None => 0.0,
            };
            for j in 0..n {
                let h = e.hessians[j];
                let second = if dim == 1 { a[0] * h[0] } else { a[0] * h[0] + 2.0 * a[1] * h[1] + a[2] * h[2] };
                let g = e.gradients[j];
                trial[j] = -second + b[0] * g[0] + b[1] * g[1] + cc * e.values[j];
            }
            for i in 0..n {
                let wl = w * e.laplacians[i];
                let wv = w * e.values[i];
                for j in 0..n {
                    bih[i * n + j] += wl * e.laplacians[j];
                    sec[i * n + j] += wv * trial[j];
                }
            }
        }
        Ok([bih, sec])
    })?;
    let [biharmonic, second_order] = targets;
    Ok(OperatorBlocks { biharmonic, second_order })
}

/// Operator matrix `K(ε)` with a zero load and no constraints.
pub fn assemble_operator(mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec, eps: f64, quad_degree: Option<usize>) -> Result<SparseSystem<f64>> {
    let matrix = assemble_blocks(mesh, dofmap, problem, quad_degree)?.operator(eps);
    Ok(SparseSystem { load: vec![0.0; matrix.nrows()], matrix, constraints: Vec::new(), symmetric: false })
}

/// `(f, φ_i)` integrated with `f` as a fallible point function.
pub fn assemble_functional(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad_degree: Option<usize>,
    f: &(dyn Fn([f64; 2]) -> Result<f64, EvalError> + Sync),
) -> Result<Vec<f64>> {
    check_dimensions(mesh, dofmap, None)?;
    let rule = rule_for(mesh, quad_degree)?;
    let mut load = vec![0.0; dofmap.num_dofs()];
    let cells: Vec<usize> = (0..mesh.num_cells()).collect();
    for chunk in cells.chunks(CHUNK) {
        let locals: Vec<Result<Vec<f64>>> = chunk
            .par_iter()
            .map(|&c| {
                let q = cell_quadrature(mesh, dofmap, &rule, c)?;
                let mut local = vec![0.0; dofmap.cell_dofs(c).len()];
                for ((&p, &w), e) in q.points.iter().zip(&q.weights).zip(&q.basis) {
                    let fw = w * f(p).map_err(coefficient_error(c, p))?;
                    for (l, v) in local.iter_mut().zip(&e.values) {
                        *l += fw * v;
                    }
                }
                Ok(local)
            })
            .collect();
        for (&c, local) in chunk.iter().zip(locals) {
            for (&i, v) in dofmap.cell_dofs(c).iter().zip(local?) {
                load[i] += v;
            }
        }
    }
    Ok(load)
}

/// Load vector for the source at perturbation `eps` (see [`ProblemSpec::source`]).
pub fn assemble_load(mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec, eps: f64, quad_degree: Option<usize>) -> Result<Vec<f64>> {
    check_dimensions(mesh, dofmap, Some(problem))?;
    assemble_functional(mesh, dofmap, quad_degree, &|p| problem.source(eps, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramKind {
    /// `(u, v)`
    L2,
    /// `(∇u, ∇v)`, the seminorm.
    H1,
    /// `(u, v) + (∇u, ∇v) + (D²u, D²v)`
    H2,
    /// `ε (Δu, Δv) + (∇u, ∇v)`
    Energy(f64),
}

pub fn assemble_gram(mesh: &Mesh, dofmap: &DofMap, kind: GramKind, quad_degree: Option<usize>) -> Result<CsrMatrix<f64>> {
    check_dimensions(mesh, dofmap, None)?;
    let rule = rule_for(mesh, quad_degree)?;
    let (mass, grad, hess, lap) = match kind {
        GramKind::L2 => (1.0, 0.0, 0.0, 0.0),
        GramKind::H1 => (0.0, 1.0, 0.0, 0.0),
        GramKind::H2 => (1.0, 1.0, 1.0, 0.0),
        GramKind::Energy(eps) => (0.0, 1.0, 0.0, eps),
    };
    let mut targets = [pattern(dofmap)];
    assemble_cells(mesh, dofmap, &mut targets, |c| {
        let q = cell_quadrature(mesh, dofmap, &rule, c)?;
        let n = dofmap.cell_dofs(c).len();
        let mut m = vec![0.0; n * n];
        for (&w, e) in q.weights.iter().zip(&q.basis) {
            for i in 0..n {
                for j in 0..n {
                    let (gi, gj) = (e.gradients[i], e.gradients[j]);
                    let (hi, hj) = (e.hessians[i], e.hessians[j]);
                    let mut v = 0.0;
                    if mass != 0.0 {
                        v += mass * e.values[i] * e.values[j];
                    }
                    if grad != 0.0 {
                        v += grad * (gi[0] * gj[0] + gi[1] * gj[1]);
                    }
                    if hess != 0.0 {
                        v += hess * (hi[0] * hj[0] + 2.0 * hi[1] * hj[1] + hi[2] * hj[2]);
                    }
                    if lap != 0.0 {
                        v += lap * e.laplacians[i] * e.laplacians[j];
                    }
                    m[i * n + j] += w * v;
                }
            }
        }
        Ok([m])
    })?;
    let [gram] = targets;
    Ok(gram)
}

/// Prescribed values of the constrained DOFs, in ascending DOF order.
pub fn boundary_values(mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec) -> Result<Vec<(usize, f64)>> {
    let dofs = dofmap.boundary_trace_dofs();
    match &problem.boundary {
        BoundaryData::Homogeneous => Ok(dofs.iter().map(|&d| (d, 0.0)).collect()),
        BoundaryData::Exact => {
            let exact = problem.exact.as_ref().ok_or_else(|| Error::MissingBoundaryData {
                dof: dofs.first().copied().unwrap_or(0),
                reason: "exact boundary data requested but the problem has no exact solution".into(),
            })?;
            let jet = |p: [f64; 2]| exact.jet(p);
            Ok(dofs.iter().map(|&d| (d, dofmap.dof_value(mesh, d, &jet))).collect())
        }
        BoundaryData::TraceOnly(g) => dofs
            .iter()
            .map(|&d| match dofmap.dof_kind(d) {
                DofKind::Vertex { vertex, component: 0 } => {
                    let p = mesh.vertex(vertex);
                    g.eval(p).map(|v| (d, v)).map_err(|e| Error::MissingBoundaryData { dof: d, reason: e.to_string() })
                }
                _ => Err(Error::MissingBoundaryData { dof: d, reason: "derivative data unavailable from a trace-only boundary function".into() }),
            })
            .collect(),
    }
}

/// Replaces constrained rows by identity rows and eliminates constrained
/// columns from the free rows, moving the known values to the load.
pub fn apply_constraints(mut system: SparseSystem<f64>, constraints: Vec<(usize, f64)>) -> SparseSystem<f64> {
    let n = system.dim();
    let mut prescribed: Vec<Option<f64>> = vec![None; n];
    for &(d, v) in &constraints {
        prescribed[d] = Some(v);
    }
    for i in 0..n {
        let (cols, vals) = system.matrix.row_mut(i);
        if let Some(g) = prescribed[i] {
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                *v = if j == i { 1.0 } else { 0.0 };
            }
            system.load[i] = g;
        } else {
            let mut shift = 0.0;
            for (&j, v) in cols.iter().zip(vals.iter_mut()) {
                if let Some(g) = prescribed[j] {
                    shift += *v * g;
                    *v = 0.0;
                }
            }
            system.load[i] -= shift;
        }
    }
    system.constraints = constraints;
    system
}

pub fn apply_boundary_conditions(system: SparseSystem<f64>, mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec) -> Result<SparseSystem<f64>> {
    let constraints = boundary_values(mesh, dofmap, problem)?;
    Ok(apply_constraints(system, constraints))
}

/// Operator, load and constraints for one value of `ε`.
pub fn assemble_system(mesh: &Mesh, dofmap: &DofMap, problem: &ProblemSpec, eps: f64, quad_degree: Option<usize>) -> Result<SparseSystem<f64>> {
    let matrix = assemble_blocks(mesh, dofmap, problem, quad_degree)?.operator(eps);
    let load = assemble_load(mesh, dofmap, problem, eps, quad_degree)?;
    let system = SparseSystem { matrix, load, constraints: Vec::new(), symmetric: false };
    apply_boundary_conditions(system, mesh, dofmap, problem)
}

/// The bilinear form `A^ε(w, v)` for arbitrary functions given by their jets,
/// integrated cellwise with the mesh quadrature.
pub fn evaluate_form(
    mesh: &Mesh,
    problem: &ProblemSpec,
    eps: f64,
    w: &dyn Fn([f64; 2]) -> Jet<f64>,
    v: &dyn Fn([f64; 2]) -> Jet<f64>,
    quad_degree: Option<usize>,
) -> Result<f64> {
    let rule = rule_for(mesh, quad_degree)?;
    let dim = mesh.dimension();
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let [p0, p1, p2] = mesh.cell_points(c);
        let (jac, map): (f64, Box<dyn Fn([f64; 2]) -> [f64; 2]>) = if dim == 1 {
            ((p1[0] - p0[0]).abs(), Box::new(move |r: [f64; 2]| [p0[0] + (p1[0] - p0[0]) * r[0], 0.0]))
        } else {
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            (
                det.abs(),
                Box::new(move |r: [f64; 2]| {
                    [p0[0] + (p1[0] - p0[0]) * r[0] + (p2[0] - p0[0]) * r[1], p0[1] + (p1[1] - p0[1]) * r[0] + (p2[1] - p0[1]) * r[1]]
                }),
            )
        };
        for (r, &wt) in rule.points.iter().zip(&rule.weights) {
            let p = map(*r);
            let err = || coefficient_error(c, p);
            let (jw, jv) = (w(p), v(p));
            let a = problem.a.eval(p).map_err(err())?;
            let h = jw.hessian;
            let second = if dim == 1 { a[0] * h[0] } else { a[0] * h[0] + 2.0 * a[1] * h[1] + a[2] * h[2] };
            let mut lower = 0.0;
            if let Some([b1, b2]) = &problem.b {
                lower += b1.eval(p).map_err(err())? * jw.gradient[0];
                if dim == 2 {
                    lower += b2.eval(p).map_err(err())? * jw.gradient[1];
                }
            }
            if let Some(cf) = &problem.c {
                lower += cf.eval(p).map_err(err())? * jw.value;
            }
            let lap = |j: &Jet<f64>| if dim == 1 { j.hessian[0] } else { j.laplacian() };
            total += wt * jac * (eps * lap(&jw) * lap(&jv) + (lower - second) * jv.value);
        }
    }
    Ok(total)
}
