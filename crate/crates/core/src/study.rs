//! End-to-end solves, error norms and convergence tables.

use std::sync::Arc;

use crate::assembly::{apply_constraints, assemble_blocks, assemble_load, boundary_values, cell_quadrature, rule_for, OperatorBlocks};
use crate::error::Result;
use crate::fem::{build_dof_map, DofMap, ElementKind, Jet};
use crate::linalg::{solve_linear, SolveReport, SparseSystem};
use crate::mesh::PointLocator;
use crate::problems::{ExactBundle, MeshParams, ProblemSpec};
use crate::Mesh;

/// Discrete solution `u_h^ε` bound to its mesh and DOF map.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub mesh: Arc<Mesh>,
    pub dofmap: Arc<DofMap>,
    pub coeffs: Vec<f64>,
    pub eps: f64,
    pub report: SolveReport,
    locator: Arc<PointLocator>,
}

/// Barycentric slack used when locating sample points.
const LOCATE_TOL: f64 = 1e-10;

impl SolutionField {
    pub fn new(mesh: Arc<Mesh>, dofmap: Arc<DofMap>, coeffs: Vec<f64>, eps: f64, report: SolveReport) -> Self {
        assert_eq!(coeffs.len(), dofmap.num_dofs(), "coefficient count must match the DOF map");
        let locator = Arc::new(PointLocator::new(mesh.as_ref()));
        SolutionField { mesh, dofmap, coeffs, eps, report, locator }
    }

    pub fn local_coeffs(&self, c: usize) -> Vec<f64> {
        self.dofmap.cell_dofs(c).iter().map(|&d| self.coeffs[d]).collect()
    }

    /// Jet of the restriction to cell `c`, evaluated at `p`.
    pub fn cell_jet(&self, c: usize, p: [f64; 2]) -> Result<Jet<f64>> {
        let basis = self.dofmap.cell_basis(self.mesh.as_ref(), c)?;
        Ok(basis.eval(p).combine(&self.local_coeffs(c)))
    }

    /// Cell containing `p`, if `p` lies in the meshed domain.
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        self.locator.locate(self.mesh.as_ref(), p, LOCATE_TOL)
    }

    /// Jet at `p`, or `None` outside the mesh.
    pub fn eval(&self, p: [f64; 2]) -> Option<Jet<f64>> {
        let c = self.locate(p)?;
        self.cell_jet(c, p).ok()
    }
}

/// Solver for one problem on one mesh; the ε-independent blocks are assembled once.
pub struct VmmSolver<'a> {
    pub problem: &'a ProblemSpec,
    pub mesh: Arc<Mesh>,
    pub dofmap: Arc<DofMap>,
    pub blocks: OperatorBlocks,
    pub constraints: Vec<(usize, f64)>,
    pub quad_degree: Option<usize>,
}

impl<'a> VmmSolver<'a> {
    pub fn new(problem: &'a ProblemSpec, mesh: Arc<Mesh>, quad_degree: Option<usize>) -> Result<Self> {
        let kind = ElementKind::for_dimension(mesh.dimension())
            .ok_or_else(|| crate::Error::InvalidMesh(format!("unsupported dimension {}", mesh.dimension())))?;
        let dofmap = Arc::new(build_dof_map(mesh.as_ref(), kind)?);
        let blocks = assemble_blocks(&mesh, &dofmap, problem, quad_degree)?;
        let constraints = boundary_values(&mesh, &dofmap, problem)?;
        Ok(VmmSolver { problem, mesh, dofmap, blocks, constraints, quad_degree })
    }

    /// Constrained system for `eps`.
    pub fn system(&self, eps: f64) -> Result<SparseSystem<f64>> {
        let matrix = self.blocks.operator(eps);
        let load = assemble_load(&self.mesh, &self.dofmap, self.problem, eps, self.quad_degree)?;
        let system = SparseSystem { matrix, load, constraints: Vec::new(), symmetric: false };
        Ok(apply_constraints(system, self.constraints.clone()))
    }

    /// Solves for `eps`; singularity is reported in the field, never as an error.
    pub fn solve(&self, eps: f64) -> Result<SolutionField> {
        let system = self.system(eps)?;
        let (coeffs, report) = solve_linear(&system);
        Ok(SolutionField::new(self.mesh.clone(), self.dofmap.clone(), coeffs, eps, report))
    }
}

pub fn solve_vmm(problem: &ProblemSpec, mesh: Arc<Mesh>, eps: f64, quad_degree: Option<usize>) -> Result<SolutionField> {
    VmmSolver::new(problem, mesh, quad_degree)?.solve(eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `‖∇(u_h − u)‖`
    pub h1: f64,
    /// `‖Δ_h u_h − Δu‖`, with the cellwise Laplacian.
    pub lap: f64,
}

pub fn error_norms(solution: &SolutionField, exact: &ExactBundle, quad_degree: Option<usize>) -> Result<ErrorNorms> {
    let mesh = solution.mesh.as_ref();
    let rule = rule_for(mesh, quad_degree)?;
    let (mut l2, mut h1, mut lap) = (0.0, 0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let q = cell_quadrature(mesh, &solution.dofmap, &rule, c)?;
        let local = solution.local_coeffs(c);
        for ((&p, &w), e) in q.points.iter().zip(&q.weights).zip(&q.basis) {
            let jet = e.combine(&local);
            let grad = (exact.gradient)(p);
            let du = jet.value - (exact.u)(p);
            let gx = jet.gradient[0] - grad[0];
            let gy = if mesh.dimension() == 2 { jet.gradient[1] - grad[1] } else { 0.0 };
            let dl = jet.laplacian() - (exact.laplacian)(p);
            l2 += w * du * du;
            h1 += w * (gx * gx + gy * gy);
            lap += w * dl * dl;
        }
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1: h1.sqrt(), lap: lap.sqrt() })
}

/// `‖u_h‖_{H²} = (‖u_h‖² + ‖∇u_h‖² + ‖D²u_h‖²)^{1/2}`.
pub fn h2_norm(solution: &SolutionField, quad_degree: Option<usize>) -> Result<f64> {
    let mesh = solution.mesh.as_ref();
    let rule = rule_for(mesh, quad_degree)?;
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let q = cell_quadrature(mesh, &solution.dofmap, &rule, c)?;
        let local = solution.local_coeffs(c);
        for (&w, e) in q.weights.iter().zip(&q.basis) {
            let j = e.combine(&local);
            let h = j.hessian;
            total += w
                * (j.value * j.value
                    + j.gradient[0] * j.gradient[0]
                    + j.gradient[1] * j.gradient[1]
                    + h[0] * h[0]
                    + 2.0 * h[1] * h[1]
                    + h[2] * h[2]);
        }
    }
    Ok(total.sqrt())
}

/// `‖f‖_{L²}` of the source at perturbation `eps`.
pub fn source_l2_norm(problem: &ProblemSpec, mesh: &Mesh, eps: f64, quad_degree: Option<usize>) -> Result<f64> {
    let rule = rule_for(mesh, quad_degree)?;
    let dim = mesh.dimension();
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let [p0, p1, p2] = mesh.cell_points(c);
        let jac = if dim == 1 {
            (p1[0] - p0[0]).abs()
        } else {
            ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs()
        };
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let p = if dim == 1 {
                [p0[0] + (p1[0] - p0[0]) * r[0], 0.0]
            } else {
                [p0[0] + (p1[0] - p0[0]) * r[0] + (p2[0] - p0[0]) * r[1], p0[1] + (p1[1] - p0[1]) * r[0] + (p2[1] - p0[1]) * r[1]]
            };
            let f = problem
                .source(eps, p)
                .map_err(|source| crate::Error::CoefficientEval { cell: c, x: p[0], y: p[1], source })?;
            total += w * jac * f * f;
        }
    }
    Ok(total.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Varying ε on one fixed mesh; orders against ε.
    EpsList { eps: Vec<f64>, mesh: MeshParams },
    /// `ε = h^β` over a mesh sequence; orders against h.
    Coupled { beta: f64, meshes: Vec<MeshParams> },
    /// Fixed ε over a mesh sequence; orders against h.
    Refine { eps: f64, meshes: Vec<MeshParams> },
}

impl Schedule {
    pub fn len(&self) -> usize {
        match self {
            Schedule::EpsList { eps, .. } => eps.len(),
            Schedule::Coupled { meshes, .. } | Schedule::Refine { meshes, .. } => meshes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `ε_0, ε_0/2, …` with `halvings` halvings.
    pub fn halving(eps_start: f64, halvings: usize, mesh: MeshParams) -> Self {
        Schedule::EpsList { eps: (0..=halvings).map(|k| eps_start / 2f64.powi(k as i32)).collect(), mesh }
    }

    fn orders_against_eps(&self) -> bool {
        matches!(self, Schedule::EpsList { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub eps: f64,
    pub h: f64,
    pub l2_err: f64,
    pub l2_order: Option<f64>,
    pub h1_err: f64,
    pub h1_order: Option<f64>,
    pub lap_err: f64,
    pub lap_order: Option<f64>,
    /// Set when the solve was singular or the row failed; not serialized.
    pub singular: bool,
    pub failure: Option<String>,
}

impl TableRow {
    pub fn new(eps: f64, h: f64, errors: ErrorNorms) -> Self {
        TableRow {
            eps,
            h,
            l2_err: errors.l2,
            l2_order: None,
            h1_err: errors.h1,
            h1_order: None,
            lap_err: errors.lap,
            lap_order: None,
            singular: false,
            failure: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    /// Orders are computed against ε when set, against h otherwise.
    pub orders_in_eps: bool,
}

/// `log(e_prev/e) / log(p_prev/p)`, undefined for nonpositive or non-finite inputs.
pub fn observed_order(e_prev: f64, e: f64, p_prev: f64, p: f64) -> Option<f64> {
    let finite = [e_prev, e, p_prev, p].iter().all(|v| v.is_finite());
    if !finite || e_prev <= 0.0 || e <= 0.0 || p_prev <= 0.0 || p <= 0.0 || p_prev == p {
        return None;
    }
    Some((e_prev / e).ln() / (p_prev / p).ln())
}

impl ConvergenceTable {
    pub fn from_rows(mut rows: Vec<TableRow>, orders_in_eps: bool) -> Self {
        for i in 1..rows.len() {
            let (prev, cur) = (rows[i - 1].clone(), &mut rows[i]);
            let (pp, pc) = if orders_in_eps { (prev.eps, cur.eps) } else { (prev.h, cur.h) };
            cur.l2_order = observed_order(prev.l2_err, cur.l2_err, pp, pc);
            cur.h1_order = observed_order(prev.h1_err, cur.h1_err, pp, pc);
            cur.lap_order = observed_order(prev.lap_err, cur.lap_err, pp, pc);
        }
        ConvergenceTable { rows, orders_in_eps }
    }
}

fn row_from(eps: f64, h: f64, result: Result<(ErrorNorms, bool)>) -> TableRow {
    match result {
        Ok((errors, singular)) => TableRow { singular, ..TableRow::new(eps, h, errors) },
        Err(e) => TableRow {
            singular: false,
            failure: Some(e.to_string()),
            ..TableRow::new(eps, h, ErrorNorms { l2: f64::NAN, h1: f64::NAN, lap: f64::NAN })
        },
    }
}

fn measure(solver: &VmmSolver, exact: &ExactBundle, eps: f64) -> Result<(ErrorNorms, bool)> {
    let sol = solver.solve(eps)?;
    let errors = error_norms(&sol, exact, solver.quad_degree)?;
    Ok((errors, sol.report.singular))
}

/// Runs a schedule; per-row failures are recorded in the row.
pub fn convergence_study(problem: &ProblemSpec, schedule: &Schedule, quad_degree: Option<usize>) -> Result<ConvergenceTable> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| crate::Error::Config(format!("problem {} has no exact solution", problem.name)))?;
    let mut rows = Vec::with_capacity(schedule.len());
    match schedule {
        Schedule::EpsList { eps, mesh } => {
            let mesh = Arc::new(problem.domain.build_mesh(mesh)?);
            let solver = VmmSolver::new(problem, mesh.clone(), quad_degree)?;
            for &e in eps {
                rows.push(row_from(e, mesh.h(), measure(&solver, exact, e)));
            }
        }
        Schedule::Coupled { beta, meshes } => {
            for params in meshes {
                let mesh = Arc::new(problem.domain.build_mesh(params)?);
                let eps = mesh.h().powf(*beta);
                let result = VmmSolver::new(problem, mesh.clone(), quad_degree).and_then(|s| measure(&s, exact, eps));
                rows.push(row_from(eps, mesh.h(), result));
            }
        }
        Schedule::Refine { eps, meshes } => {
            for params in meshes {
                let mesh = Arc::new(problem.domain.build_mesh(params)?);
                let result = VmmSolver::new(problem, mesh.clone(), quad_degree).and_then(|s| measure(&s, exact, *eps));
                rows.push(row_from(*eps, mesh.h(), result));
            }
        }
    }
    Ok(ConvergenceTable::from_rows(rows, schedule.orders_against_eps()))
}
