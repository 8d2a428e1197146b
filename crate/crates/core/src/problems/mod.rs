//! Problem definitions: coefficient fields, manufactured solutions and domains.

pub mod builtin;
pub mod config;
pub mod expr;

use std::sync::Arc;

pub use builtin::{builtin_problem, exact_solution, BUILTIN_NAMES};
pub use config::{load_problem_config, problem_from_config, ProblemConfig};
pub use expr::{parse_scalar_field, EvalError, Expr, ParseError};

use crate::error::Result;
use crate::fem::Jet;
use crate::mesh::{build_disk_mesh, build_interval_mesh, build_rectangle_mesh};
use crate::Mesh;

/// A scalar coefficient or source field over the plane (`y` is ignored in 1-D).
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: [f64; 2]) -> Result<f64, EvalError>;
}

impl ScalarField for Expr {
    fn eval(&self, p: [f64; 2]) -> Result<f64, EvalError> {
        Expr::eval(self, p[0], p[1])
    }
}

/// Infallible closure field.
pub struct FnField<F>(pub F);

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn eval(&self, p: [f64; 2]) -> Result<f64, EvalError> {
        Ok((self.0)(p))
    }
}

pub type Field = Arc<dyn ScalarField>;

pub fn field(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(FnField(f))
}

pub fn constant(c: f64) -> Field {
    field(move |_| c)
}

/// Symmetric coefficient matrix `A(x)`; the off-diagonal field is shared, so
/// symmetry holds exactly at every point. 1-D problems use `a11` only.
#[derive(Clone)]
pub struct MatrixField {
    pub a11: Field,
    pub a12: Field,
    pub a22: Field,
}

impl MatrixField {
    pub fn constant(a11: f64, a12: f64, a22: f64) -> Self {
        MatrixField { a11: constant(a11), a12: constant(a12), a22: constant(a22) }
    }

    /// `[a11, a12, a22]` at `p`.
    pub fn eval(&self, p: [f64; 2]) -> Result<[f64; 3], EvalError> {
        Ok([self.a11.eval(p)?, self.a12.eval(p)?, self.a22.eval(p)?])
    }
}

/// Eigenvalues `(min, max)` of the symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
pub fn symmetric_eigenvalues(a: [f64; 3]) -> (f64, f64) {
    let mean = 0.5 * (a[0] + a[2]);
    let radius = (0.5 * (a[0] - a[2])).hypot(a[1]);
    (mean - radius, mean + radius)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rectangle { x: (f64, f64), y: (f64, f64) },
    Disk { radius: f64 },
}

/// Resolution of a mesh over a [`Domain`]: `n` cells per side for intervals and
/// rectangles; polygon size and refinement depth for disks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshParams {
    pub n: usize,
    pub disk_boundary: usize,
    pub disk_refine: usize,
}

impl MeshParams {
    pub fn uniform(n: usize) -> Self {
        MeshParams { n, disk_boundary: 6, disk_refine: 0 }
    }

    pub fn disk(boundary: usize, refine: usize) -> Self {
        MeshParams { n: 1, disk_boundary: boundary, disk_refine: refine }
    }
}

impl Domain {
    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn build_mesh(&self, params: &MeshParams) -> Result<Mesh> {
        match *self {
            Domain::Interval { a, b } => build_interval_mesh(a, b, params.n),
            Domain::Rectangle { x, y } => build_rectangle_mesh(x, y, params.n),
            Domain::Disk { radius } => build_disk_mesh(radius, params.disk_boundary, params.disk_refine),
        }
    }

    /// Maps a point of the unit square into the domain (area-preserving for disks).
    pub fn map_unit(&self, u: [f64; 2]) -> [f64; 2] {
        match *self {
            Domain::Interval { a, b } => [a + (b - a) * u[0], 0.0],
            Domain::Rectangle { x, y } => [x.0 + (x.1 - x.0) * u[0], y.0 + (y.1 - y.0) * u[1]],
            Domain::Disk { radius } => {
                let r = radius * u[0].sqrt();
                let theta = std::f64::consts::TAU * u[1];
                [r * theta.cos(), r * theta.sin()]
            }
        }
    }

    /// Deterministic Halton points in the domain, starting at sequence index `1 + offset`.
    pub fn halton_points(&self, n: usize, offset: u64) -> Vec<[f64; 2]> {
        (0..n as u64).map(|i| self.map_unit([halton(i + 1 + offset, 2), halton(i + 1 + offset, 3)])).collect()
    }
}

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

type PointFn<T> = Arc<dyn Fn([f64; 2]) -> T + Send + Sync>;

/// Closed-form exact solution with the derivatives needed for boundary data,
/// manufactured sources and error norms.
#[derive(Clone)]
pub struct ExactBundle {
    pub u: PointFn<f64>,
    pub gradient: PointFn<[f64; 2]>,
    /// `[xx, xy, yy]`
    pub hessian: PointFn<[f64; 3]>,
    pub laplacian: PointFn<f64>,
    /// `Δ²u`, when the solution is smooth enough for it to be meaningful.
    pub bilaplacian: Option<PointFn<f64>>,
    /// Sobolev regularity, for documentation (`"H3"`, `"C-infinity"`, ...).
    pub smoothness: &'static str,
}

impl ExactBundle {
    pub fn jet(&self, p: [f64; 2]) -> Jet<f64> {
        Jet { value: (self.u)(p), gradient: (self.gradient)(p), hessian: (self.hessian)(p) }
    }
}

/// Essential boundary data `u = g`.
#[derive(Clone)]
pub enum BoundaryData {
    /// `g = 0` together with all constrained derivatives.
    Homogeneous,
    /// Values and derivatives from the exact solution.
    Exact,
    /// Trace values only; rejected whenever derivative DOFs are constrained.
    TraceOnly(Field),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub a: MatrixField,
    pub b: Option<[Field; 2]>,
    pub c: Option<Field>,
    pub f: Field,
    pub exact: Option<ExactBundle>,
    pub boundary: BoundaryData,
    /// When set, the source is `f + ε Δ²u` so that the exact solution also solves
    /// the perturbed fourth-order problem.
    pub eps_consistent_source: bool,
    pub lambda_lower: Option<f64>,
}

impl ProblemSpec {
    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Source term for the perturbation parameter `eps`.
    pub fn source(&self, eps: f64, p: [f64; 2]) -> Result<f64, EvalError> {
        let f = self.f.eval(p)?;
        if !self.eps_consistent_source || eps == 0.0 {
            return Ok(f);
        }
        let bilap = self
            .exact
            .as_ref()
            .and_then(|e| e.bilaplacian.as_ref())
            .ok_or_else(|| EvalError("eps-consistent source needs the exact bilaplacian".into()))?;
        Ok(f + eps * bilap(p))
    }

    /// Residual `f + A:D²u − b·∇u − c u` of the manufactured source at `p`.
    pub fn source_residual(&self, p: [f64; 2]) -> Option<Result<f64, EvalError>> {
        let exact = self.exact.as_ref()?;
        Some((|| {
            let a = self.a.eval(p)?;
            let hess = (exact.hessian)(p);
            let second = if self.dimension() == 1 { a[0] * hess[0] } else { a[0] * hess[0] + 2.0 * a[1] * hess[1] + a[2] * hess[2] };
            let mut lower = 0.0;
            if let Some([b1, b2]) = &self.b {
                let g = (exact.gradient)(p);
                lower += b1.eval(p)? * g[0] + if self.dimension() == 2 { b2.eval(p)? * g[1] } else { 0.0 };
            }
            if let Some(c) = &self.c {
                lower += c.eval(p)? * (exact.u)(p);
            }
            Ok(self.f.eval(p)? + second - lower)
        })())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityProbe {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub argmin: [f64; 2],
    pub samples: usize,
    /// Points skipped because the field could not be evaluated.
    pub failures: usize,
}

/// Extreme eigenvalues of `A` over `n_samples` Halton points of the domain.
pub fn ellipticity_probe(a: &MatrixField, domain: &Domain, n_samples: usize, offset: u64) -> EllipticityProbe {
    let mut probe = EllipticityProbe {
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        argmin: [f64::NAN; 2],
        samples: 0,
        failures: 0,
    };
    for p in domain.halton_points(n_samples.max(1), offset) {
        let Ok(m) = a.eval(p) else {
            probe.failures += 1;
            continue;
        };
        let (lo, hi) = if domain.dimension() == 1 { (m[0], m[0]) } else { symmetric_eigenvalues(m) };
        probe.samples += 1;
        if lo < probe.min_eigenvalue {
            probe.min_eigenvalue = lo;
            probe.argmin = p;
        }
        probe.max_eigenvalue = probe.max_eigenvalue.max(hi);
    }
    probe
}
