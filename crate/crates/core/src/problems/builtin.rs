//! Built-in problems with closed-form exact solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use super::expr::{parse_scalar_field, sgnpow, EvalError};
use super::{constant, BoundaryData, Domain, ExactBundle, Field, MatrixField, ProblemSpec, ScalarField};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 7] = ["test1", "test2", "test3", "test4", "sine1d", "quintic2d", "const_coeff_2d"];

fn expr(text: &str) -> Field {
    Arc::new(parse_scalar_field(text).expect("built-in expression parses"))
}

/// Continuous, positive definite coefficient matrix shared by tests 1 to 3.
pub fn rough_coefficient() -> MatrixField {
    MatrixField {
        a11: expr("sgnpow(2*x - y, 1/3) + 4*exp(2 - x)"),
        a12: expr("sin(10*x*y)/2 - sqrt(x + 2)/2"),
        a22: expr("abs(y - 2*x)^(1/4) + 3"),
    }
}

/// Rank-one degenerate matrix `(16/9) v vᵀ` with `v = (x^{1/3}, −y^{1/3})`.
pub fn degenerate_coefficient() -> MatrixField {
    MatrixField {
        a11: expr("16/9*abs(x)^(2/3)"),
        a12: expr("-16/9*sgnpow(x, 1/3)*sgnpow(y, 1/3)"),
        a22: expr("16/9*abs(y)^(2/3)"),
    }
}

/// `−A:D²u + b·∇u + c u` evaluated from an exact solution.
pub struct ManufacturedSource {
    pub a: MatrixField,
    pub b: Option<[Field; 2]>,
    pub c: Option<Field>,
    pub exact: ExactBundle,
    pub dimension: usize,
}

impl ScalarField for ManufacturedSource {
    fn eval(&self, p: [f64; 2]) -> Result<f64, EvalError> {
        let a = self.a.eval(p)?;
        let h = (self.exact.hessian)(p);
        let mut f = if self.dimension == 1 { -a[0] * h[0] } else { -(a[0] * h[0] + 2.0 * a[1] * h[1] + a[2] * h[2]) };
        if let Some([b1, b2]) = &self.b {
            let g = (self.exact.gradient)(p);
            f += b1.eval(p)? * g[0];
            if self.dimension == 2 {
                f += b2.eval(p)? * g[1];
            }
        }
        if let Some(c) = &self.c {
            f += c.eval(p)? * (self.exact.u)(p);
        }
        Ok(f)
    }
}

fn bundle(
    u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    gradient: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    hessian: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    bilaplacian: Option<fn(f64, f64) -> f64>,
    smoothness: &'static str,
) -> ExactBundle {
    let hessian = Arc::new(move |p: [f64; 2]| hessian(p[0], p[1]));
    let h = hessian.clone();
    ExactBundle {
        u: Arc::new(move |p| u(p[0], p[1])),
        gradient: Arc::new(move |p| gradient(p[0], p[1])),
        hessian,
        laplacian: Arc::new(move |p| {
            let m = h(p);
            m[0] + m[2]
        }),
        bilaplacian: bilaplacian.map(|f| Arc::new(move |p: [f64; 2]| f(p[0], p[1])) as _),
        smoothness,
    }
}

fn sign(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum()
    }
}

/// Exact solution bundle of a built-in problem, usable from configuration files.
pub fn exact_solution(name: &str) -> Option<ExactBundle> {
    Some(match name {
        "test1" => bundle(
            |x, y| x.abs().powi(3) * y.cos() / 6.0,
            |x, y| [0.5 * x * x.abs() * y.cos(), -x.abs().powi(3) * y.sin() / 6.0],
            |x, y| [x.abs() * y.cos(), -0.5 * x * x.abs() * y.sin(), -x.abs().powi(3) * y.cos() / 6.0],
            None,
            "H3",
        ),
        "test2" => bundle(
            |x, y| 0.5 * x * x.abs() * y.cos(),
            |x, y| [x.abs() * y.cos(), -0.5 * x * x.abs() * y.sin()],
            |x, y| [sign(x) * y.cos(), -x.abs() * y.sin(), -0.5 * x * x.abs() * y.cos()],
            None,
            "H2",
        ),
        "test3" => bundle(
            |x, y| (x - y).abs().powf(8.0 / 3.0),
            |x, y| {
                let g = 8.0 / 3.0 * sgnpow(x - y, 5.0 / 3.0);
                [g, -g]
            },
            |x, y| {
                let d = 40.0 / 9.0 * (x - y).abs().powf(2.0 / 3.0);
                [d, -d, d]
            },
            None,
            "H2",
        ),
        // Second derivatives blow up on the axes; they are set to 0 there.
        "test4" => bundle(
            |x, y| x.abs().powf(4.0 / 3.0) - y.abs().powf(4.0 / 3.0),
            |x, y| [4.0 / 3.0 * sgnpow(x, 1.0 / 3.0), -4.0 / 3.0 * sgnpow(y, 1.0 / 3.0)],
            |x, y| {
                let d = |t: f64| if t == 0.0 { 0.0 } else { 4.0 / 9.0 * t.abs().powf(-2.0 / 3.0) };
                [d(x), 0.0, -d(y)]
            },
            None,
            "H1",
        ),
        "sine1d" => bundle(
            |x, _| (PI * x).sin(),
            |x, _| [PI * (PI * x).cos(), 0.0],
            |x, _| [-PI * PI * (PI * x).sin(), 0.0, 0.0],
            Some(|x, _| PI.powi(4) * (PI * x).sin()),
            "C-infinity",
        ),
        // Harmonic quintic: Δu = 0, so the natural boundary condition holds exactly.
        "quintic2d" => bundle(
            |x, y| x.powi(5) - 10.0 * x.powi(3) * y * y + 5.0 * x * y.powi(4) + x * x - y * y + x * y + x + 1.0,
            |x, y| {
                [
                    5.0 * x.powi(4) - 30.0 * x * x * y * y + 5.0 * y.powi(4) + 2.0 * x + y + 1.0,
                    -20.0 * x.powi(3) * y + 20.0 * x * y.powi(3) - 2.0 * y + x,
                ]
            },
            |x, y| {
                let d = 20.0 * x.powi(3) - 60.0 * x * y * y + 2.0;
                [d, -60.0 * x * x * y + 20.0 * y.powi(3) + 1.0, -d]
            },
            Some(|_, _| 0.0),
            "polynomial",
        ),
        "const_coeff_2d" => bundle(
            |x, y| (PI * x).sin() * (PI * y).sin(),
            |x, y| [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()],
            |x, y| {
                let s = -PI * PI * (PI * x).sin() * (PI * y).sin();
                [s, PI * PI * (PI * x).cos() * (PI * y).cos(), s]
            },
            Some(|x, y| 4.0 * PI.powi(4) * (PI * x).sin() * (PI * y).sin()),
            "C-infinity",
        ),
        _ => return None,
    })
}

fn manufactured(name: &str, domain: Domain, a: MatrixField, eps_consistent: bool, lambda_lower: Option<f64>) -> ProblemSpec {
    let exact = exact_solution(name).expect("built-in exact solution");
    let f: Field = Arc::new(ManufacturedSource {
        a: a.clone(),
        b: None,
        c: None,
        exact: exact.clone(),
        dimension: domain.dimension(),
    });
    ProblemSpec {
        name: name.to_string(),
        domain,
        a,
        b: None,
        c: None,
        f,
        exact: Some(exact),
        boundary: BoundaryData::Exact,
        eps_consistent_source: eps_consistent,
        lambda_lower,
    }
}

/// Constant symmetric positive definite matrix used by the smooth 2-D problems.
pub const CONSTANT_A: [f64; 3] = [2.0, 0.5, 1.0];

pub fn builtin_problem(name: &str) -> Result<ProblemSpec> {
    let square = Domain::Rectangle { x: (-2.0, 2.0), y: (-2.0, 2.0) };
    let unit = Domain::Rectangle { x: (0.0, 1.0), y: (0.0, 1.0) };
    let constant_a = || MatrixField::constant(CONSTANT_A[0], CONSTANT_A[1], CONSTANT_A[2]);
    let constant_lambda = super::symmetric_eigenvalues(CONSTANT_A).0;
    Ok(match name {
        "test1" | "test2" => manufactured(name, square, rough_coefficient(), false, None),
        "test3" => manufactured(name, Domain::Disk { radius: 2.0 }, rough_coefficient(), false, None),
        "test4" => {
            let mut spec = manufactured(name, square, degenerate_coefficient(), false, None);
            // A:D²u vanishes identically away from the axes.
            spec.f = constant(0.0);
            spec
        }
        "sine1d" => manufactured(
            name,
            Domain::Interval { a: 0.0, b: 1.0 },
            MatrixField::constant(1.0, 0.0, 0.0),
            true,
            Some(1.0),
        ),
        "quintic2d" | "const_coeff_2d" => manufactured(name, unit, constant_a(), true, Some(constant_lambda)),
        _ => return Err(Error::UnknownProblem(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ellipticity_probe;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn test1_coefficient_at_origin() {
        let a = builtin_problem("test1").unwrap().a.eval([0.0, 0.0]).unwrap();
        assert!(close(a[0], 4.0 * 2f64.exp(), 1e-12));
        assert!(close(a[0], 29.556, 1e-4));
        assert!(close(a[1], -0.5f64.sqrt(), 1e-12));
        assert_eq!(a[2], 3.0);
    }

    #[test]
    fn test4_is_rank_one() {
        let spec = builtin_problem("test4").unwrap();
        let a = spec.a.eval([1.0, 1.0]).unwrap();
        let s = 16.0 / 9.0;
        assert!(close(a[0], s, 1e-14) && close(a[1], -s, 1e-14) && close(a[2], s, 1e-14));
        let probe = ellipticity_probe(&spec.a, &spec.domain, 2000, 0);
        assert_eq!(probe.failures, 0);
        assert!(probe.min_eigenvalue.abs() < 1e-10);
    }

    #[test]
    fn test1_boundary_jet() {
        let e = exact_solution("test1").unwrap();
        let j = e.jet([2.0, 0.0]);
        assert!(close(j.value, 4.0 / 3.0, 1e-15));
        assert_eq!(j.gradient, [2.0, 0.0]);
        assert!(close(j.hessian[0], 2.0, 1e-15) && j.hessian[1] == 0.0 && close(j.hessian[2], -4.0 / 3.0, 1e-15));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(builtin_problem("test9"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn manufactured_sources_are_consistent() {
        for name in BUILTIN_NAMES {
            let spec = builtin_problem(name).unwrap();
            for p in spec.domain.halton_points(1000, 17) {
                let r = spec.source_residual(p).unwrap().unwrap();
                let scale = 1.0 + spec.f.eval(p).unwrap().abs();
                assert!(r.abs() <= 1e-9 * scale, "{name} at {p:?}: residual {r}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-5;
        for name in BUILTIN_NAMES {
            let spec = builtin_problem(name).unwrap();
            let e = spec.exact.as_ref().unwrap();
            let dim = spec.dimension();
            for p in spec.domain.halton_points(100, 5) {
                let m = (e.hessian)(p);
                assert!(((e.laplacian)(p) - m[0] - m[2]).abs() <= 1e-10);
                let g = (e.gradient)(p);
                for k in 0..dim {
                    let mut lo = p;
                    let mut hi = p;
                    lo[k] -= step;
                    hi[k] += step;
                    let fd = ((e.u)(hi) - (e.u)(lo)) / (2.0 * step);
                    assert!((fd - g[k]).abs() <= 1e-6 * (1.0 + g[k].abs()), "{name} d{k} at {p:?}: {fd} vs {}", g[k]);
                }
            }
        }
    }

    #[test]
    fn quintic_is_harmonic() {
        let e = exact_solution("quintic2d").unwrap();
        for p in (Domain::Rectangle { x: (0.0, 1.0), y: (0.0, 1.0) }).halton_points(50, 0) {
            assert_eq!((e.laplacian)(p), 0.0);
        }
    }
}
