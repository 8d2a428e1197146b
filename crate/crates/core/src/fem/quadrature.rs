//! Gauss–Legendre rules on `[0, 1]` and collapsed (Duffy) product rules on the
//! unit triangle `{x ≥ 0, y ≥ 0, x + y ≤ 1}`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest exactness degree served by [`quadrature_rule`].
pub const MAX_DEGREE: usize = 14;

#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub dimension: usize,
    /// Reference coordinates; the second component is zero in 1-D.
    pub points: Vec<[T; 2]>,
    /// Weights normalized to the reference measure (1 for `[0, 1]`, 1/2 for the triangle).
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the rule to `f` over the reference cell.
    pub fn integrate(&self, mut f: impl FnMut([T; 2]) -> T) -> T {
        self.points.iter().zip(&self.weights).fold(T::zero(), |acc, (&p, &w)| acc + w * f(p))
    }
}

pub fn quadrature_rule<T: Real>(dimension: usize, degree: usize) -> Result<QuadratureRule<T>> {
    if degree == 0 || degree > MAX_DEGREE || !(dimension == 1 || dimension == 2) {
        return Err(Error::UnsupportedQuadrature { dimension, degree });
    }
    if dimension == 1 {
        let n = (degree + 1).div_ceil(2);
        let (x, w) = gauss_legendre_unit::<T>(n);
        let actual = 2 * n - 1;
        return Ok(QuadratureRule {
            dimension,
            points: x.into_iter().map(|t| [t, T::zero()]).collect(),
            weights: w,
            degree: actual,
        });
    }
    // x = s, y = t (1 - s): the Jacobian (1 - s) raises the degree in s by one.
    let n = (degree + 2).div_ceil(2);
    let (x, w) = gauss_legendre_unit::<T>(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (s, ws) in x.iter().zip(&w) {
        for (t, wt) in x.iter().zip(&w) {
            let one_minus = T::one() - *s;
            points.push([*s, *t * one_minus]);
            weights.push(*ws * *wt * one_minus);
        }
    }
    Ok(QuadratureRule { dimension, points, weights, degree: 2 * n - 2 })
}

/// `n`-point Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let tol = T::epsilon() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root in descending order.
        let k = T::from_usize_lossy(i) + T::lit(0.75);
        let mut x = (T::PI() * k / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1], halving weights.
        nodes[i] = half * (T::one() - x);
        nodes[n - 1 - i] = half * (T::one() + x);
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_weights_sum_to_half() {
        for d in 1..=MAX_DEGREE {
            let q = quadrature_rule::<f64>(2, d).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            assert!(q.degree >= d);
        }
    }

    #[test]
    fn triangle_monomials_exact() {
        for d in 1..=MAX_DEGREE {
            let q = quadrature_rule::<f64>(2, d).unwrap();
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    assert!((got - exact).abs() <= 1e-13 * exact, "d={d} a={a} b={b}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn dirichlet_integral_x5y5() {
        let q = quadrature_rule::<f64>(2, 12).unwrap();
        let got = q.integrate(|p| p[0].powi(5) * p[1].powi(5));
        let exact = 1.0 / 33264.0;
        assert!((got - exact).abs() <= 1e-13 * exact);
    }

    #[test]
    fn interval_rules() {
        let q = quadrature_rule::<f64>(1, 7).unwrap();
        assert!((q.integrate(|p| p[0].powi(6)) - 1.0 / 7.0).abs() < 1e-14);
        for d in 1..=MAX_DEGREE {
            let q = quadrature_rule::<f64>(1, d).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for a in 0..=d as i32 {
                let got = q.integrate(|p| p[0].powi(a));
                assert!((got - 1.0 / (a as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unsupported_degree() {
        assert!(quadrature_rule::<f64>(2, 15).is_err());
        assert!(quadrature_rule::<f64>(3, 4).is_err());
        assert!(quadrature_rule::<f64>(1, 0).is_err());
    }

    #[test]
    fn single_precision_rule() {
        let q = quadrature_rule::<f32>(2, 8).unwrap();
        let got = q.integrate(|p| p[0].powi(3) * p[1].powi(2));
        let exact = (6.0 * 2.0 / factorial(7)) as f32;
        assert!((got - exact).abs() < 1e-6 * exact.max(1.0));
    }
}
