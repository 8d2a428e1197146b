//! Quintic Argyris element built directly on the physical triangle.
//!
//! The 21 basis functions are the dual basis of the degree-of-freedom
//! functionals, obtained by inverting the generalized Vandermonde matrix of
//! those functionals applied to the quintic monomials. Monomials are taken in
//! coordinates shifted to the first vertex and scaled by the longest edge.
//!
//! Local DOF order: for each vertex `k = 0, 1, 2` the six entries
//! `u, ∂x u, ∂y u, ∂xx u, ∂xy u, ∂yy u` (slots `6k..6k + 6`), then the normal
//! derivative at the midpoint of local edge `k` (slot `18 + k`), where local
//! edge `k` runs from vertex `k` to vertex `k + 1`.

use super::element::BasisEval;
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

pub const LOCAL_DOFS: usize = 21;

/// Condition estimate of the scaled Vandermonde matrix above which an element is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Exponents `(a, b)` of `ξ^a η^b`, ordered by total degree.
const MONOMIALS: [(usize, usize); LOCAL_DOFS] = {
    let mut out = [(0, 0); LOCAL_DOFS];
    let mut k = 0;
    let mut d = 0;
    while d <= 5 {
        let mut b = 0;
        while b <= d {
            out[k] = (d - b, b);
            k += 1;
            b += 1;
        }
        d += 1;
    }
    out
};

/// Derivative order of each local functional.
const DOF_ORDER: [i32; LOCAL_DOFS] = [0, 1, 1, 2, 2, 2, 0, 1, 1, 2, 2, 2, 0, 1, 1, 2, 2, 2, 1, 1, 1];

#[derive(Debug, Clone)]
pub struct ArgyrisElement<T> {
    origin: [T; 2],
    scale: T,
    /// `coeffs[m * 21 + i]`: coefficient of monomial `m` in basis function `i`.
    coeffs: Vec<T>,
    condition: T,
}

/// Value and derivatives of the 21 monomials in scaled coordinates.
struct MonomialJet<T> {
    v: [T; LOCAL_DOFS],
    dx: [T; LOCAL_DOFS],
    dy: [T; LOCAL_DOFS],
    dxx: [T; LOCAL_DOFS],
    dxy: [T; LOCAL_DOFS],
    dyy: [T; LOCAL_DOFS],
}

fn monomial_jet<T: Real>(xi: T, eta: T) -> MonomialJet<T> {
    let mut px = [T::one(); 6];
    let mut py = [T::one(); 6];
    for k in 1..6 {
        px[k] = px[k - 1] * xi;
        py[k] = py[k - 1] * eta;
    }
    let z = T::zero();
    let mut out = MonomialJet {
        v: [z; LOCAL_DOFS],
        dx: [z; LOCAL_DOFS],
        dy: [z; LOCAL_DOFS],
        dxx: [z; LOCAL_DOFS],
        dxy: [z; LOCAL_DOFS],
        dyy: [z; LOCAL_DOFS],
    };
    for (m, &(a, b)) in MONOMIALS.iter().enumerate() {
        let af = T::from_usize_lossy(a);
        let bf = T::from_usize_lossy(b);
        out.v[m] = px[a] * py[b];
        if a >= 1 {
            out.dx[m] = af * px[a - 1] * py[b];
        }
        if b >= 1 {
            out.dy[m] = bf * px[a] * py[b - 1];
        }
        if a >= 2 {
            out.dxx[m] = af * (af - T::one()) * px[a - 2] * py[b];
        }
        if a >= 1 && b >= 1 {
            out.dxy[m] = af * bf * px[a - 1] * py[b - 1];
        }
        if b >= 2 {
            out.dyy[m] = bf * (bf - T::one()) * px[a] * py[b - 2];
        }
    }
    out
}

impl<T: Real> ArgyrisElement<T> {
    /// Builds the element on a counter-clockwise triangle. `normal_signs[k]`
    /// flips the midpoint normal-derivative functional of local edge `k`
    /// relative to the outward normal.
    ///
    /// Returns the condition estimate as the error when it exceeds [`MAX_CONDITION`]
    /// or the functional matrix is singular.
    pub fn new(triangle: [[T; 2]; 3], normal_signs: [T; 3]) -> Result<Self, f64> {
        let origin = triangle[0];
        let dist = |a: [T; 2], b: [T; 2]| (b[0] - a[0]).hypot(b[1] - a[1]);
        let scale = dist(triangle[0], triangle[1]).max(dist(triangle[1], triangle[2])).max(dist(triangle[2], triangle[0]));
        if !(scale > T::zero()) {
            return Err(f64::INFINITY);
        }
        let local = triangle.map(|p| [(p[0] - origin[0]) / scale, (p[1] - origin[1]) / scale]);

        // Row r of the Vandermonde matrix is functional r applied to each monomial.
        let mut vandermonde = DenseMatrix::<T>::zeros(LOCAL_DOFS, LOCAL_DOFS);
        for (k, q) in local.iter().enumerate() {
            let jet = monomial_jet(q[0], q[1]);
            let rows = [&jet.v, &jet.dx, &jet.dy, &jet.dxx, &jet.dxy, &jet.dyy];
            for (r, row) in rows.iter().enumerate() {
                for m in 0..LOCAL_DOFS {
                    vandermonde[(6 * k + r, m)] = row[m];
                }
            }
        }
        let half = T::lit(0.5);
        for k in 0..3 {
            let (a, b) = (local[k], local[(k + 1) % 3]);
            let mid = [(a[0] + b[0]) * half, (a[1] + b[1]) * half];
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = t[0].hypot(t[1]);
            let normal = [t[1] / len, -t[0] / len];
            let jet = monomial_jet(mid[0], mid[1]);
            for m in 0..LOCAL_DOFS {
                vandermonde[(18 + k, m)] = normal[0] * jet.dx[m] + normal[1] * jet.dy[m];
            }
        }

        let inverse = vandermonde.inverse().ok_or(f64::INFINITY)?;
        let condition = vandermonde.norm1() * inverse.norm1();
        if !(condition.to_f64_lossy() <= MAX_CONDITION) {
            return Err(condition.to_f64_lossy());
        }
        // Dual to the physical functionals: undo the scaling of each derivative
        // order and apply the edge orientation.
        let mut coeffs = vec![T::zero(); LOCAL_DOFS * LOCAL_DOFS];
        for i in 0..LOCAL_DOFS {
            let mut factor = scale.powi(DOF_ORDER[i]);
            if i >= 18 {
                factor *= normal_signs[i - 18];
            }
            for m in 0..LOCAL_DOFS {
                coeffs[m * LOCAL_DOFS + i] = inverse[(m, i)] * factor;
            }
        }
        Ok(ArgyrisElement { origin, scale, coeffs, condition })
    }

    pub fn condition(&self) -> T {
        self.condition
    }

    pub fn eval(&self, point: [T; 2]) -> BasisEval<T> {
        let mut out = BasisEval::with_len(LOCAL_DOFS);
        self.eval_into(point, &mut out);
        out
    }

    pub fn eval_into(&self, point: [T; 2], out: &mut BasisEval<T>) {
        let inv = T::one() / self.scale;
        let inv2 = inv * inv;
        let jet = monomial_jet((point[0] - self.origin[0]) * inv, (point[1] - self.origin[1]) * inv);
        for i in 0..LOCAL_DOFS {
            let (mut v, mut dx, mut dy, mut dxx, mut dxy, mut dyy) =
                (T::zero(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
            for m in 0..LOCAL_DOFS {
                let c = self.coeffs[m * LOCAL_DOFS + i];
                v += c * jet.v[m];
                dx += c * jet.dx[m];
                dy += c * jet.dy[m];
                dxx += c * jet.dxx[m];
                dxy += c * jet.dxy[m];
                dyy += c * jet.dyy[m];
            }
            out.values[i] = v;
            out.gradients[i] = [dx * inv, dy * inv];
            let hessian = [dxx * inv2, dxy * inv2, dyy * inv2];
            out.hessians[i] = hessian;
            out.laplacians[i] = hessian[0] + hessian[2];
        }
    }
}

/// Basis on a physical triangle with outward edge normals, evaluated at `point`.
pub fn argyris_basis<T: Real>(triangle: [[T; 2]; 3], point: [T; 2]) -> Result<BasisEval<T>, f64> {
    Ok(ArgyrisElement::new(triangle, [T::one(); 3])?.eval(point))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply_functionals(tri: [[f64; 2]; 3], basis: impl Fn([f64; 2]) -> BasisEval<f64>) -> DenseMatrix<f64> {
        let mut out = DenseMatrix::zeros(LOCAL_DOFS, LOCAL_DOFS);
        for k in 0..3 {
            let b = basis(tri[k]);
            for i in 0..LOCAL_DOFS {
                out[(6 * k, i)] = b.values[i];
                out[(6 * k + 1, i)] = b.gradients[i][0];
                out[(6 * k + 2, i)] = b.gradients[i][1];
                out[(6 * k + 3, i)] = b.hessians[i][0];
                out[(6 * k + 4, i)] = b.hessians[i][1];
                out[(6 * k + 5, i)] = b.hessians[i][2];
            }
        }
        for k in 0..3 {
            let (a, c) = (tri[k], tri[(k + 1) % 3]);
            let mid = [(a[0] + c[0]) / 2.0, (a[1] + c[1]) / 2.0];
            let t = [c[0] - a[0], c[1] - a[1]];
            let len = t[0].hypot(t[1]);
            let n = [t[1] / len, -t[0] / len];
            let b = basis(mid);
            for i in 0..LOCAL_DOFS {
                out[(18 + k, i)] = n[0] * b.gradients[i][0] + n[1] * b.gradients[i][1];
            }
        }
        out
    }

    #[test]
    fn duality_on_reference_and_skewed_triangles() {
        let triangles = [
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            [[0.3, -0.2], [0.41, 0.05], [0.28, 0.09]],
            [[-2.0, -2.0], [-1.875, -2.0], [-1.875, -1.875]],
        ];
        for tri in triangles {
            let element = ArgyrisElement::new(tri, [1.0; 3]).unwrap();
            let m = apply_functionals(tri, |p| element.eval(p));
            for i in 0..LOCAL_DOFS {
                for j in 0..LOCAL_DOFS {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((m[(i, j)] - e).abs() < 1e-9, "tri {tri:?} entry ({i},{j}) = {}", m[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn quintic_x5_at_centroid() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let element = ArgyrisElement::new(tri, [1.0; 3]).unwrap();
        let jet = |x: f64, _y: f64| [x.powi(5), 5.0 * x.powi(4), 0.0, 20.0 * x.powi(3), 0.0, 0.0];
        let mut dofs = [0.0; LOCAL_DOFS];
        for k in 0..3 {
            dofs[6 * k..6 * k + 6].copy_from_slice(&jet(tri[k][0], tri[k][1]));
        }
        for k in 0..3 {
            let (a, c) = (tri[k], tri[(k + 1) % 3]);
            let mid = [(a[0] + c[0]) / 2.0, (a[1] + c[1]) / 2.0];
            let t = [c[0] - a[0], c[1] - a[1]];
            let len = t[0].hypot(t[1]);
            let g = jet(mid[0], mid[1]);
            dofs[18 + k] = t[1] / len * g[1] - t[0] / len * g[2];
        }
        let value = element.eval([1.0 / 3.0, 1.0 / 3.0]).combine(&dofs).value;
        assert!((value - (1.0f64 / 3.0).powi(5)).abs() < 1e-9);
        assert!((value - 4.1152e-3).abs() < 1e-7);
    }

    #[test]
    fn constants_have_no_derivatives() {
        let tri = [[0.1, 0.2], [0.9, 0.1], [0.4, 0.8]];
        let element = ArgyrisElement::new(tri, [1.0; 3]).unwrap();
        let mut dofs = [0.0; LOCAL_DOFS];
        for k in 0..3 {
            dofs[6 * k] = 1.0;
        }
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let (mut a, mut b) = (rnd(), rnd());
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            let p = [
                tri[0][0] + a * (tri[1][0] - tri[0][0]) + b * (tri[2][0] - tri[0][0]),
                tri[0][1] + a * (tri[1][1] - tri[0][1]) + b * (tri[2][1] - tri[0][1]),
            ];
            let eval = element.eval(p);
            let jet = eval.combine(&dofs);
            assert!((jet.value - 1.0).abs() < 1e-12);
            assert!(jet.gradient.iter().all(|g| g.abs() < 1e-10));
            assert!(jet.hessian.iter().all(|h| h.abs() < 1e-8));
            for i in 0..LOCAL_DOFS {
                assert_eq!(eval.laplacians[i], (eval.hessians[i][0] + eval.hessians[i][2]));
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [2.0, 1e-14]];
        assert!(ArgyrisElement::new(tri, [1.0; 3]).is_err());
        assert!(argyris_basis([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [0.0, 0.0]).is_err());
    }
}
