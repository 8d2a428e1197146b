#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;
use sha2::{Digest, Sha256};

use vmm::fem::DofMap;
use vmm::Jet;
use vmm::linalg::SolveReport;
use vmm::{Mesh, SolutionField};

/// Bivariate polynomial `Σ c_ij x^i y^j` over `i + j ≤ degree`.
#[derive(Debug, Clone)]
pub struct Poly {
    pub terms: Vec<(i32, i32, f64)>,
}

impl Poly {
    pub fn random(rng: &mut StdRng, degree: i32, dimension: usize) -> Self {
        let mut terms = Vec::new();
        for i in 0..=degree {
            for j in 0..=(degree - i) {
                if dimension == 1 && j > 0 {
                    continue;
                }
                terms.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        Poly { terms }
    }

    pub fn jet(&self, p: [f64; 2]) -> Jet {
        let pw = |t: f64, k: i32| if k < 0 { 0.0 } else { t.powi(k) };
        let (x, y) = (p[0], p[1]);
        let mut j = Jet::zero();
        for &(a, b, c) in &self.terms {
            let (af, bf) = (a as f64, b as f64);
            j.value += c * pw(x, a) * pw(y, b);
            j.gradient[0] += c * af * pw(x, a - 1) * pw(y, b);
            j.gradient[1] += c * bf * pw(x, a) * pw(y, b - 1);
            j.hessian[0] += c * af * (af - 1.0) * pw(x, a - 2) * pw(y, b);
            j.hessian[1] += c * af * bf * pw(x, a - 1) * pw(y, b - 1);
            j.hessian[2] += c * bf * (bf - 1.0) * pw(x, a) * pw(y, b - 2);
        }
        j
    }
}

pub fn field(mesh: &Arc<Mesh>, dofmap: &Arc<DofMap>, coeffs: Vec<f64>) -> SolutionField {
    let report = SolveReport { relative_residual: 0.0, pivot_growth: 1.0, singular: false };
    SolutionField::new(mesh.clone(), dofmap.clone(), coeffs, 0.0, report)
}

/// Largest relative jump of value or gradient across interior edges, sampled at
/// `samples` random points per edge.
pub fn max_edge_jump(sol: &SolutionField, rng: &mut StdRng, samples: usize) -> f64 {
    let mesh = sol.mesh.as_ref();
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_edges() {
        let (c0, Some(c1)) = mesh.edge_cells(e) else { continue };
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        for _ in 0..samples {
            let t: f64 = rng.random();
            let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
            let (j0, j1) = (sol.cell_jet(c0, p).unwrap(), sol.cell_jet(c1, p).unwrap());
            let pairs = [(j0.value, j1.value), (j0.gradient[0], j1.gradient[0]), (j0.gradient[1], j1.gradient[1])];
            for (u, v) in pairs {
                worst = worst.max((u - v).abs() / (1.0 + u.abs().max(v.abs())));
            }
        }
    }
    worst
}

pub fn sha256_file(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Random point in triangle `c` (or on segment `c` in 1-D).
pub fn random_point_in_cell(mesh: &Mesh, c: usize, rng: &mut StdRng) -> [f64; 2] {
    let [p0, p1, p2] = mesh.cell_points(c);
    if mesh.dimension() == 1 {
        let t: f64 = rng.random();
        return [p0[0] + t * (p1[0] - p0[0]), 0.0];
    }
    let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
    if s + t > 1.0 {
        (s, t) = (1.0 - s, 1.0 - t);
    }
    [p0[0] + s * (p1[0] - p0[0]) + t * (p2[0] - p0[0]), p0[1] + s * (p1[1] - p0[1]) + t * (p2[1] - p0[1])]
}
