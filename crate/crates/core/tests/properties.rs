mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vmm::assembly::{apply_constraints, assemble_blocks, assemble_functional, boundary_values};
use vmm::fem::{argyris_basis, build_dof_map, hermite_basis, ElementKind};
use vmm::linalg::{generalized_symmetric_smallest_eig, solve_csr};
use vmm::mesh::{build_disk_mesh, build_interval_mesh, build_rectangle_mesh};
use vmm::problems::expr::{BinOp, Func};
use vmm::problems::{builtin_problem, parse_scalar_field, Expr};
use vmm::SparseSystem;

use common::{field, max_edge_jump, random_point_in_cell, Poly};

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-100.0f64..100.0).prop_map(Expr::Num),
        (0u32..6).prop_map(|k| Expr::Num(k as f64 / 4.0)),
        Just(Expr::X),
        Just(Expr::Y),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Abs), Just(Func::Sqrt)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (func, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::SgnPow, vec![a, b])),
        ]
    })
}

/// Well-conditioned random matrix: identity plus a small perturbation.
fn near_identity(rng: &mut StdRng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + scale * rng.random_range(-1.0..1.0) / n as f64)
}

fn spd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let m = near_identity(rng, n, 1.0);
    &m * m.transpose() + DMatrix::identity(n, n) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_reparse_pointwise_equal(e in expr_strategy(), seed in any::<u64>()) {
        let text = e.to_string();
        let back = parse_scalar_field(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..100 {
            let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            match (e.eval(x, y), back.eval(x, y)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?} at ({}, {})", a, b, x, y),
            }
        }
    }

    #[test]
    fn eigenvalue_invariant_under_congruence(n in 2usize..=30, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b) = (spd(&mut rng, n), spd(&mut rng, n));
        let s = near_identity(&mut rng, n, 0.5);
        let (l0, _) = generalized_symmetric_smallest_eig(&a, &b).unwrap();
        let (l1, _) = generalized_symmetric_smallest_eig(&(s.transpose() * &a * &s), &(s.transpose() * &b * &s)).unwrap();
        prop_assert!((l0 - l1).abs() <= 1e-8 * l0.abs());
    }

    #[test]
    fn smallest_eigenvalue_matches_inverse_iteration(seed in any::<u64>()) {
        // Pencil with prescribed spectrum: A = W D Wᵀ, B = W Wᵀ, smallest eigenvalue 1 with gap 2.
        let n = 20;
        let mut rng = StdRng::seed_from_u64(seed);
        let w = near_identity(&mut rng, n, 1.0);
        let d: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { rng.random_range(2.0..10.0) }).collect();
        let a = &w * DMatrix::from_diagonal(&DVector::from_vec(d)) * w.transpose();
        let b = &w * w.transpose();
        let (lambda, x) = generalized_symmetric_smallest_eig(&a, &b).unwrap();

        let lu = a.clone().lu();
        let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        for _ in 0..120 {
            v = lu.solve(&(&b * &v)).unwrap();
            v /= v.norm();
        }
        let oracle = v.dot(&(&a * &v)) / v.dot(&(&b * &v));
        prop_assert!((lambda - oracle).abs() <= 1e-8 * oracle);
        prop_assert!((lambda - 1.0).abs() <= 1e-8);
        prop_assert!((x.dot(&(&b * &x)) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn laplacian_is_hessian_trace(s in 0.0f64..1.0, t in 0.0f64..1.0, skew in -0.8f64..0.8, len in 0.05f64..3.0) {
        let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
        let tri = [[0.0, 0.0], [len, 0.0], [skew * len, 0.9 * len]];
        let p = [tri[1][0] * s + tri[2][0] * t, tri[2][1] * t];
        for b in [argyris_basis(tri, p).unwrap(), hermite_basis(s, len)] {
            for (l, h) in b.laplacians.iter().zip(&b.hessians) {
                prop_assert!((l - (h[0] + h[2])).abs() <= 1e-13 * (1.0 + l.abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn global_interpolants_are_c1(seed in any::<u64>(), disk in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mesh = Arc::new(if disk { build_disk_mesh(1.5, 9, 1).unwrap() } else { build_rectangle_mesh((-1.0, 2.0), (0.0, 1.0), 3).unwrap() });
        let map = Arc::new(build_dof_map(mesh.as_ref(), ElementKind::Argyris5).unwrap());
        let poly = Poly::random(&mut rng, 5, 2);
        let sol = field(&mesh, &map, map.interpolate(mesh.as_ref(), &|p| poly.jet(p)));
        prop_assert!(max_edge_jump(&sol, &mut rng, 20) <= 1e-8);
    }

    #[test]
    fn interpolation_reproduces_polynomials(seed in any::<u64>(), two_d in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (mesh, kind, degree) = if two_d {
            (build_disk_mesh(1.0, 6, 1).unwrap(), ElementKind::Argyris5, 5)
        } else {
            (build_interval_mesh(-1.0, 1.0, 7).unwrap(), ElementKind::Hermite3, 3)
        };
        let mesh = Arc::new(mesh);
        let map = Arc::new(build_dof_map(mesh.as_ref(), kind).unwrap());
        let poly = Poly::random(&mut rng, degree, mesh.dimension());
        let sol = field(&mesh, &map, map.interpolate(mesh.as_ref(), &|p| poly.jet(p)));
        for _ in 0..100 {
            let c = rng.random_range(0..mesh.num_cells());
            let p = random_point_in_cell(&mesh, c, &mut rng);
            let (got, want) = (sol.cell_jet(c, p).unwrap(), poly.jet(p));
            prop_assert!((got.value - want.value).abs() <= 1e-9 * (1.0 + want.value.abs()));
            prop_assert!((got.laplacian() - want.laplacian()).abs() <= 1e-7 * (1.0 + want.laplacian().abs()));
        }
    }

    #[test]
    fn solution_is_linear_in_the_source(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (k1, k2): (f64, f64) = (rng.random_range(1.0..4.0), rng.random_range(1.0..4.0));
        let mut spec = builtin_problem("sine1d").unwrap();
        spec.boundary = vmm::problems::BoundaryData::Homogeneous;
        let mesh = build_interval_mesh(0.0, 1.0, 16).unwrap();
        let map = build_dof_map(&mesh, ElementKind::Hermite3).unwrap();
        let matrix = assemble_blocks(&mesh, &map, &spec, None).unwrap().operator(1e-3);
        let constraints = boundary_values(&mesh, &map, &spec).unwrap();
        let solve = |f: &(dyn Fn([f64; 2]) -> Result<f64, vmm::problems::EvalError> + Sync)| {
            let load = assemble_functional(&mesh, &map, None, f).unwrap();
            let system = SparseSystem { matrix: matrix.clone(), load, constraints: vec![], symmetric: false };
            let system = apply_constraints(system, constraints.clone());
            let (x, report) = solve_csr(&system.matrix, &system.load);
            assert!(!report.singular);
            x
        };
        let f1 = move |p: [f64; 2]| Ok((k1 * p[0]).sin());
        let f2 = move |p: [f64; 2]| Ok((k2 * p[0]).exp());
        let (x1, x2, x12) = (solve(&f1), solve(&f2), solve(&|p| Ok(f1(p)? + f2(p)?)));
        let scale = x12.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..x12.len() {
            prop_assert!((x12[i] - x1[i] - x2[i]).abs() <= 1e-9 * scale);
        }
    }
}
