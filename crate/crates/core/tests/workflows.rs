mod common;

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use nalgebra::DMatrix;

use vmm::assembly::{assemble_gram, boundary_values, GramKind};
use vmm::diagnostics::{dense_block, discrete_cz_constant, discrete_dual_norm, CzOptions, DualNormKind};
use vmm::fem::{build_dof_map, ElementKind};
use vmm::io::{read_table, write_field, FIELD_HEADER, TABLE_HEADER};
use vmm::mesh::build_interval_mesh;
use vmm::problems::{builtin_problem, MatrixField, MeshParams};
use vmm::study::{convergence_study, error_norms, h2_norm, solve_vmm, source_l2_norm, Schedule, SolutionField};

use common::{field, sha256_file};

fn vmm(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_vmm")).args(args).output().unwrap();
    out.status.code().unwrap_or(-1)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn test1_halving_study_writes_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let code = vmm(&["study", "--problem", "test1", "--eps-start", "4e-2", "--halvings", "3", "--n", "32", "--out", p(&out)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(TABLE_HEADER));
    let table = read_table(&out, true).unwrap();
    assert_eq!(table.rows.len(), 4);
    let eps: Vec<f64> = table.rows.iter().map(|r| r.eps).collect();
    assert_eq!(eps, [4e-2, 2e-2, 1e-2, 5e-3]);
    assert!(table.rows.windows(2).all(|w| w[1].l2_err < w[0].l2_err));
    // First row is the same order of magnitude as the reference value 9.44e-3.
    assert!((1e-3..1e-1).contains(&table.rows[0].l2_err));
}

#[test]
fn solve_sine_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.csv");
    assert_eq!(vmm(&["solve", "--problem", "sine1d", "--eps", "1e-4", "--n", "64", "--out", p(&out)]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(FIELD_HEADER));
    assert_eq!(text.lines().count(), 42);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(vmm(&["study", "--problem", "test1", "--eps-start", "4e-2", "--halvings", "2", "--coupled-beta", "2", "--levels", "4,8"]), 1);
    assert_eq!(vmm(&["solve", "--problem", "nope", "--eps", "1e-2"]), 1);
    assert_eq!(vmm(&["solve", "--problem", "sine1d"]), 1);
}

#[test]
fn concurrent_runs_match_sequential_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = |out: &Path| -> Vec<String> {
        ["study", "--problem", "test2", "--eps-list", "4e-2,2e-2", "--n", "8", "--out", p(out)].map(String::from).to_vec()
    };
    let seq = dir.path().join("seq.csv");
    assert_eq!(vmm(&cmd(&seq).iter().map(String::as_str).collect::<Vec<_>>()), 0);
    let children: Vec<_> = (0..3)
        .map(|k| {
            let out = dir.path().join(format!("par{k}.csv"));
            let child = Command::new(env!("CARGO_BIN_EXE_vmm")).args(cmd(&out)).env("VMM_THREADS", "2").spawn().unwrap();
            (out, child)
        })
        .collect();
    for (out, mut child) in children {
        assert!(child.wait().unwrap().success());
        assert_eq!(sha256_file(&out), sha256_file(&seq));
    }
}

#[test]
fn diagnose_and_validate_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cz = dir.path().join("cz.csv");
    assert_eq!(vmm(&["diagnose", "--problem", "sine1d", "--levels", "4,8,16", "--out", p(&cz)]), 0);
    assert_eq!(std::fs::read_to_string(&cz).unwrap().lines().count(), 4);
    let mesh = dir.path().join("mesh.txt");
    assert_eq!(vmm(&["validate", "--problem", "test3", "--n-boundary", "8", "--refine", "1", "--mesh-out", p(&mesh)]), 0);
    assert!(std::fs::read_to_string(&mesh).unwrap().contains("vertices"));
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/variable_1d.toml");
    assert_eq!(vmm(&["validate", "--config", config, "--n", "8"]), 0);
}

#[test]
fn zero_field_dumps_zero_column() {
    let spec = builtin_problem("test2").unwrap();
    let mesh = Arc::new(spec.domain.build_mesh(&MeshParams::uniform(4)).unwrap());
    let map = Arc::new(build_dof_map(mesh.as_ref(), ElementKind::Argyris5).unwrap());
    let sol = field(&mesh, &map, vec![0.0; map.num_dofs()]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero.csv");
    write_field(&sol, spec.exact.as_ref(), &spec.domain, 9, &out).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 81);
    assert!(rows.iter().all(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap() == 0.0));
}

#[test]
fn test1_laplacian_error_concentrates_on_the_kink_line() {
    // Interior of the domain; the boundary layer of width O(√ε) dominates near ∂Ω.
    let spec = builtin_problem("test1").unwrap();
    let mesh = Arc::new(spec.domain.build_mesh(&MeshParams::uniform(32)).unwrap());
    let sol = solve_vmm(&spec, mesh, 1e-2, None).unwrap();
    let exact = spec.exact.as_ref().unwrap();
    let mut worst = ([0.0, 0.0], 0.0f64);
    for j in 0..81 {
        for i in 0..81 {
            let q = [-2.0 + 0.05 * i as f64, -2.0 + 0.05 * j as f64];
            if q[0].abs() > 1.75 || q[1].abs() > 1.75 {
                continue;
            }
            let e = (sol.eval(q).unwrap().laplacian() - (exact.laplacian)(q)).abs();
            if e > worst.1 {
                worst = (q, e);
            }
        }
    }
    assert!(worst.0[0].abs() < 1e-12, "max at {:?}", worst.0);
}

#[test]
fn test1_boundary_vertex_data() {
    let spec = builtin_problem("test1").unwrap();
    let mesh = spec.domain.build_mesh(&MeshParams::uniform(4)).unwrap();
    let map = build_dof_map(&mesh, ElementKind::Argyris5).unwrap();
    let v = (0..mesh.num_vertices()).find(|&v| mesh.vertex(v) == [2.0, 0.0]).unwrap();
    let values = boundary_values(&mesh, &map, &spec).unwrap();
    let expected = [4.0 / 3.0, 2.0, 0.0, 2.0, 0.0, -4.0 / 3.0];
    for (k, want) in expected.iter().enumerate() {
        let dof = 6 * v + k;
        let got = values.iter().find(|(d, _)| *d == dof).unwrap().1;
        assert!((got - want).abs() < 1e-12, "component {k}: {got} vs {want}");
    }
}

#[test]
fn h2_stability_ratio_is_bounded_under_coupling() {
    let spec = builtin_problem("test1").unwrap();
    let ratios: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let mesh = Arc::new(spec.domain.build_mesh(&MeshParams::uniform(n)).unwrap());
            let eps = mesh.h().powi(2);
            let sol = solve_vmm(&spec, mesh.clone(), eps, None).unwrap();
            h2_norm(&sol, None).unwrap() / source_l2_norm(&spec, &mesh, eps, None).unwrap()
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 5.0, "{ratios:?}");
}

#[test]
fn l2_error_decreases_along_reference_schedules() {
    for (name, eps, mesh) in [
        ("test1", vec![4e-2, 2e-2, 1e-2], MeshParams::uniform(16)),
        ("test2", vec![4e-2, 2e-2, 1e-2], MeshParams::uniform(16)),
        ("test3", vec![5e-3, 2.5e-3, 1.25e-3], MeshParams::disk(16, 3)),
    ] {
        let spec = builtin_problem(name).unwrap();
        let table = convergence_study(&spec, &Schedule::EpsList { eps, mesh }, None).unwrap();
        assert!(table.rows.windows(2).all(|w| w[1].l2_err < w[0].l2_err), "{name}");
    }
}

#[test]
fn zero_solution_error_against_sine() {
    let spec = builtin_problem("sine1d").unwrap();
    let mesh = Arc::new(build_interval_mesh(0.0, 1.0, 16).unwrap());
    let map = Arc::new(build_dof_map(mesh.as_ref(), ElementKind::Hermite3).unwrap());
    let sol: SolutionField = field(&mesh, &map, vec![0.0; map.num_dofs()]);
    let e = error_norms(&sol, spec.exact.as_ref().unwrap(), None).unwrap();
    assert!((e.l2 - 0.5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn dual_norm_of_a_discrete_function_is_its_l2_norm() {
    let mesh = Arc::new(build_interval_mesh(0.0, 1.0, 8).unwrap());
    let map = Arc::new(build_dof_map(mesh.as_ref(), ElementKind::Hermite3).unwrap());
    // Interpolant of x²(1−x)²: a member of V_h with zero boundary values.
    let coeffs = map.interpolate(mesh.as_ref(), &|p| {
        let x = p[0];
        let mut j = vmm::Jet::zero();
        j.value = x * x * (1.0 - x) * (1.0 - x);
        j.gradient[0] = 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
        j
    });
    let mass = assemble_gram(&mesh, &map, GramKind::L2, None).unwrap();
    let exact = coeffs.iter().zip(mass.matvec(&coeffs)).map(|(a, b)| a * b).sum::<f64>().sqrt();
    let sol = field(&mesh, &map, coeffs);
    let v = |p: [f64; 2]| Ok(sol.eval(p).unwrap().value);
    let dual = discrete_dual_norm(&v, &mesh, &map, DualNormKind::L2h, None).unwrap();
    assert!((dual - exact).abs() <= 1e-10 * exact, "{dual} vs {exact}");
}

#[test]
fn adjoint_constant_matches_primal_for_symmetric_operator() {
    let spec = builtin_problem("sine1d").unwrap();
    let mesh = build_interval_mesh(0.0, 1.0, 8).unwrap();
    let primal = discrete_cz_constant(&spec, &mesh, 1e-2, false, CzOptions::default()).unwrap().c_h;
    let adjoint = discrete_cz_constant(&spec, &mesh, 1e-2, true, CzOptions::default()).unwrap().c_h;
    assert!((primal - adjoint).abs() <= 1e-8 * primal);
}

#[test]
fn unit_coefficient_constants_stay_within_factor_three() {
    let mut spec = builtin_problem("sine1d").unwrap();
    spec.a = MatrixField::constant(1.0, 0.0, 0.0);
    let c: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let mesh = build_interval_mesh(0.0, 1.0, n).unwrap();
            discrete_cz_constant(&spec, &mesh, 1.0 / (n * n) as f64, false, CzOptions::default()).unwrap().c_h
        })
        .collect();
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0 && hi / lo < 3.0, "{c:?}");
}

#[test]
fn h2_gram_is_positive_definite() {
    let mesh = build_interval_mesh(0.0, 1.0, 4).unwrap();
    let map = build_dof_map(&mesh, ElementKind::Hermite3).unwrap();
    let free = map.free_dofs();
    let g: DMatrix<f64> = dense_block(&assemble_gram(&mesh, &map, GramKind::H2, None).unwrap(), &free, &free);
    let min = g.symmetric_eigen().eigenvalues.min();
    assert!(min > 0.0);
}
