//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{cz_from_operators, uniformity_ratio, CzOperators, CzOptions, DENSE_CEILING};
use crate::error::Error;
use crate::io::{write_cz, write_field, write_mesh, write_table};
use crate::mesh::validate_mesh;
use crate::problems::{builtin_problem, ellipticity_probe, load_problem_config, Domain, MeshParams, ProblemSpec};
use crate::study::{convergence_study, error_norms, Schedule, VmmSolver};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "VMM_THREADS";
/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "vmm", version, about = "C1 finite elements for the vanishing moment method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve once and dump the field.
    Solve(SolveArgs),
    /// Run an ε or h convergence study and write the table.
    Study(StudyArgs),
    /// Probe discrete Calderón–Zygmund constants.
    Diagnose(DiagnoseArgs),
    /// Build and validate the mesh; probe the ellipticity of A.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Built-in problem name.
    #[arg(long, conflicts_with = "config")]
    problem: Option<String>,
    /// TOML problem configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Quadrature exactness degree override.
    #[arg(long)]
    quad_degree: Option<usize>,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Cells per side (intervals, rectangles).
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Boundary polygon size (disks).
    #[arg(long, default_value_t = 12)]
    n_boundary: usize,
    /// Uniform refinements (disks).
    #[arg(long, default_value_t = 2)]
    refine: usize,
}

impl MeshArgs {
    fn params(&self) -> MeshParams {
        MeshParams { n: self.n, disk_boundary: self.n_boundary, disk_refine: self.refine }
    }

    /// Mesh sequence from `--levels`: cells per side, or refinement counts for disks.
    fn sequence(&self, domain: &Domain, levels: &[usize]) -> Vec<MeshParams> {
        levels
            .iter()
            .map(|&l| match domain {
                Domain::Disk { .. } => MeshParams { disk_refine: l, ..self.params() },
                _ => MeshParams { n: l, ..self.params() },
            })
            .collect()
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    mesh: MeshArgs,
    #[arg(long)]
    eps: f64,
    /// Field CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample points per axis for the field CSV.
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Treat a singular solve as an expected outcome.
    #[arg(long)]
    expect_singular: bool,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    mesh: MeshArgs,
    /// Comma-separated ε values on a fixed mesh.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// First ε of a halving schedule on a fixed mesh.
    #[arg(long, requires = "halvings")]
    eps_start: Option<f64>,
    #[arg(long, requires = "eps_start")]
    halvings: Option<usize>,
    /// ε = h^β over `--levels`.
    #[arg(long, requires = "levels")]
    coupled_beta: Option<f64>,
    /// Fixed ε over `--levels`.
    #[arg(long, requires = "levels")]
    eps: Option<f64>,
    /// Mesh levels: cells per side, or refinement counts for disks.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Table CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    expect_singular: bool,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    mesh: MeshArgs,
    /// Fixed ε; otherwise ε = h^β.
    #[arg(long, conflicts_with = "coupled_beta")]
    eps: Option<f64>,
    #[arg(long)]
    coupled_beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Probe the adjoint operator.
    #[arg(long)]
    adjoint: bool,
    #[arg(long, default_value_t = DENSE_CEILING)]
    ceiling: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    mesh: MeshArgs,
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Ellipticity probe sample count.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Offset into the quasi-random probe sequence.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownProblem(_) | Error::Parse(_) | Error::UnsupportedQuadrature { .. } | Error::InvalidMesh(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn load_problem(args: &ProblemArgs) -> std::result::Result<ProblemSpec, Failure> {
    match (&args.problem, &args.config) {
        (Some(name), None) => Ok(builtin_problem(name)?),
        (None, Some(path)) => Ok(load_problem_config(path)?),
        _ => Err(Failure::Usage("exactly one of --problem or --config is required".into())),
    }
}

/// Applies the thread-count environment variable to the global pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only when the pool already exists, in which case it is left as is.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Study(a) => study(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn solve(a: SolveArgs) -> CliResult {
    let problem = load_problem(&a.problem)?;
    let mesh = Arc::new(problem.domain.build_mesh(&a.mesh.params())?);
    if let Some(path) = &a.mesh_out {
        write_mesh(&mesh, path)?;
    }
    let solver = VmmSolver::new(&problem, mesh.clone(), a.problem.quad_degree)?;
    let sol = solver.solve(a.eps)?;
    println!(
        "problem={} eps={:e} h={:e} dofs={} residual={:e} singular={}",
        problem.name,
        a.eps,
        mesh.h(),
        solver.dofmap.num_dofs(),
        sol.report.relative_residual,
        sol.report.singular
    );
    if let Some(exact) = &problem.exact {
        if !sol.report.singular {
            let e = error_norms(&sol, exact, a.problem.quad_degree)?;
            println!("l2_err={:e} h1_err={:e} lap_err={:e}", e.l2, e.h1, e.lap);
        }
    }
    if let Some(path) = &a.out {
        write_field(&sol, problem.exact.as_ref(), &problem.domain, a.grid, path)?;
    }
    if sol.report.singular && !a.expect_singular {
        return Err(Failure::Numerical("singular system".into()));
    }
    Ok(())
}

fn schedule_from(a: &StudyArgs, domain: &Domain) -> std::result::Result<Schedule, Failure> {
    let forms = [a.eps_list.is_some(), a.eps_start.is_some(), a.coupled_beta.is_some(), a.eps.is_some()];
    if forms.iter().filter(|&&f| f).count() != 1 {
        return Err(Failure::Usage("give exactly one of --eps-list, --eps-start/--halvings, --coupled-beta or --eps".into()));
    }
    let levels = || a.mesh.sequence(domain, a.levels.as_deref().unwrap_or(&[]));
    let schedule = if let Some(eps) = &a.eps_list {
        Schedule::EpsList { eps: eps.clone(), mesh: a.mesh.params() }
    } else if let (Some(start), Some(k)) = (a.eps_start, a.halvings) {
        Schedule::halving(start, k, a.mesh.params())
    } else if let Some(beta) = a.coupled_beta {
        Schedule::Coupled { beta, meshes: levels() }
    } else {
        Schedule::Refine { eps: a.eps.expect("one form is set"), meshes: levels() }
    };
    if schedule.len() < 2 {
        return Err(Failure::Usage("a study needs at least two schedule points".into()));
    }
    if a.levels.is_some() && matches!(schedule, Schedule::EpsList { .. }) {
        return Err(Failure::Usage("--levels applies only to --coupled-beta and --eps".into()));
    }
    Ok(schedule)
}

fn study(a: StudyArgs) -> CliResult {
    let problem = load_problem(&a.problem)?;
    let schedule = schedule_from(&a, &problem.domain)?;
    let table = convergence_study(&problem, &schedule, a.problem.quad_degree)?;
    write_table(&table, &a.out)?;
    for r in &table.rows {
        let order = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "eps={:e} h={:e} l2={:e} ({}) h1={:e} ({}) lap={:e} ({}){}",
            r.eps,
            r.h,
            r.l2_err,
            order(r.l2_order),
            r.h1_err,
            order(r.h1_order),
            r.lap_err,
            order(r.lap_order),
            if r.singular { " singular" } else { "" }
        );
    }
    if let Some(msg) = table.rows.iter().find_map(|r| r.failure.clone()) {
        return Err(Failure::Numerical(msg));
    }
    if table.rows.iter().any(|r| r.singular) && !a.expect_singular {
        return Err(Failure::Numerical("singular system in the schedule".into()));
    }
    Ok(())
}

fn diagnose(a: DiagnoseArgs) -> CliResult {
    let problem = load_problem(&a.problem)?;
    let meshes = match &a.levels {
        Some(levels) => a.mesh.sequence(&problem.domain, levels),
        None => vec![a.mesh.params()],
    };
    let options = CzOptions { ceiling: a.ceiling, quad_degree: a.problem.quad_degree };
    let beta = a.coupled_beta.unwrap_or(2.0);
    let mut reports = Vec::new();
    for params in &meshes {
        let mesh = problem.domain.build_mesh(params)?;
        let eps = a.eps.unwrap_or_else(|| mesh.h().powf(beta));
        let ops = CzOperators::new(&problem, &mesh, eps, options)?;
        let r = cz_from_operators(&ops, &mesh, eps, a.adjoint)?;
        println!("eps={:e} h={:e} dofs={} c_h={:e} adjoint={}", r.eps, r.h, r.dofs, r.c_h, r.adjoint);
        reports.push(r);
    }
    if reports.len() > 1 {
        println!("min/max ratio={:.4}", uniformity_ratio(&reports));
    }
    if let Some(path) = &a.out {
        write_cz(&reports, path)?;
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> CliResult {
    let problem = load_problem(&a.problem)?;
    let mesh = problem.domain.build_mesh(&a.mesh.params())?;
    if let Some(path) = &a.mesh_out {
        write_mesh(&mesh, path)?;
    }
    let r = validate_mesh(&mesh);
    println!(
        "vertices={} cells={} h={:e} min_diameter={:e} worst_shape_ratio={:.4} quasi_uniformity={:.4} conforming={}",
        mesh.num_vertices(),
        mesh.num_cells(),
        r.h,
        r.min_diameter,
        r.worst_shape_ratio,
        r.quasi_uniformity,
        r.conforming
    );
    let probe = ellipticity_probe(&problem.a, &problem.domain, a.samples, a.seed);
    println!(
        "ellipticity min={:e} max={:e} argmin=({:e}, {:e}) samples={} failures={}",
        probe.min_eigenvalue, probe.max_eigenvalue, probe.argmin[0], probe.argmin[1], probe.samples, probe.failures
    );
    if let Some(lambda) = problem.lambda_lower {
        if probe.min_eigenvalue < lambda {
            return Err(Failure::Numerical(format!("sampled eigenvalue {:e} below lambda_lower {lambda:e}", probe.min_eigenvalue)));
        }
    }
    if !r.conforming {
        return Err(Failure::Numerical("mesh failed validation".into()));
    }
    Ok(())
}
