use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use divdiv::checks::{self, CheckKind};
use divdiv::core::assembly;
use divdiv::core::dofmap::SigmaDofMap;
use divdiv::error::Error;
use divdiv::report::{sci, ConvergenceReport};
use divdiv::study::{self, Example, RunConfig, SolverKind, DEFAULT_PERTURBATION, DEFAULT_SEED};
use divdiv::{meshio, mtx, parallel};

const EXIT_SOLVE: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

/// Mixed finite element solver for the clamped plate with stresses in
/// H(div div) and piecewise linear displacements.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(long, value_enum, default_value = "square-uniform")]
    example: Example,
    /// Number of refinement levels (1 to 6).
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long, value_enum, default_value = "direct")]
    solver: SolverKind,
    /// Relative residual tolerance of the linear solver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Vertex perturbation factor for the non-uniform family.
    #[arg(long, default_value_t = DEFAULT_PERTURBATION)]
    perturb: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Quadrature degree for integrals of the exact data.
    #[arg(long)]
    quad_degree: Option<usize>,
    /// Output file for the report (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Run verification checks instead of a convergence study.
    #[arg(long, value_enum)]
    check: Option<CheckKind>,
    /// Write the finest mesh to this file.
    #[arg(long)]
    export_mesh: Option<PathBuf>,
    /// Write `<prefix>_M.mtx` and `<prefix>_B.mtx` for the finest mesh.
    #[arg(long)]
    export_system: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Core(_) => EXIT_SOLVE,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn open_out(path: &Option<PathBuf>) -> divdiv::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_checks(kind: CheckKind, cli: &Cli) -> divdiv::Result<u8> {
    let outcomes = checks::run_checks(kind, cli.seed)?;
    let mut out = open_out(&cli.out)?;
    for c in &outcomes {
        writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    out.flush()?;
    Ok(if outcomes.iter().all(|c| c.passed) { 0 } else { EXIT_CHECK })
}

fn export(cfg: &RunConfig, cli: &Cli) -> divdiv::Result<()> {
    let mesh = cfg.mesh(cfg.levels)?;
    if let Some(p) = &cli.export_mesh {
        meshio::write_mesh(&mesh, BufWriter::new(File::create(p)?))?;
    }
    if let Some(prefix) = &cli.export_system {
        let sys = assembly::assemble(&mesh, &SigmaDofMap::new(&mesh), None, cfg.quadrature())?;
        for (tag, a) in [("M", &sys.m), ("B", &sys.b)] {
            let mut name = prefix.as_os_str().to_owned();
            name.push(format!("_{tag}.mtx"));
            mtx::write_matrix_market(a, BufWriter::new(File::create(PathBuf::from(name))?))?;
        }
    }
    Ok(())
}

fn write_report(report: &ConvergenceReport, cli: &Cli) -> divdiv::Result<()> {
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Md => report.to_markdown(),
        Format::Json => report.to_json()? + "\n",
    };
    let mut out = open_out(&cli.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> divdiv::Result<u8> {
    if let Some(kind) = cli.check {
        return run_checks(kind, cli);
    }
    let cfg = RunConfig {
        example: cli.example,
        levels: cli.levels,
        solver: cli.solver,
        tol: cli.tol,
        perturb: cli.perturb,
        seed: cli.seed,
        quad_degree: cli.quad_degree,
    };
    cfg.validate()?;
    let pool = parallel::pool(parallel::worker_count()?)?;
    export(&cfg, cli)?;
    let report = study::run_convergence(&cfg, &pool, &mut |rec| {
        eprintln!(
            "level {}: h = {}, {} + {} unknowns, err_sigma = {}, {:.2} s",
            rec.level,
            sci(rec.h),
            rec.n_sigma,
            rec.n_u,
            sci(rec.errors.err_sigma),
            rec.seconds
        );
    })?;
    write_report(&report, cli)?;
    if let Some(f) = &report.failure {
        eprintln!("error: level {} failed: {}", f.level, f.message);
        return Ok(EXIT_SOLVE);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
