//! Convergence studies over a family of refined meshes.

use std::time::Instant;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use divdiv_core::assembly::QuadratureOptions;
use divdiv_core::dofmap::SigmaDofMap;
use divdiv_core::mesh::Mesh;
use divdiv_core::problems::{LShapeCorner, Manufactured, SmoothSquare};
use divdiv_core::quadrature::{DEGREE_SINGULAR, MAX_TRIANGLE_DEGREE};
use divdiv_core::solver::{self, Method, SolverOptions};

use crate::error::{Error, Result};
use crate::parallel;
use crate::report::{ConvergenceReport, ErrorValues, Failure, LevelRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    /// Smooth solution on uniform grids of the unit square.
    SquareUniform,
    /// Smooth solution on perturbed grids of the unit square.
    SquareNonuniform,
    /// Corner singularity on the L-shaped domain.
    Lshape,
}

impl Example {
    pub fn problem(self) -> Box<dyn Manufactured> {
        match self {
            Example::SquareUniform | Example::SquareNonuniform => Box::new(SmoothSquare),
            Example::Lshape => Box::new(LShapeCorner::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Krylov,
}

impl From<SolverKind> for Method {
    fn from(s: SolverKind) -> Self {
        match s {
            SolverKind::Direct => Method::Direct,
            SolverKind::Krylov => Method::Krylov,
        }
    }
}

pub const MAX_LEVELS: usize = 6;
pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_PERTURBATION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub example: Example,
    pub levels: usize,
    pub solver: SolverKind,
    pub tol: f64,
    /// Vertex perturbation factor of the non-uniform family.
    pub perturb: f64,
    pub seed: u64,
    /// Quadrature degree for integrals of exact data.
    pub quad_degree: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: Example::SquareUniform,
            levels: 5,
            solver: SolverKind::Direct,
            tol: 1e-10,
            perturb: DEFAULT_PERTURBATION,
            seed: DEFAULT_SEED,
            quad_degree: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::Config(format!("levels must be in 1..={MAX_LEVELS}, got {}", self.levels)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tolerance must be in (0, 1), got {}", self.tol)));
        }
        if !(0.0..=0.3).contains(&self.perturb) {
            return Err(Error::Config(format!("perturbation factor must be in [0, 0.3], got {}", self.perturb)));
        }
        if let Some(q) = self.quad_degree {
            if !(6..=MAX_TRIANGLE_DEGREE).contains(&q) {
                return Err(Error::Config(format!("quadrature degree must be in 6..={MAX_TRIANGLE_DEGREE}, got {q}")));
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        let mut o = QuadratureOptions::default().with_singular_point(self.example.problem().singular_point());
        if let Some(q) = self.quad_degree {
            o.smooth_degree = q;
            o.singular_degree = q.max(DEGREE_SINGULAR);
        }
        o
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { method: self.solver.into(), tol: self.tol, ..SolverOptions::default() }
    }

    /// Mesh of `level` (from 1). The uniform square starts from the single
    /// square cut once, the L-shape from its three unit squares; both halve
    /// `h` per level. Non-uniform level `ℓ` perturbs the `2^ℓ` grid.
    pub fn mesh(&self, level: usize) -> Result<Mesh> {
        let m = match self.example {
            Example::SquareUniform => Mesh::unit_square(1 << (level - 1))?,
            Example::SquareNonuniform => {
                Mesh::unit_square(1 << level)?.perturb(self.perturb, self.seed.wrapping_add(level as u64))?
            }
            Example::Lshape => {
                let mut m = Mesh::lshape(1)?;
                for _ in 1..level {
                    m = m.refine_red();
                }
                m
            }
        };
        Ok(m.with_level(level))
    }
}

/// Runs levels `1..=config.levels` in sequence. A failing level stops the
/// study; the report then carries the completed levels and the failure.
pub fn run_convergence(
    config: &RunConfig,
    pool: &rayon::ThreadPool,
    progress: &mut dyn FnMut(&LevelRecord),
) -> Result<ConvergenceReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = ConvergenceReport {
        config: config.clone(),
        threads: pool.current_num_threads(),
        levels: Vec::new(),
        complete: false,
        failure: None,
        seconds: 0.0,
    };
    for level in 1..=config.levels {
        match run_level(config, pool, level) {
            Ok(mut rec) => {
                if let Some(prev) = report.levels.last() {
                    rec.rates = Some(ErrorValues::rates(&prev.errors, &rec.errors));
                }
                progress(&rec);
                report.levels.push(rec);
            }
            Err(e) => {
                report.failure = Some(Failure { level, message: e.to_string() });
                break;
            }
        }
    }
    report.complete = report.failure.is_none();
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

pub fn run_level(config: &RunConfig, pool: &rayon::ThreadPool, level: usize) -> Result<LevelRecord> {
    let t0 = Instant::now();
    let mesh = config.mesh(level)?;
    let problem = config.example.problem();
    let map = SigmaDofMap::new(&mesh);
    let quad = config.quadrature();
    let load = |x: f64, y: f64| problem.load(x, y);
    let sys = parallel::assemble(pool, &mesh, &map, Some(&load), quad)?;
    let sol = solver::solve(&sys, &config.solver_options())?;
    let e = parallel::error_norms(pool, &mesh, &map, &sol.sigma, &sol.u, problem.as_ref(), quad)?;
    Ok(LevelRecord {
        level,
        h: mesh.h_max(),
        n_triangles: mesh.n_triangles(),
        n_sigma: sys.n_sigma(),
        n_u: sys.n_u(),
        errors: ErrorValues::from(&e),
        rates: None,
        iterations: sol.iterations,
        relative_residual: sol.relative_residual,
        seconds: t0.elapsed().as_secs_f64(),
    })
}
