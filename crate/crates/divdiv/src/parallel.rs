//! Rayon-backed element loops. Results are collected in element order and
//! merged by the sequential core routines, so the output is bitwise identical
//! for any worker count.

use rayon::prelude::*;

use divdiv_core::analysis::{self, ErrorBundle};
use divdiv_core::assembly::{self, LoadFn, QuadratureOptions, Rules, SaddleSystem};
use divdiv_core::dofmap::{DisplacementDofMap, SigmaDofMap};
use divdiv_core::mesh::Mesh;
use divdiv_core::problems::Manufactured;

use crate::error::{Error, Result};

pub const THREADS_VAR: &str = "DIVDIV_THREADS";

/// Worker count from `DIVDIV_THREADS`, or every available core.
pub fn worker_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

pub fn assemble(
    pool: &rayon::ThreadPool,
    mesh: &Mesh,
    map: &SigmaDofMap,
    load: Option<&LoadFn<'_>>,
    options: QuadratureOptions,
) -> Result<SaddleSystem> {
    let rules = Rules::new(options)?;
    let blocks = pool.install(|| {
        (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| assembly::element_block(mesh, map, t, load, &rules))
            .collect::<divdiv_core::Result<Vec<_>>>()
    })?;
    Ok(assembly::merge(map.n_dofs(), DisplacementDofMap::new(mesh).n_dofs(), &blocks))
}

pub fn error_norms(
    pool: &rayon::ThreadPool,
    mesh: &Mesh,
    map: &SigmaDofMap,
    sigma: &[f64],
    u: &[f64],
    problem: &dyn Manufactured,
    options: QuadratureOptions,
) -> Result<ErrorBundle> {
    let rules = Rules::new(options)?;
    let bundle = pool.install(|| -> divdiv_core::Result<ErrorBundle> {
        let fields = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| analysis::element_fields(mesh, map, t, sigma, u, problem, &rules))
            .collect::<divdiv_core::Result<Vec<_>>>()?;
        let el_terms = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| analysis::element_contributions(&mesh.element(t), &fields[t], problem, &rules))
            .collect::<divdiv_core::Result<Vec<_>>>()?;
        let edge_terms = (0..mesh.n_edges())
            .into_par_iter()
            .map(|e| analysis::edge_contributions(mesh, e, &fields, problem, &options))
            .collect::<divdiv_core::Result<Vec<_>>>()?;
        Ok(analysis::reduce(mesh.level(), mesh.h_max(), &el_terms, &edge_terms))
    })?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use divdiv_core::problems::SmoothSquare;

    #[test]
    fn matches_sequential_bitwise() {
        let mesh = Mesh::unit_square(4).unwrap().perturb(0.2, 3).unwrap();
        let map = SigmaDofMap::new(&mesh);
        let p = SmoothSquare;
        let f = |x: f64, y: f64| p.load(x, y);
        let opts = QuadratureOptions::default();
        let seq = assembly::assemble(&mesh, &map, Some(&f), opts).unwrap();
        for threads in [1, 3] {
            let par = assemble(&pool(threads).unwrap(), &mesh, &map, Some(&f), opts).unwrap();
            assert_eq!(par, seq);
        }
        let sigma: Vec<f64> = (0..map.n_dofs()).map(|i| (i as f64).sin()).collect();
        let u: Vec<f64> = (0..3 * mesh.n_triangles()).map(|i| (i as f64).cos()).collect();
        let a = analysis::error_norms(&mesh, &map, &sigma, &u, &p, opts).unwrap();
        let b = error_norms(&pool(4).unwrap(), &mesh, &map, &sigma, &u, &p, opts).unwrap();
        assert_eq!(a, b);
    }
}
