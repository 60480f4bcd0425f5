//! Structural verification: unisolvence on random triangles, exactness of the
//! discrete sequence, and mesh-independence of the inf-sup constant.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use divdiv_core::assembly::{self, QuadratureOptions};
use divdiv_core::basis::LocalBasis;
use divdiv_core::complex::{self, ComplexReport};
use divdiv_core::dofmap::SigmaDofMap;
use divdiv_core::mesh::{Element, Mesh, Point};
use divdiv_core::solver;

use crate::error::Result;

pub const UNISOLVENCE_TRIALS: usize = 50;
pub const MIN_ANGLE_DEG: f64 = 15.0;
/// Mass matrices of the two dual constructions agree to this, relative to
/// `max(1, max |M|)`.
pub const MASS_TOL: f64 = 1e-9;
/// Allowed relative spread `(max − min) / min` of `β_h` across levels.
pub const INFSUP_SPREAD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Unisolvence,
    Complex,
    Infsup,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn angles(p: &[Point; 3]) -> [f64; 3] {
    core::array::from_fn(|i| {
        let (a, b, c) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    })
}

/// Counterclockwise triangle in `[−1, 1]²` with all angles at least 15°.
pub fn random_triangle(rng: &mut impl Rng) -> Element {
    loop {
        let mut p: [Point; 3] = core::array::from_fn(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let j = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if j.abs() < 1e-3 || angles(&p).iter().any(|a| *a < MIN_ANGLE_DEG) {
            continue;
        }
        if j < 0.0 {
            p.swap(1, 2);
        }
        return Element::standalone(p);
    }
}

/// The dual basis passes its Gram check and its mass matrix matches the one
/// of the independent Vandermonde dualization.
pub fn check_unisolvence(trials: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let el = random_triangle(&mut rng);
        let a = LocalBasis::new(&el)?.mass_matrix(&el);
        let b = LocalBasis::vandermonde(&el)?.mass_matrix(&el);
        let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        worst = worst.max((a - b).amax() / scale);
    }
    Ok(CheckOutcome {
        name: "unisolvence".into(),
        passed: worst <= MASS_TOL,
        detail: format!("{trials} random triangles, max relative mass mismatch {worst:.3e}"),
    })
}

pub fn complex_meshes() -> Result<Vec<(String, Mesh)>> {
    Ok(vec![
        ("square n=2".into(), Mesh::unit_square(2)?),
        ("perturbed square n=4".into(), Mesh::unit_square(4)?.perturb(0.2, 11)?),
        ("L-shape, one refinement".into(), Mesh::lshape(1)?.refine_red()),
    ])
}

pub fn check_complex(seed: u64) -> Result<(CheckOutcome, Vec<ComplexReport>)> {
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for (name, mesh) in complex_meshes()? {
        let r = complex::check_complex(&mesh, seed)?;
        lines.push(format!(
            "{name}: rank B {}/{}, nullity {} (expected {}), rank sym curl {}, |B S| {:.1e}",
            r.rank_b, r.n_u, r.nullity_b, r.expected_nullity, r.rank_sym_curl, r.max_b_sym_curl
        ));
        reports.push(r);
    }
    let outcome =
        CheckOutcome { name: "complex".into(), passed: reports.iter().all(|r| r.holds()), detail: lines.join("; ") };
    Ok((outcome, reports))
}

/// `β_h` on `unit_square(n)` for the given `n`.
pub fn infsup_constants(ns: &[usize]) -> Result<Vec<f64>> {
    ns.iter()
        .map(|&n| {
            let mesh = Mesh::unit_square(n)?;
            let sys = assembly::assemble(&mesh, &SigmaDofMap::new(&mesh), None, QuadratureOptions::default())?;
            Ok(solver::estimate_infsup(&sys)?.beta)
        })
        .collect()
}

pub fn check_infsup(ns: &[usize]) -> Result<CheckOutcome> {
    let betas = infsup_constants(ns)?;
    let lo = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = betas.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let list: Vec<String> = ns.iter().zip(&betas).map(|(n, b)| format!("n={n}: {b:.5}")).collect();
    Ok(CheckOutcome {
        name: "infsup".into(),
        passed: lo > 0.0 && spread < INFSUP_SPREAD,
        detail: format!("{}, spread {spread:.2e}", list.join(", ")),
    })
}

pub fn run_checks(kind: CheckKind, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if matches!(kind, CheckKind::Unisolvence | CheckKind::All) {
        out.push(check_unisolvence(UNISOLVENCE_TRIALS, seed)?);
    }
    if matches!(kind, CheckKind::Complex | CheckKind::All) {
        out.push(check_complex(seed)?.0);
    }
    if matches!(kind, CheckKind::Infsup | CheckKind::All) {
        out.push(check_infsup(&[1, 2, 4])?);
    }
    Ok(out)
}
