use divdiv_core::analysis::{error_norms, rates, ErrorBundle};
use divdiv_core::assembly::{assemble, QuadratureOptions};
use divdiv_core::dofmap::SigmaDofMap;
use divdiv_core::mesh::Mesh;
use divdiv_core::problems::{LShapeCorner, Manufactured, SmoothSquare};
use divdiv_core::solver::{solve, SolverOptions};

fn run(mesh: &Mesh, p: &dyn Manufactured) -> ErrorBundle {
    let map = SigmaDofMap::new(mesh);
    let opts = QuadratureOptions::default().with_singular_point(p.singular_point());
    let f = |x: f64, y: f64| p.load(x, y);
    let sys = assemble(mesh, &map, Some(&f), opts).unwrap();
    let s = solve(&sys, &SolverOptions::default()).unwrap();
    error_norms(mesh, &map, &s.sigma, &s.u, p, opts).unwrap()
}

// The superconvergent seminorm on the n = 2 and n = 4 grids reproduces the
// reference level-2 and level-3 values 1.8199e-03 and 1.7841e-04.
#[test]
fn smooth_square_matches_reference_seminorm() {
    let e2 = run(&Mesh::unit_square(2).unwrap(), &SmoothSquare);
    let e4 = run(&Mesh::unit_square(4).unwrap(), &SmoothSquare);
    assert!((e2.snorm_qu / 1.8199e-3 - 1.0).abs() < 1e-4, "{}", e2.snorm_qu);
    assert!((e4.snorm_qu / 1.7841e-4 - 1.0).abs() < 1e-4, "{}", e4.snorm_qu);
}

#[test]
fn smooth_square_early_rates() {
    let es: Vec<_> = [2, 4, 8].iter().map(|&n| run(&Mesh::unit_square(n).unwrap(), &SmoothSquare)).collect();
    let sig = rates(&es.iter().map(|e| e.e_sigma_l2).collect::<Vec<_>>());
    let dd = rates(&es.iter().map(|e| e.e_divdiv_l2).collect::<Vec<_>>());
    let qu = rates(&es.iter().map(|e| e.e_qu_l2).collect::<Vec<_>>());
    assert!(sig[2].unwrap() > 3.7 && dd[2].unwrap() > 1.8 && qu[2].unwrap() > 3.7);
    // triangle inequality sanity bound ‖Q_h u − u_h‖ ≤ ‖u − u_h‖ + ‖u − Q_h u‖ ≤ 2‖u − u_h‖
    for e in &es {
        assert!(e.e_qu_l2 <= 2.0 * e.e_u_l2);
    }
}

#[test]
fn lshape_first_level() {
    let e = run(&Mesh::lshape(1).unwrap(), &LShapeCorner::default());
    // reference level-1 stress error 3.0154e+00; coarse meshes differ in detail
    assert!(e.e_sigma_l2 > 2.0 && e.e_sigma_l2 < 4.0, "{e:?}");
    assert!(e.values().iter().all(|v| v.is_finite() && *v > 0.0));
}
