use divdiv_core::assembly::{assemble, QuadratureOptions, SaddleSystem};
use divdiv_core::dofmap::SigmaDofMap;
use divdiv_core::mesh::Mesh;
use divdiv_core::problems::{Manufactured, SmoothSquare};
use divdiv_core::solver::{estimate_infsup, solve, Method, SolverOptions};
use divdiv_core::sparse::CsrMatrix;
use divdiv_core::Error;

fn example_system(n: usize) -> SaddleSystem {
    let mesh = Mesh::unit_square(n).unwrap();
    let p = SmoothSquare;
    let f = |x: f64, y: f64| p.load(x, y);
    assemble(&mesh, &SigmaDofMap::new(&mesh), Some(&f), QuadratureOptions::default()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn direct_and_krylov_agree() {
    let sys = example_system(4);
    let d = solve(&sys, &SolverOptions::default()).unwrap();
    let k = solve(&sys, &SolverOptions { method: Method::Krylov, ..Default::default() }).unwrap();
    assert!(d.relative_residual <= 1e-10 && k.relative_residual <= 1e-10);
    assert!(max_diff(&d.sigma, &k.sigma) < 1e-7 * max_abs(&d.sigma));
    assert!(max_diff(&d.u, &k.u) < 1e-7 * max_abs(&d.u));
    assert!(!k.history.is_empty() && k.iterations == k.history.len());
}

#[test]
fn energy_identity() {
    // σᵀMσ = −(Bσ)ᵀu = −ℓᵀu
    let sys = example_system(2);
    let s = solve(&sys, &SolverOptions::default()).unwrap();
    let ms = sys.m.mul_vec(&s.sigma);
    let e: f64 = s.sigma.iter().zip(&ms).map(|(a, b)| a * b).sum();
    let lu: f64 = sys.load.iter().zip(&s.u).map(|(a, b)| a * b).sum();
    assert!((e + lu).abs() < 1e-10 * e);
}

#[test]
fn solution_is_independent_of_stress_numbering() {
    let sys = example_system(2);
    let n = sys.n_sigma();
    // a fixed permutation: stride coprime to n
    let stride = (1..n).rev().find(|k| gcd(*k, n) == 1 && *k > n / 2).unwrap();
    let perm: Vec<usize> = (0..n).map(|i| (i * stride + 3) % n).collect();
    let m: Vec<_> = sys.m.triplets().map(|(r, c, v)| (perm[r], perm[c], v)).collect();
    let b: Vec<_> = sys.b.triplets().map(|(r, c, v)| (r, perm[c], v)).collect();
    let permuted = SaddleSystem {
        m: CsrMatrix::from_triplets(n, n, &m),
        b: CsrMatrix::from_triplets(sys.n_u(), n, &b),
        load: sys.load.clone(),
        disp_mass: sys.disp_mass.clone(),
    };
    let a = solve(&sys, &SolverOptions::default()).unwrap();
    let p = solve(&permuted, &SolverOptions::default()).unwrap();
    for (i, &j) in perm.iter().enumerate() {
        assert!((a.sigma[i] - p.sigma[j]).abs() < 1e-10 * max_abs(&a.sigma));
    }
    assert!(max_diff(&a.u, &p.u) < 1e-10 * max_abs(&a.u));
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn exhausted_iterations_are_reported() {
    let sys = example_system(2);
    let r = solve(&sys, &SolverOptions { method: Method::Krylov, max_iterations: 3, ..Default::default() });
    match r {
        Err(Error::NotConverged { history, .. }) => assert_eq!(history.len(), 3),
        other => panic!("{other:?}"),
    }
}

// λ_min = μ₁/(1 + μ₁) with μ₁ ≈ 1294.934 the first clamped-plate eigenvalue
// of the unit square.
#[test]
fn infsup_tracks_first_plate_eigenvalue() {
    let mut betas = Vec::new();
    for n in [1, 2, 4] {
        let mesh = Mesh::unit_square(n).unwrap();
        let sys = assemble(&mesh, &SigmaDofMap::new(&mesh), None, QuadratureOptions::default()).unwrap();
        let r = estimate_infsup(&sys).unwrap();
        betas.push(r.beta);
        if n == 4 {
            let mu = r.lambda_min / (1.0 - r.lambda_min);
            assert!((mu / 1294.934 - 1.0).abs() < 0.01, "{mu}");
        }
    }
    let (lo, hi) = betas.iter().fold((f64::MAX, 0.0f64), |(l, h), b| (l.min(*b), h.max(*b)));
    assert!(lo > 0.0 && (hi - lo) / hi < 0.25);
}
