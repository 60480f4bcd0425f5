use divdiv_core::assembly::{assemble, element_block, QuadratureOptions, Rules};
use divdiv_core::basis::{barycentric, LocalBasis};
use divdiv_core::dofmap::SigmaDofMap;
use divdiv_core::mesh::Mesh;
use divdiv_core::poly::{frobenius, mono_exponents, Poly, SymPoly};
use divdiv_core::quadrature::{edge_rule, triangle_rule};
use nalgebra::DMatrix;

fn opts() -> QuadratureOptions {
    QuadratureOptions::default()
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn random_p3_field(seed: u64) -> SymPoly {
    let c = pseudo_random(30, seed);
    let mut f = SymPoly::zero(3);
    for k in 0..10 {
        let (i, j) = mono_exponents(k);
        let m = Poly::monomial(i, j);
        f.xx.add_scaled(&m, c[k]);
        f.xy.add_scaled(&m, c[10 + k]);
        f.yy.add_scaled(&m, c[20 + k]);
    }
    f
}

#[test]
fn mass_matrix_is_symmetric_positive_definite() {
    let mesh = Mesh::unit_square(2).unwrap().perturb(0.2, 1).unwrap();
    let map = SigmaDofMap::new(&mesh);
    let sys = assemble(&mesh, &map, None, opts()).unwrap();
    assert!(sys.m.asymmetry() < 1e-14);
    let mut d = DMatrix::zeros(sys.n_sigma(), sys.n_sigma());
    for (r, c, v) in sys.m.triplets() {
        d[(r, c)] = v;
    }
    assert!(d.cholesky().is_some());
}

#[test]
fn quadratic_form_matches_direct_quadrature() {
    let mesh = Mesh::lshape(1).unwrap();
    let map = SigmaDofMap::new(&mesh);
    let sys = assemble(&mesh, &map, None, opts()).unwrap();
    let x = pseudo_random(map.n_dofs(), 7);
    let mx = sys.m.mul_vec(&x);
    let form: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let rule = triangle_rule(10).unwrap();
    let mut direct = 0.0;
    for el in mesh.elements() {
        let basis = LocalBasis::new(&el).unwrap();
        let s = basis.combine(&map.gather(el.id, &x));
        let c = basis.center();
        for (p, w) in rule.iter() {
            let q = el.to_physical(*p);
            let v = s.eval(q[0] - c[0], q[1] - c[1]);
            direct += w * el.jacobian() * frobenius(&v, &v);
        }
    }
    assert!((form - direct).abs() < 1e-12 * direct, "{form} {direct}");
}

#[test]
fn load_is_linear_and_matches_constant_data() {
    let mesh = Mesh::unit_square(2).unwrap();
    let map = SigmaDofMap::new(&mesh);
    let one = |_: f64, _: f64| Ok(1.0);
    let three = |_: f64, _: f64| Ok(3.0);
    let a = assemble(&mesh, &map, Some(&one), opts()).unwrap();
    let b = assemble(&mesh, &map, Some(&three), opts()).unwrap();
    for (t, el) in mesh.elements().enumerate() {
        for r in 0..3 {
            assert!((a.load[3 * t + r] + el.area() / 3.0).abs() < 1e-15);
            assert!((b.load[3 * t + r] - 3.0 * a.load[3 * t + r]).abs() < 1e-15);
        }
    }
    assert_eq!(a.m, b.m);
    assert_eq!(a.b, b.b);
}

// ∫_K div div τ λ = ∫_∂K (div τ · n λ − τ n · ∇λ) for linear λ
#[test]
fn coupling_matches_green_boundary_form() {
    let mesh = Mesh::unit_square(1).unwrap().refine_red().perturb(0.25, 9).unwrap();
    let map = SigmaDofMap::new(&mesh);
    let rules = Rules::new(opts()).unwrap();
    let er = edge_rule(8);
    for el in mesh.elements() {
        let blk = element_block(&mesh, &map, el.id, None, &rules).unwrap();
        let basis = LocalBasis::new(&el).unwrap();
        let c = basis.center();
        let lam = barycentric(&el, c);
        for (i, tau) in basis.functions().iter().enumerate() {
            let div = tau.div();
            for (r, l) in lam.iter().enumerate() {
                let grad = [l.dx().eval(0.0, 0.0), l.dy().eval(0.0, 0.0)];
                let mut acc = 0.0;
                for e in 0..3 {
                    let [p, q] = el.edge_local(e);
                    let n = el.outward_normal(e);
                    let len = el.edge_length(e);
                    for (s, w) in er.iter() {
                        let x = [
                            el.coords[p][0] + s[0] * (el.coords[q][0] - el.coords[p][0]) - c[0],
                            el.coords[p][1] + s[0] * (el.coords[q][1] - el.coords[p][1]) - c[1],
                        ];
                        let d = div.eval(x[0], x[1]);
                        let t = tau.eval(x[0], x[1]);
                        let tn = [t[0][0] * n[0] + t[0][1] * n[1], t[1][0] * n[0] + t[1][1] * n[1]];
                        acc += w
                            * len
                            * ((d[0] * n[0] + d[1] * n[1]) * l.eval(x[0], x[1]) - (tn[0] * grad[0] + tn[1] * grad[1]));
                    }
                }
                let vol = blk.divdiv[r][i] * map.signs(el.id)[i];
                assert!((vol - acc).abs() < 1e-9 * (1.0 + acc.abs()), "{} {i} {r}: {vol} {acc}", el.id);
            }
        }
    }
}

#[test]
fn cubic_fields_are_reproduced_and_satisfy_the_constraint() {
    let mesh = Mesh::unit_square(2).unwrap().perturb(0.2, 4).unwrap();
    let map = SigmaDofMap::new(&mesh);
    let sigma = random_p3_field(3);
    let x = map.interpolate(&mesh, &sigma);
    let dd = sigma.divdiv();
    let f = |px: f64, py: f64| Ok(-dd.eval(px, py));
    let sys = assemble(&mesh, &map, Some(&f), opts()).unwrap();
    let bx = sys.b.mul_vec(&x);
    for (a, b) in bx.iter().zip(&sys.load) {
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }
    for el in mesh.elements() {
        let basis = LocalBasis::new(&el).unwrap();
        let s = basis.combine(&map.gather(el.id, &x));
        let c = basis.center();
        let q = el.centroid();
        let (a, b) = (s.eval(q[0] - c[0], q[1] - c[1]), sigma.eval(q[0], q[1]));
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn coupling_has_full_row_rank() {
    let mesh = Mesh::unit_square(2).unwrap();
    let sys = assemble(&mesh, &SigmaDofMap::new(&mesh), None, opts()).unwrap();
    let mut b = DMatrix::zeros(sys.n_u(), sys.n_sigma());
    for (r, c, v) in sys.b.triplets() {
        b[(r, c)] = v;
    }
    assert_eq!(divdiv_core::dense::rank(&b, 1e-8), 3 * mesh.n_triangles());
}

#[test]
fn low_quadrature_degree_is_rejected() {
    let o = QuadratureOptions { poly_degree: 4, ..opts() };
    assert!(Rules::new(o).is_err());
}
