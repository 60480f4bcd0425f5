//! Conforming triangulations with globally oriented edges.
//!
//! Triangles are stored counterclockwise. Local edge `l` of a triangle is the
//! edge opposite local vertex `l`, running from vertex `l+1` to vertex `l+2`
//! (indices mod 3). Every edge carries a global orientation: it starts at the
//! endpoint with the smaller vertex id, `t_e` points from start to end and
//! `n_e` is `t_e` rotated by +90°. For each triangle the sign
//! `s = n_e · n_outward` records how the global normal relates to the
//! triangle's outward normal on that edge.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    LShape,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints with `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    pub tangent: Point,
    pub normal: Point,
    pub length: f64,
    /// Adjacent triangles; the second slot is empty on the boundary.
    pub triangles: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    tri_signs: Vec<[f64; 3]>,
    domain: Domain,
    level: usize,
}

/// Geometry and orientation data of one triangle, detached from the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub id: usize,
    pub coords: [Point; 3],
    pub vertex_ids: [usize; 3],
    pub edge_ids: [usize; 3],
    pub edge_signs: [f64; 3],
}

impl Element {
    /// A lone triangle whose global ids coincide with the local ones.
    pub fn standalone(coords: [Point; 3]) -> Self {
        let mut e = Self { id: 0, coords, vertex_ids: [0, 1, 2], edge_ids: [0, 1, 2], edge_signs: [1.0; 3] };
        for l in 0..3 {
            let [a, b] = e.edge_endpoints(l);
            let t = unit(sub(e.coords[b], e.coords[a]));
            let n = [-t[1], t[0]];
            let out = e.outward_normal(l);
            e.edge_signs[l] = if dot(n, out) > 0.0 { 1.0 } else { -1.0 };
        }
        e
    }

    /// Columns `x2 − x1` and `x3 − x1`.
    pub fn jacobian_matrix(&self) -> [[f64; 2]; 2] {
        let [x1, x2, x3] = self.coords;
        [[x2[0] - x1[0], x3[0] - x1[0]], [x2[1] - x1[1], x3[1] - x1[1]]]
    }

    pub fn jacobian(&self) -> f64 {
        let b = self.jacobian_matrix();
        b[0][0] * b[1][1] - b[0][1] * b[1][0]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.jacobian().abs()
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.coords;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn diameter(&self) -> f64 {
        (0..3).map(|l| self.edge_length(l)).fold(0.0, f64::max)
    }

    pub fn to_physical(&self, xh: Point) -> Point {
        let b = self.jacobian_matrix();
        let x1 = self.coords[0];
        [x1[0] + b[0][0] * xh[0] + b[0][1] * xh[1], x1[1] + b[1][0] * xh[0] + b[1][1] * xh[1]]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let b = self.jacobian_matrix();
        let j = self.jacobian();
        let d = sub(x, self.coords[0]);
        let l2 = (b[1][1] * d[0] - b[0][1] * d[1]) / j;
        let l3 = (-b[1][0] * d[0] + b[0][0] * d[1]) / j;
        [1.0 - l2 - l3, l2, l3]
    }

    /// Local vertex indices of edge `l` in traversal order `(l+1, l+2)`.
    pub fn edge_local(&self, l: usize) -> [usize; 2] {
        [(l + 1) % 3, (l + 2) % 3]
    }

    /// Local vertex indices of edge `l` ordered by global vertex id.
    pub fn edge_endpoints(&self, l: usize) -> [usize; 2] {
        let [p, q] = self.edge_local(l);
        if self.vertex_ids[p] < self.vertex_ids[q] {
            [p, q]
        } else {
            [q, p]
        }
    }

    pub fn edge_length(&self, l: usize) -> f64 {
        let [p, q] = self.edge_local(l);
        norm(sub(self.coords[q], self.coords[p]))
    }

    /// Unit outward normal on edge `l`.
    pub fn outward_normal(&self, l: usize) -> Point {
        let [p, q] = self.edge_local(l);
        let t = unit(sub(self.coords[q], self.coords[p]));
        [t[1], -t[0]]
    }

    /// Unit tangent of edge `l` pointing from vertex `l+1` to vertex `l+2`.
    pub fn traversal_tangent(&self, l: usize) -> Point {
        let [p, q] = self.edge_local(l);
        unit(sub(self.coords[q], self.coords[p]))
    }
}

impl Mesh {
    /// Builds a mesh from raw vertices and triangles. Triangles given
    /// clockwise are reoriented.
    pub fn from_raw(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>, domain: Domain) -> Result<Self> {
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(alloc::format!("triangle {t} references a missing vertex")));
            }
            let j = signed_double_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if j < 0.0 {
                tri.swap(1, 2);
            }
        }
        let mut mesh = Self {
            vertices,
            triangles,
            edges: Vec::new(),
            tri_edges: Vec::new(),
            tri_signs: Vec::new(),
            domain,
            level: 1,
        };
        mesh.build_edges()?;
        mesh.check_orientation()?;
        Ok(mesh)
    }

    fn build_edges(&mut self) -> Result<()> {
        let mut keys: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            for l in 0..3 {
                let (p, q) = (tri[(l + 1) % 3], tri[(l + 2) % 3]);
                keys.push((p.min(q), p.max(q), t, l));
            }
        }
        keys.sort_unstable();
        self.edges.clear();
        self.tri_edges = vec![[usize::MAX; 3]; self.triangles.len()];
        self.tri_signs = vec![[0.0; 3]; self.triangles.len()];
        let mut i = 0;
        while i < keys.len() {
            let (a, b, t, l) = keys[i];
            let mut adj = [Some(t), None];
            let mut locals = [l, 0];
            let mut j = i + 1;
            while j < keys.len() && keys[j].0 == a && keys[j].1 == b {
                if j - i >= 2 {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "edge ({a}, {b}) is shared by more than two triangles"
                    )));
                }
                adj[1] = Some(keys[j].2);
                locals[1] = keys[j].3;
                j += 1;
            }
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = sub(pb, pa);
            let length = norm(d);
            let tangent = [d[0] / length, d[1] / length];
            let normal = [-tangent[1], tangent[0]];
            let id = self.edges.len();
            for k in 0..2 {
                if let Some(tk) = adj[k] {
                    let lk = locals[k];
                    self.tri_edges[tk][lk] = id;
                    let out = self.element(tk).outward_normal(lk);
                    self.tri_signs[tk][lk] = if dot(normal, out) > 0.0 { 1.0 } else { -1.0 };
                }
            }
            self.edges.push(Edge { vertices: [a, b], tangent, normal, length, triangles: adj });
            i = j;
        }
        Ok(())
    }

    fn check_orientation(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let j = self.element(t).jacobian();
            if !(j > 0.0) {
                return Err(Error::Degenerate { element: t, jacobian: j });
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn triangle_signs(&self, t: usize) -> [f64; 3] {
        self.tri_signs[t]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn with_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    pub fn element(&self, t: usize) -> Element {
        let tri = self.triangles[t];
        Element {
            id: t,
            coords: [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]],
            vertex_ids: tri,
            edge_ids: self.tri_edges[t],
            edge_signs: self.tri_signs[t],
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.triangles.len()).map(|t| self.element(t))
    }

    /// Largest triangle diameter.
    pub fn h_max(&self) -> f64 {
        self.elements().map(|e| e.diameter()).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.elements().map(|e| e.area()).sum()
    }

    /// Vertices lying on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            on[e.vertices[0]] = true;
            on[e.vertices[1]] = true;
        }
        on
    }

    /// `n × n` squares on `(0,1)²`, each split along its south-west to
    /// north-east diagonal.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid count must be at least 1".into()));
        }
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (sw, se, ne, nw) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([sw, se, ne]);
                triangles.push([sw, ne, nw]);
            }
        }
        Self::from_raw(vertices, triangles, Domain::UnitSquare)
    }

    /// `(−1,1)² ∖ [0,1]×[−1,0]` with grid spacing `1/n` and the same diagonal
    /// pattern as [`Mesh::unit_square`].
    pub fn lshape(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid count must be at least 1".into()));
        }
        let m = 2 * n;
        let h = 1.0 / n as f64;
        let keep = |i: usize, j: usize| !(i >= n && j < n);
        let mut index = vec![usize::MAX; (m + 1) * (m + 1)];
        let mut vertices = Vec::new();
        for j in 0..=m {
            for i in 0..=m {
                let used =
                    [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                        .iter()
                        .any(|&(ci, cj)| ci < m && cj < m && keep(ci, cj));
                if used {
                    index[j * (m + 1) + i] = vertices.len();
                    vertices.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
                }
            }
        }
        let id = |i: usize, j: usize| index[j * (m + 1) + i];
        let mut triangles = Vec::new();
        for j in 0..m {
            for i in 0..m {
                if keep(i, j) {
                    let (sw, se, ne, nw) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                    triangles.push([sw, se, ne]);
                    triangles.push([sw, ne, nw]);
                }
            }
        }
        Self::from_raw(vertices, triangles, Domain::LShape)
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_red(&self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| {
            let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
        }));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[v0, v1, v2]) in self.triangles.iter().enumerate() {
            let [e0, e1, e2] = self.tri_edges[t];
            let (m0, m1, m2) = (nv + e0, nv + e1, nv + e2);
            triangles.push([v0, m2, m1]);
            triangles.push([m2, v1, m0]);
            triangles.push([m1, m0, v2]);
            triangles.push([m0, m1, m2]);
        }
        let mut mesh = Self {
            vertices,
            triangles,
            edges: Vec::new(),
            tri_edges: Vec::new(),
            tri_signs: Vec::new(),
            domain: self.domain,
            level: self.level + 1,
        };
        mesh.build_edges().expect("refinement of a conforming mesh is conforming");
        mesh
    }

    /// Moves each interior vertex by a pseudo-random offset of length at most
    /// `factor` times its shortest incident edge.
    pub fn perturb(&self, factor: f64, seed: u64) -> Result<Self> {
        if !(0.0..=0.3).contains(&factor) {
            return Err(Error::InvalidArgument(alloc::format!("perturbation factor {factor} outside [0, 0.3]")));
        }
        let mut out = self.clone();
        if factor == 0.0 {
            return Ok(out);
        }
        let mut h_local = vec![f64::INFINITY; self.vertices.len()];
        for e in &self.edges {
            for &v in &e.vertices {
                h_local[v] = h_local[v].min(e.length);
            }
        }
        let boundary = self.boundary_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 0..self.vertices.len() {
            if boundary[v] {
                continue;
            }
            let angle = 2.0 * core::f64::consts::PI * unit_f64(&mut rng);
            let radius = factor * h_local[v] * unit_f64(&mut rng);
            out.vertices[v][0] += radius * libm::cos(angle);
            out.vertices[v][1] += radius * libm::sin(angle);
        }
        out.check_orientation()?;
        out.build_edges()?;
        Ok(out)
    }

    /// Euler characteristic check `#E + 1 = #V + #T` for simply connected meshes.
    pub fn satisfies_euler(&self) -> bool {
        self.n_edges() + 1 == self.n_vertices() + self.n_triangles()
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn signed_double_area(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn unit_square_counts() {
        let m = Mesh::unit_square(1).unwrap();
        assert_eq!((m.n_triangles(), m.n_vertices(), m.n_edges()), (2, 4, 5));
        let m = Mesh::unit_square(2).unwrap();
        assert_eq!((m.n_triangles(), m.n_vertices(), m.n_edges()), (8, 9, 16));
        assert!(m.satisfies_euler());
        for e in m.elements() {
            assert!((e.jacobian() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn lshape_counts_and_area() {
        let m = Mesh::lshape(1).unwrap();
        assert_eq!(m.n_triangles(), 6);
        assert_eq!(m.n_vertices(), 8);
        assert!(m.vertices().iter().any(|v| v[0] == 0.0 && v[1] == 0.0));
        assert!(m.satisfies_euler());
        let m = Mesh::lshape(2).unwrap();
        assert!((m.total_area() - 3.0).abs() < 1e-14);
        assert!(m.satisfies_euler());
    }

    #[test]
    fn red_refinement() {
        let m = Mesh::unit_square(2).unwrap();
        let r = m.refine_red();
        assert_eq!(r.n_triangles(), 32);
        assert!(r.satisfies_euler());
        assert!((r.h_max() - 0.5 * m.h_max()).abs() < 1e-15);
        assert_eq!(r.level(), 2);
        let l = Mesh::lshape(1).unwrap().refine_red().refine_red();
        assert!(l.satisfies_euler());
        assert!((l.total_area() - 3.0).abs() < 1e-13);
    }

    fn triangle_set(m: &Mesh) -> BTreeSet<[(i64, i64); 3]> {
        let key = |p: Point| ((p[0] * 1024.0).round() as i64, (p[1] * 1024.0).round() as i64);
        m.triangles()
            .iter()
            .map(|t| {
                let mut k = [key(m.vertices()[t[0]]), key(m.vertices()[t[1]]), key(m.vertices()[t[2]])];
                k.sort();
                k
            })
            .collect()
    }

    #[test]
    fn two_refinements_match_finer_grid() {
        let r = Mesh::unit_square(1).unwrap().refine_red().refine_red();
        let g = Mesh::unit_square(4).unwrap();
        assert_eq!(triangle_set(&r), triangle_set(&g));
    }

    #[test]
    fn interior_edges_carry_opposite_signs() {
        let m = Mesh::lshape(2).unwrap().perturb(0.2, 7).unwrap();
        for (id, e) in m.edges().iter().enumerate() {
            let signs: Vec<f64> = e
                .triangles
                .iter()
                .flatten()
                .map(|&t| {
                    let l = m.triangle_edges(t).iter().position(|&x| x == id).unwrap();
                    let el = m.element(t);
                    let n = el.outward_normal(l);
                    assert!((dot(n, e.normal).abs() - 1.0).abs() < 1e-12);
                    assert!((m.triangle_signs(t)[l] - dot(n, e.normal)).abs() < 1e-12);
                    let [a, b] = el.edge_endpoints(l);
                    assert_eq!([el.vertex_ids[a], el.vertex_ids[b]], e.vertices);
                    m.triangle_signs(t)[l]
                })
                .collect();
            assert_eq!(signs.len(), if e.is_boundary() { 1 } else { 2 });
            if signs.len() == 2 {
                assert_eq!(signs[0], -signs[1]);
            }
            assert!((norm(e.tangent) - 1.0).abs() < 1e-14 && dot(e.tangent, e.normal).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbation_contract() {
        let m = Mesh::unit_square(4).unwrap();
        assert_eq!(m.perturb(0.0, 1).unwrap(), m);
        let p = m.perturb(0.2, 42).unwrap();
        assert_eq!(p, m.perturb(0.2, 42).unwrap());
        assert_ne!(p, m);
        let boundary = m.boundary_vertices();
        for (v, (a, b)) in m.vertices().iter().zip(p.vertices()).enumerate() {
            let d = norm(sub(*a, *b));
            if boundary[v] {
                assert_eq!(d, 0.0);
            } else {
                assert!(d <= 0.2 * 0.25 + 1e-15);
            }
        }
        for e in p.elements() {
            assert!(e.jacobian() > 0.0);
            for l in 0..3 {
                // minimum angle stays positive
                let [p1, p2] = e.edge_local(l);
                let u = unit(sub(e.coords[p1], e.coords[l]));
                let v = unit(sub(e.coords[p2], e.coords[l]));
                assert!(dot(u, v) < 1.0 - 1e-6);
            }
        }
        assert!(matches!(m.perturb(0.31, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh::from_raw(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]], Domain::Custom).unwrap();
        assert!(m.element(0).jacobian() > 0.0);
        let d = Mesh::from_raw(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], vec![[0, 1, 2]], Domain::Custom);
        assert!(matches!(d, Err(Error::Degenerate { .. })));
    }
}
