//! Global numbering of stress and displacement unknowns.
//!
//! Stress unknowns: vertex `v`, component `c` ↦ `3v + c`; edge `e` ↦
//! `3#V + 7e + k` with `k = 0..4` the normal flux moments and `k = 4..7` the
//! `div σ · n` moments, measured with the global edge normal. Displacement
//! unknowns: triangle `t`, barycentric function `λ_r` ↦ `3t + r`.

use alloc::vec::Vec;

use crate::basis::{apply_catalog, functional, Functional, N_LOCAL};
use crate::mesh::Mesh;
use crate::poly::SymPoly;

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDofMap {
    n_dofs: usize,
    global: Vec<[usize; N_LOCAL]>,
    signs: Vec<[f64; N_LOCAL]>,
}

impl SigmaDofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.n_vertices();
        let mut global = Vec::with_capacity(mesh.n_triangles());
        let mut signs = Vec::with_capacity(mesh.n_triangles());
        for el in mesh.elements() {
            let mut g = [0usize; N_LOCAL];
            let mut s = [1.0; N_LOCAL];
            for i in 0..N_LOCAL {
                match functional(i) {
                    Functional::VertexValue { vertex, component } => {
                        g[i] = 3 * el.vertex_ids[vertex] + component;
                    }
                    Functional::Flux { edge, weight, direction } => {
                        g[i] = 3 * nv + 7 * el.edge_ids[edge] + 2 * weight + direction;
                        s[i] = el.edge_signs[edge];
                    }
                    Functional::DivFlux { edge, weight } => {
                        g[i] = 3 * nv + 7 * el.edge_ids[edge] + 4 + weight;
                        s[i] = el.edge_signs[edge];
                    }
                }
            }
            global.push(g);
            signs.push(s);
        }
        Self { n_dofs: 3 * nv + 7 * mesh.n_edges(), global, signs }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn global(&self, t: usize) -> &[usize; N_LOCAL] {
        &self.global[t]
    }

    pub fn signs(&self, t: usize) -> &[f64; N_LOCAL] {
        &self.signs[t]
    }

    /// Signed local coefficients of a global vector on triangle `t`.
    pub fn gather(&self, t: usize, x: &[f64]) -> [f64; N_LOCAL] {
        let mut out = [0.0; N_LOCAL];
        for i in 0..N_LOCAL {
            out[i] = self.signs[t][i] * x[self.global[t][i]];
        }
        out
    }

    /// Global coefficients of the interpolant of a polynomial field given in
    /// absolute coordinates. Reproduces `P3(Ω; S)` fields exactly.
    pub fn interpolate(&self, mesh: &Mesh, f: &SymPoly) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_dofs];
        for el in mesh.elements() {
            let local = apply_catalog(&el, [0.0, 0.0], f);
            for i in 0..N_LOCAL {
                out[self.global[el.id][i]] = self.signs[el.id][i] * local[i];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisplacementDofMap {
    n_triangles: usize,
}

impl DisplacementDofMap {
    pub fn new(mesh: &Mesh) -> Self {
        Self { n_triangles: mesh.n_triangles() }
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_triangles
    }

    pub fn global(&self, t: usize) -> [usize; 3] {
        [3 * t, 3 * t + 1, 3 * t + 2]
    }
}
