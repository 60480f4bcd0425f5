//! Mixed finite elements for the clamped biharmonic problem.
//!
//! The stress `σ = −∇²u` is discretised in a cubic H(div div; S)-conforming
//! space of symmetric tensor fields and the displacement `u` in discontinuous
//! piecewise linears. Everything here is `no_std` + `alloc`: the crate builds
//! meshes, local bases, sparse saddle-point systems, solves them, and
//! evaluates the error norms used in convergence studies. File formats, the
//! command-line driver and threading live in the `divdiv` companion crate.
//!
//! Layout:
//!
//! * [`mesh`]: triangulations of the unit square and the L-shape, red refinement, perturbation.
//! * [`quadrature`]: Duffy-collapsed Gauss rules on the reference triangle, Gauss rules on edges.
//! * [`poly`]: dense bivariate polynomials and symmetric-tensor polynomial fields.
//! * [`basis`]: the 30-function local stress basis and its Vandermonde oracle.
//! * [`dofmap`]: global numbering of stress and displacement unknowns.
//! * [`assembly`]: mass, div div coupling and load assembly into CSR matrices.
//! * [`solver`]: direct and MINRES solves of the saddle-point system, inf-sup estimation.
//! * [`analysis`]: L² projections, error norms, the mesh-dependent H² seminorm, postprocessing.
//! * [`problems`]: manufactured solutions evaluated through a truncated Taylor engine ([`jet`]).
//! * [`complex`]: the vectorial H¹ element and discrete exact-sequence checks.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod complex;
pub mod dense;
pub mod dofmap;
pub mod error;
pub mod jet;
pub mod mesh;
pub mod poly;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
