//! Exact construction, verification, and spectral analysis of rigid
//! combinatorial structures: orthogonal arrays, block designs, and uniform
//! permutation sets, all modeled as subsets of a finite ground set whose
//! counting vector must match a scaled total exactly.
//!
//! The crate is organized around [`framework::Instance`]: a finite ground set
//! `B`, an integer evaluation map `φ: B → ℤ^A`, and the four structural
//! conditions (divisibility, boundedness, symmetry, isolation) that make
//! uniform random subsets hit exact solutions with predictable probability.
//! Family modules build concrete instances; the sampler searches for
//! solutions; the Fourier module computes the characteristic-function
//! diagnostics that explain *why* the search succeeds at the predicted rate.
//!
//! All counting arithmetic is exact (`num-bigint` / `num-rational`); floats
//! are confined to spectral diagnostics and heuristic windows.

#[cfg(any(doc, doctest))]
pub mod book;
pub mod cli;
pub mod design;
pub mod error;
pub mod fourier;
pub mod framework;
pub mod io;
pub mod oa;
pub mod perm;
pub mod sampler;

mod gf;
mod linalg;
mod util;

pub use error::{Error, Result};
pub use framework::{
    custom_instance, ElementKey, Family, FrameworkConstants, GreedyConfig, GroundSet, Instance,
    IsolationFamily, PhiVector, SparseDomainVector, SymmetryMode, SymmetryWitness,
};
pub use linalg::RationalMatrix;
