//! Hofer-geometry invariants of symplectic surfaces.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! * [`geometry`]: charts, sampled Hamiltonians, the expression language and
//!   the sphere builder used for the embeddings of the annulus;
//! * [`reeb`]: measured contour trees, the measure median and the Calabi-type
//!   quasimorphisms built from them;
//! * [`flow`]: area-preserving integration of Hamiltonian flows, energies,
//!   winding classes and transport checks;
//! * [`constructions`]: the explicit disk-translating Hamiltonians and
//!   schedules realizing a homology class;
//! * [`homology`]: classes in `H_1`, simple-loop norms, decompositions and
//!   certified bounds for the length spectrum.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod constructions;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod homology;
pub mod reeb;

mod math;
mod par;

pub use error::{Error, Result};
