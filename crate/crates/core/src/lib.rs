//! Numerical laboratory for equally spaced point interactions on closed loops.
//!
//! The crate covers four connected problems:
//!
//! * the ground state of a Schrödinger operator with `N` identical point
//!   interactions at equal arc-length spacing on a loop ([`spectral`]),
//! * the Coulomb energy of a charged necklace and the constrained
//!   optimization machinery around it ([`electro`]),
//! * the mean-chord inequalities `D^p_{L,N}(m)` ([`chords`]),
//! * the operator on `ℓ²(Z)` whose norm bound proves those inequalities
//!   globally ([`fourier_op`]).
//!
//! Loops and bead configurations live in [`geometry`]; [`loopspec`] and
//! [`report`] are the JSON/CSV boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chords;
pub mod electro;
pub mod error;
pub mod fourier_op;
pub mod geometry;
pub mod linalg;
pub mod loopspec;
pub mod quad;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
