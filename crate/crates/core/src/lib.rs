//! Phase-entangled cat states from a photon number state and a balanced beam
//! splitter, probed by two Kerr-loaded single-photon interferometers with
//! homodyne postselection.
//!
//! The crate is `no_std` (it needs `alloc`). Module map:
//!
//! * [`special_fn`]: normalized Hermite functions, log-binomials, Gauss–Legendre rules.
//! * [`states`]: split number state, coherent-ring resolution, coherent wavefunctions.
//! * [`interferometer`]: Kerr branches, detector outcomes, joint quadrature amplitudes.
//! * [`bell`]: window probabilities, correlators, CHSH maps and optimization.
//! * [`loss`]: beam-splitter photon loss and its brute-force reference.

#![no_std]
// once std is anywhere in the build, its inherent float methods shadow
// `num_traits::Float` and the imports look unused
#![allow(unused_imports)]

extern crate alloc;

pub mod bell;
pub mod error;
pub mod interferometer;
pub mod loss;
pub mod simplex;
pub mod special_fn;
pub mod states;

pub use error::{Error, Result};
