//! Numerical laboratory for positive-energy relativistic wave functions.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure numerics:
//!
//! * [`spectral`]: 1+1D Dirac symbol, energy projectors, positive/negative
//!   splitting of two-component fields on a periodic grid.
//! * [`evolution`]: free and potential-coupled time evolution, causality and
//!   spectral-fragility diagnostics.
//! * [`localization`]: Newton–Wigner states, tail fits and the minimal
//!   localization eigenproblem on the positive-energy subspace.
//! * [`povm`]: detector operators (indicators and their positive-energy
//!   compressions), commutators and covariance checks.
//! * [`bell`]: a truncated Fock-space lattice model with particle creation and
//!   a Bell-type stochastic jump process on its configuration space.
//!
//! IO, configuration and the command-line runner live in the `poslab` crate.

#![no_std]

extern crate alloc;

pub mod bell;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod linalg;
pub mod localization;
pub mod povm;
pub mod spectral;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);
