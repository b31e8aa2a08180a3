//! Quantum backflow for a particle on the line scattering off short-range
//! potentials.
//!
//! The crate computes the lowest spectral value of the smeared asymptotic
//! current operator restricted to incoming right-movers, together with the
//! maximising state. Everything here is pure computation: it builds with
//! `alloc` only, and IO, configuration and parallel drivers live in the
//! `backflow` companion crate.
//!
//! Units: `hbar = m = 1`, all lengths in units of the chosen scale.
#![no_std]
// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod ode;
pub mod position;
pub mod potential;
pub mod quadrature;
pub mod scattering;
pub mod smearing;
pub mod spectral;

pub use error::{Error, Result};
pub use kernels::{KernelMatrix, KernelMethod, QuadratureSpec};
pub use potential::Potential;
pub use scattering::{ScatteringState, ScatteringWave, Side, WaveCache};
pub use smearing::SmearingFunction;
pub use spectral::{BackflowResult, MomentumGrid};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
