//! Body-ordered approximations of local observables for finite tight-binding
//! systems.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//!
//! * [`lattice`] builds configurations and assembles two-/three-centre
//!   Hamiltonians, cluster restrictions and truncations.
//! * [`spectral`] is the exact reference: eigendecomposition, observables,
//!   moments, local densities of states and derivatives.
//! * [`potential_theory`] computes Green's functions, equilibrium measures and
//!   interpolation nodes for unions of real intervals.
//! * [`approx_linear`] holds the linear schemes (polynomial interpolation,
//!   Chebyshev/KPM, body-order decomposition, vacuum cluster expansion).
//! * [`approx_nonlinear`] holds the recursion method, Gauss quadrature and
//!   continued fractions.
//! * [`scf`] solves the self-consistent field problem for both exact and
//!   interpolated density maps.
//! * [`ratefit`] turns error curves into exponential rates.
//!
//! IO, file formats and the experiment CLI live in the companion `bodyorder`
//! crate.
#![no_std]
#![forbid(unsafe_code)]
#![cfg_attr(test, allow(unused_imports))]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod approx_linear;
pub mod approx_nonlinear;
pub mod error;
pub mod lattice;
mod linalg;
pub mod potential_theory;
pub mod quadrature;
pub mod ratefit;
pub mod scf;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense real matrix type used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector type used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
