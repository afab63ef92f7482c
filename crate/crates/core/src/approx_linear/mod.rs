//! Linear approximation schemes: polynomial interpolation on the spectrum,
//! Chebyshev projection and kernel polynomial estimates, and the body-order
//! cluster decomposition of polynomial observables.

pub mod chebyshev;
pub mod cluster;
pub mod interp;

pub use chebyshev::{
    cheb_interp, cheb_project, gershgorin_bounds, kpm_estimate, kpm_moments, ChebSeries,
    DampingKernel, DampingKind, SpectralScaling,
};
pub use cluster::{body_order_component, vacuum_moment, vacuum_potential, vacuum_sum};
pub use interp::{interp_build, interp_eval, matrix_interpolant, sup_error, Interpolant, InterpolationSet};
