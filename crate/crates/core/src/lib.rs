//! Core numerics for the Schrodinger-Debye system
//!
//! ```text
//!     i u_t + (1/2) Delta u = u v,
//!     mu v_t + v = lambda |u|^2,      lambda = +/-1,  mu >= 0,
//! ```
//!
//! posed on R^n, n = 1..4, with lambda = -1 the focusing coupling. The
//! mu -> 0 limit collapses the relaxation to v = lambda |u|^2 and the system
//! to the cubic Schrodinger equation i u_t + (1/2) Delta u = lambda |u|^2 u.
//!
//! The crate provides:
//! * periodic Cartesian and radially symmetric grids with spectral /
//!   finite-volume operators ([`grid`]);
//! * the exact exponential integrator for the relaxation field ([`debye`]);
//! * a Strang split-step solver with adaptive step control and blow-up
//!   detection ([`stepper`]);
//! * canonical initial data families ([`initial_data`]);
//! * conservation, energy-law and virial diagnostics ([`diagnostics`]);
//! * calculators for the analytic side: well-posedness regions, gradient
//!   trapping bounds, scaling maps and variance-collapse windows ([`theory`]).

pub mod debye;
pub mod diagnostics;
mod error;
mod fourier;
pub mod grid;
pub mod initial_data;
pub mod stepper;
pub mod theory;
mod tridiag;

pub use error::{Result, SdError};
pub use grid::{ComplexField, GridKind, GridSpec, RealField};
