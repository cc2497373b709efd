//! Validated integration of initial value problems coupled with their
//! first-order variational equations.
//!
//! The integrator advances a set of initial conditions with a high-order
//! interval Taylor predictor and tightens the result with an implicit
//! corrector built on two-point Hermite interpolation, whose remainder
//! coefficient shrinks the truncation error by the inverse of a central
//! binomial. Sets are carried in doubleton form (a well-conditioned
//! parallelepiped plus a QR-aligned error term) to keep the wrapping effect
//! under control, for both the state box and the variational matrix.
//!
//! On top of the integrator sit rigorous Poincaré-map tools (first-return
//! detection, interval-Newton return times, map derivatives) and the
//! certification drivers that establish trapping regions, covering
//! relations and cone conditions for the Rössler attractor.

pub mod enclosure;
pub mod error;
pub mod interval;
pub mod linalg;
pub mod poincare;
pub mod proofs;
pub mod setrep;
pub mod stepper;
pub mod vectorfield;

pub use error::Error;
pub use interval::{IMatrix, IVector, Interval, PMatrix, PVector};
