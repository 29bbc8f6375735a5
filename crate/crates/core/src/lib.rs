//! Numerical laboratory for the axisymmetric Bernoulli free-boundary problem
//!
//! The governing system is
//!
//! ```text
//! div((1/x) ∇ψ) = -x f(ψ)   in Ω ∩ {ψ > 0},
//! |∇ψ|² / x²    = -y        on Ω ∩ ∂{ψ > 0},
//! ```
//!
//! posed on a subset of the half-plane {x ≥ 0}, with ψ the Stokes stream
//! function of a steady axisymmetric flow and f a prescribed vorticity
//! function. Free-boundary points where ∇ψ vanishes are *degenerate*:
//! stagnation points on {y = 0, x > 0}, on-axis points {x = 0, y < 0},
//! and the origin.
//!
//! This crate provides:
//!
//! - [`legendre`]: fractional-degree Legendre functions, the root z* of
//!   P′_{3/2} and the cone angle θ* = arccos z*;
//! - [`profiles`]: the closed-form homogeneous blow-up limits (Stokes
//!   corner, axis parabola Cx², Garabedian pointed bubble) with gradients
//!   and conjugate potentials;
//! - [`densities`]: weighted density functionals on discretized stream
//!   functions, their r → 0+ extrapolation, reference density menus, and
//!   numerical verification of the monotonicity identities;
//! - [`blowup`]: rescaling of grids, convergence diagnostics, free-boundary
//!   extraction, and classification of degenerate points into the
//!   wave-profile taxonomy;
//! - [`solver`]: projected-gradient minimization of the variational energy
//!   to synthesize stream functions with genuine free boundaries;
//! - [`grid`]: the `StreamGrid` container and its FBG1 file format.

pub mod blowup;
pub mod densities;
pub mod error;
pub mod grid;
pub mod legendre;
pub mod parallel;
pub mod polar;
pub mod profiles;
pub mod solver;
pub mod vorticity;

pub use error::CoreError;
pub use legendre::ConeAngle;
pub use polar::PolarPoint;
