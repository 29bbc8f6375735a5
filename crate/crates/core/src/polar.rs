//! The polar convention used throughout the crate.
//!
//! The angle θ is measured from the positive y-axis, so that
//! (x, y) = (r sin θ, r cos θ). θ = 0 points up the symmetry axis, θ = π/2
//! along the positive x-axis, θ = π straight down.

use serde::{Deserialize, Serialize};

/// A point in the (r, θ) coordinates with θ measured from the +y axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    /// Radius, ≥ 0.
    pub r: f64,
    /// Angle in [0, 2π), measured from the positive y-axis.
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self {
            r,
            theta: wrap_angle(theta),
        }
    }

    /// Cartesian coordinates (x, y) = (r sin θ, r cos θ).
    pub fn to_cartesian(self) -> (f64, f64) {
        (self.r * self.theta.sin(), self.r * self.theta.cos())
    }

    /// Polar coordinates of a Cartesian point.
    pub fn from_cartesian(x: f64, y: f64) -> Self {
        let r = x.hypot(y);
        let theta = if r == 0.0 { 0.0 } else { wrap_angle(x.atan2(y)) };
        Self { r, theta }
    }
}

/// Wraps an angle into [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::TAU;
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}
