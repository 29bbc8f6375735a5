//! Closed-form homogeneous blow-up limits at degenerate free-boundary points.
//!
//! Three nontrivial profiles occur, one per degenerate-point type:
//!
//! - **Stokes corner** (stagnation point (x₀, 0), degree 3/2):
//!   ψ₀ = (√2/3) x₀ ρ^{3/2} cos(3θ/2 + π/2) on the 120° cone
//!   2π/3 < θ < 4π/3, with (ρ, θ) polar around the vertex. The phase +π/2
//!   is the representative of the family θ₁ = -π/2 + kπ that makes ψ₀ ≥ 0
//!   on the support (the -π/2 representative is negative there).
//! - **Axis parabola** (on-axis point (0, y₀), degree 2): ψ₀ = C x².
//! - **Garabedian pointed bubble** (origin, degree 5/2):
//!   ψ₀ = C₀ r^{5/2} sin²θ P′_{3/2}(cos θ) on 0 < θ < θ*, where θ* is the
//!   cone angle from [`crate::legendre`] and C₀ is fixed uniquely by the
//!   Bernoulli condition |∇ψ₀|² = -x²y on the free ray θ = θ*
//!   (see [`determine_garabedian_constant`]).
//!
//! Value evaluation vanishes identically outside the open support cone;
//! gradients use the closed cone so that the one-sided limits on the free
//! rays (the values entering the Bernoulli condition) are returned there.
//! At the vertex r = 0 the gradient is defined as the zero vector (the
//! profiles are o(r) there since κ > 1); residual tests exclude the vertex.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::legendre::{self, ConeAngle};
use crate::polar::PolarPoint;

/// Lower boundary ray of the Stokes corner support cone.
pub const STOKES_THETA_LO: f64 = 2.0 * PI / 3.0;
/// Upper boundary ray of the Stokes corner support cone.
pub const STOKES_THETA_HI: f64 = 4.0 * PI / 3.0;

/// One of the closed-form blow-up limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupProfile {
    Zero,
    /// Stokes corner at the stagnation point (x0, 0).
    StokesCorner { x0: f64 },
    /// ψ₀ = C x², the blow-up at an on-axis degenerate point.
    AxisParabolic { c: f64 },
    /// Garabedian pointed bubble at the origin.
    GarabedianBubble { c0: f64, cone: ConeAngle },
}

impl BlowupProfile {
    /// Homogeneity degree κ with ψ₀(λX) = λ^κ ψ₀(X); `None` for the zero
    /// profile.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            BlowupProfile::Zero => None,
            BlowupProfile::StokesCorner { .. } => Some(1.5),
            BlowupProfile::AxisParabolic { .. } => Some(2.0),
            BlowupProfile::GarabedianBubble { .. } => Some(2.5),
        }
    }

    /// Vertex of the profile in physical coordinates.
    pub fn vertex(&self) -> (f64, f64) {
        match self {
            BlowupProfile::StokesCorner { x0 } => (*x0, 0.0),
            _ => (0.0, 0.0),
        }
    }

    /// ψ₀ at the physical point (x, y).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            BlowupProfile::Zero => 0.0,
            BlowupProfile::StokesCorner { x0 } => {
                stokes_corner_eval(*x0, PolarPoint::from_cartesian(x - x0, y))
            }
            BlowupProfile::AxisParabolic { c } => axis_parabolic_eval(*c, x, y),
            BlowupProfile::GarabedianBubble { c0, cone } => {
                garabedian_eval(*c0, *cone, PolarPoint::from_cartesian(x, y))
            }
        }
    }

    /// ∇ψ₀ at the physical point (x, y); closed support cone, zero vector
    /// at the vertex.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            BlowupProfile::Zero => (0.0, 0.0),
            BlowupProfile::StokesCorner { x0 } => {
                stokes_corner_gradient(*x0, PolarPoint::from_cartesian(x - x0, y))
            }
            BlowupProfile::AxisParabolic { c } => (2.0 * c * x, 0.0),
            BlowupProfile::GarabedianBubble { c0, cone } => {
                garabedian_gradient(*c0, *cone, PolarPoint::from_cartesian(x, y))
            }
        }
    }
}

/// Converts a gradient in the (r, θ)-frame (θ from the +y axis) at angle
/// θ to Cartesian (∂x, ∂y).
fn polar_to_cartesian_gradient(d_r: f64, d_theta_over_r: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (s * d_r + c * d_theta_over_r, c * d_r - s * d_theta_over_r)
}

/// Stokes corner value: (√2/3) x₀ ρ^{3/2} cos(3θ/2 + π/2) on the open cone
/// 2π/3 < θ < 4π/3, zero elsewhere.
pub fn stokes_corner_eval(x0: f64, p: PolarPoint) -> f64 {
    if p.theta <= STOKES_THETA_LO || p.theta >= STOKES_THETA_HI {
        return 0.0;
    }
    let c1 = 2.0_f64.sqrt() / 3.0 * x0;
    c1 * p.r.powf(1.5) * (1.5 * p.theta + FRAC_PI_2).cos()
}

/// Stokes corner gradient in Cartesian components, using the closed cone
/// (one-sided limits on the boundary rays) and the zero vector at ρ = 0.
pub fn stokes_corner_gradient(x0: f64, p: PolarPoint) -> (f64, f64) {
    if p.r == 0.0 || p.theta < STOKES_THETA_LO || p.theta > STOKES_THETA_HI {
        return (0.0, 0.0);
    }
    let c1 = 2.0_f64.sqrt() / 3.0 * x0;
    let phase = 1.5 * p.theta + FRAC_PI_2;
    let sq = p.r.sqrt();
    let d_r = 1.5 * c1 * sq * phase.cos();
    let d_theta_over_r = -1.5 * c1 * sq * phase.sin();
    polar_to_cartesian_gradient(d_r, d_theta_over_r, p.theta)
}

/// ψ₀ = C x².
pub fn axis_parabolic_eval(c: f64, x: f64, _y: f64) -> f64 {
    c * x * x
}

/// Garabedian bubble value: C₀ r^{5/2} sin²θ P′_{3/2}(cos θ) on the open
/// cone 0 < θ < θ*, zero elsewhere.
pub fn garabedian_eval(c0: f64, cone: ConeAngle, p: PolarPoint) -> f64 {
    if p.theta <= 0.0 || p.theta >= cone.theta_star || p.r == 0.0 {
        return 0.0;
    }
    let s = p.theta.sin();
    // cos θ ∈ (z*, 1) on the cone, far from -1: lenient summation always
    // meets the strict tolerance here.
    let (dp, _) = legendre::legendre_p_prime_lenient(1.5, p.theta.cos());
    c0 * p.r.powf(2.5) * s * s * dp
}

/// Garabedian bubble gradient (closed cone, zero vector at the vertex).
pub fn garabedian_gradient(c0: f64, cone: ConeAngle, p: PolarPoint) -> (f64, f64) {
    if p.r == 0.0 || p.theta <= 0.0 || p.theta > cone.theta_star {
        return (0.0, 0.0);
    }
    let (s, c) = p.theta.sin_cos();
    let (dp, _) = legendre::legendre_p_prime_lenient(1.5, c);
    let d2p = legendre::legendre_p_second(1.5, c)
        .expect("cos(theta) interior to (-1,1) on the support cone");
    let g = s * s * dp;
    let g_prime = 2.0 * s * c * dp - s * s * s * d2p;
    let r32 = p.r.powf(1.5);
    let d_r = 2.5 * c0 * r32 * g;
    let d_theta_over_r = c0 * r32 * g_prime;
    polar_to_cartesian_gradient(d_r, d_theta_over_r, p.theta)
}

/// The unique C₀ > 0 making the Garabedian bubble satisfy |∇ψ₀|² = -x²y on
/// the free ray θ = θ*.
///
/// On the ray, ψ₀ and P′_{3/2}(z*) vanish, so the gradient is purely
/// angular: |∇ψ₀|² = C₀² r³ sin⁶θ* P″_{3/2}(z*)². The right side is
/// -x²y = r³ sin²θ* (-z*). Equating,
///
/// ```text
/// C₀ = √(-z*) / (sin²θ* |P″_{3/2}(z*)|).
/// ```
pub fn determine_garabedian_constant(cone: ConeAngle) -> Result<f64> {
    let d2p = legendre::legendre_p_second(1.5, cone.z_star)?;
    let s = cone.theta_star.sin();
    if d2p == 0.0 || s == 0.0 {
        return Err(CoreError::Domain(
            "degenerate cone angle passed to determine_garabedian_constant".into(),
        ));
    }
    Ok((-cone.z_star).sqrt() / (s * s * d2p.abs()))
}

/// Result of a finite-difference verification of the conjugate-potential
/// relations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConjugateCheck {
    /// Max residual of ∂Φ₀/∂x + (1/x)∂ψ₀/∂y and ∂Φ₀/∂y - (1/x)∂ψ₀/∂x over
    /// the sample set.
    pub max_residual: f64,
    /// False when halving the step failed to shrink the residual, i.e. the
    /// step is too large for the asymptotic O(h²) regime.
    pub asymptotic: bool,
    /// The step actually used.
    pub step: f64,
}

/// The conjugate potential Φ₀ of a weighted-harmonic profile:
/// ∂Φ₀/∂x = -(1/x) ∂ψ₀/∂y and ∂Φ₀/∂y = (1/x) ∂ψ₀/∂x inside the support.
///
/// For the axis parabola ψ₀ = C x² the potential is Φ₀ = 2C y (homogeneous
/// of degree 1); for the Garabedian bubble ψ₀ = C₀ r^{5/2} sin²θ P′(cos θ)
/// it is Φ₀ = (5/2) C₀ r^{3/2} P_{3/2}(cos θ) (degree 3/2). Both follow
/// from the Legendre identity 2zP′ - (1-z²)P″ = (15/4)P at z = cos θ.
#[derive(Debug, Clone, Copy)]
pub struct ConjugatePotential {
    profile: BlowupProfile,
}

impl ConjugatePotential {
    pub fn new(profile: BlowupProfile) -> Result<Self> {
        match profile {
            BlowupProfile::AxisParabolic { .. } | BlowupProfile::GarabedianBubble { .. } => {
                Ok(Self { profile })
            }
            _ => Err(CoreError::Domain(
                "conjugate potential defined only for the axis-parabolic and \
                 Garabedian profiles"
                    .into(),
            )),
        }
    }

    pub fn profile(&self) -> BlowupProfile {
        self.profile
    }

    /// Φ₀ at (x, y). Only meaningful inside the profile support.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.profile {
            BlowupProfile::AxisParabolic { c } => 2.0 * c * y,
            BlowupProfile::GarabedianBubble { c0, .. } => {
                let p = PolarPoint::from_cartesian(x, y);
                if p.r == 0.0 {
                    return 0.0;
                }
                let z = p.theta.cos().clamp(-1.0 + 1e-12, 1.0 - 1e-12);
                let (value, _, _) = legendre_p_all(z);
                2.5 * c0 * p.r.powf(1.5) * value
            }
            _ => unreachable!(),
        }
    }

    /// Max finite-difference residual of both defining relations on sample
    /// points strictly inside the support.
    pub fn check(&self, h: f64) -> Result<ConjugateCheck> {
        if !(h > 0.0) {
            return Err(CoreError::Domain(format!("step must be positive, got {h}")));
        }
        let res_h = self.max_residual(h);
        let res_h2 = self.max_residual(0.5 * h);
        Ok(ConjugateCheck {
            max_residual: res_h,
            // O(h²) decay would give a factor of 4; accept anything
            // meaningfully contractive.
            asymptotic: res_h2 <= 0.6 * res_h || res_h < 1e-12,
            step: h,
        })
    }

    fn sample_points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        match self.profile {
            BlowupProfile::AxisParabolic { .. } => {
                for i in 1..=8 {
                    for j in -4..=4i32 {
                        pts.push((0.2 + 0.1 * i as f64, 0.25 * j as f64));
                    }
                }
            }
            BlowupProfile::GarabedianBubble { cone, .. } => {
                for i in 1..=8 {
                    let r = 0.2 + 0.1 * i as f64;
                    for j in 1..=8 {
                        let theta = cone.theta_star * (j as f64) / 9.0;
                        pts.push((r * theta.sin(), r * theta.cos()));
                    }
                }
            }
            _ => {}
        }
        pts
    }

    fn max_residual(&self, h: f64) -> f64 {
        let mut worst = 0.0_f64;
        for (x, y) in self.sample_points() {
            let phi_x = (self.eval(x + h, y) - self.eval(x - h, y)) / (2.0 * h);
            let phi_y = (self.eval(x, y + h) - self.eval(x, y - h)) / (2.0 * h);
            let psi_x = (self.profile.eval(x + h, y) - self.profile.eval(x - h, y)) / (2.0 * h);
            let psi_y = (self.profile.eval(x, y + h) - self.profile.eval(x, y - h)) / (2.0 * h);
            let r1 = phi_x + psi_y / x;
            let r2 = phi_y - psi_x / x;
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        worst
    }
}

fn legendre_p_all(z: f64) -> (f64, f64, f64) {
    let v = legendre::legendre_p(1.5, z).expect("interior argument");
    let d = legendre::legendre_p_prime(1.5, z).expect("interior argument");
    let d2 = legendre::legendre_p_second(1.5, z).expect("interior argument");
    (v, d, d2)
}
