//! Legendre functions of fractional and integer degree on (-1, 1).
//!
//! Solutions of the Legendre equation
//!
//! ```text
//! (1 - z²) f″(z) - 2z f′(z) + ν(ν+1) f(z) = 0
//! ```
//!
//! evaluated through the Gauss hypergeometric representation
//!
//! ```text
//! P_ν(z) = ₂F₁(-ν, ν+1; 1; (1-z)/2),
//! ```
//!
//! with derivatives obtained by term-wise differentiation of the series
//! (never finite differences). For integer ν the series terminates and
//! reproduces the classical Legendre polynomial.
//!
//! The degree ν = 3/2 drives the Garabedian pointed-bubble geometry: P′_{3/2}
//! has a unique root z* ∈ (-1, 0), and θ* = arccos z* is the half-opening
//! angle of the bubble's water cone. [`find_theta_star`] locates it by
//! bisection seeded with a coarse sign scan.
//!
//! Accuracy: the series converges geometrically with ratio (1-z)/2, so it is
//! fast for z ≥ -0.9 and degrades as z → -1 (near z = -1 the truncation cap
//! may be reached before the relative tolerance; the strict entry points
//! report this as [`CoreError::NonConvergence`]). Nothing downstream needs
//! z < -0.95.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Relative truncation target for the hypergeometric series.
const SERIES_REL_TOL: f64 = 1e-16;
/// Hard cap on series terms.
const SERIES_MAX_TERMS: usize = 100_000;
/// |P′_{3/2}(z)| below this counts as "at the pole" for [`w_ratio`].
const W_RATIO_POLE_TOL: f64 = 1e-10;

/// A Legendre function value together with its first derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreEval {
    /// Degree ν ≥ 0.
    pub degree: f64,
    /// Argument z ∈ (-1, 1).
    pub argument: f64,
    /// P_ν(z).
    pub value: f64,
    /// dP_ν/dz.
    pub derivative: f64,
}

/// The root z* of P′_{3/2} and the cone angle θ* = arccos z*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeAngle {
    /// z* ∈ (-1, 0) with P′_{3/2}(z*) = 0.
    pub z_star: f64,
    /// θ* = arccos z* ∈ (π/2, π), radians.
    pub theta_star: f64,
}

impl ConeAngle {
    /// Locates the cone angle at the default tolerance 1e-13.
    pub fn compute() -> Result<Self> {
        find_theta_star(1e-13)
    }
}

fn check_domain(nu: f64, z: f64) -> Result<()> {
    if !(z > -1.0 && z < 1.0) {
        return Err(CoreError::Domain(format!(
            "Legendre argument must satisfy -1 < z < 1, got {z}"
        )));
    }
    if !(nu >= 0.0) {
        return Err(CoreError::Domain(format!(
            "Legendre degree must satisfy nu >= 0, got {nu}"
        )));
    }
    Ok(())
}

/// Sums the ₂F₁ series for P_ν and its first two z-derivatives in one pass.
///
/// Returns ((P, P′, P″), converged). With w = (1-z)/2 the term recurrence is
/// t_{k+1} = t_k (k-ν)(k+ν+1) / (k+1)² · w; the derivative sums accumulate
/// k t_k / w and k(k-1) t_k / w², and the chain rule dw/dz = -1/2 maps them
/// back to z-derivatives.
fn series(nu: f64, z: f64) -> ((f64, f64, f64), bool) {
    let w = 0.5 * (1.0 - z);
    let mut term = 1.0_f64;
    let mut s0 = 1.0_f64; // Σ t_k
    let mut s1 = 0.0_f64; // Σ k t_k / w
    let mut s2 = 0.0_f64; // Σ k (k-1) t_k / w²
    let mut converged = false;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let ratio = (kf - nu) * (kf + nu + 1.0) / ((kf + 1.0) * (kf + 1.0));
        term *= ratio * w;
        if term == 0.0 {
            // Terminating (polynomial) case.
            converged = true;
            break;
        }
        let k1 = kf + 1.0;
        s0 += term;
        s1 += k1 * term / w;
        s2 += k1 * kf * term / (w * w);
        let tol0 = SERIES_REL_TOL * s0.abs().max(1e-30);
        let tol1 = SERIES_REL_TOL * s1.abs().max(1e-30);
        let tol2 = SERIES_REL_TOL * s2.abs().max(1e-30);
        if term.abs() <= tol0
            && (k1 * term / w).abs() <= tol1
            && (k1 * kf * term / (w * w)).abs() <= tol2
        {
            converged = true;
            break;
        }
    }
    ((s0, -0.5 * s1, 0.25 * s2), converged)
}

fn series_strict(nu: f64, z: f64) -> Result<(f64, f64, f64)> {
    check_domain(nu, z)?;
    let (vals, converged) = series(nu, z);
    if !converged {
        return Err(CoreError::NonConvergence(format!(
            "P_{nu}({z}): series cap of {SERIES_MAX_TERMS} terms reached \
             (argument too close to -1)"
        )));
    }
    Ok(vals)
}

/// Legendre function of the first kind P_ν(z).
pub fn legendre_p(nu: f64, z: f64) -> Result<f64> {
    series_strict(nu, z).map(|(p, _, _)| p)
}

/// dP_ν/dz by the term-wise differentiated series.
pub fn legendre_p_prime(nu: f64, z: f64) -> Result<f64> {
    series_strict(nu, z).map(|(_, dp, _)| dp)
}

/// d²P_ν/dz² by the twice-differentiated series.
pub fn legendre_p_second(nu: f64, z: f64) -> Result<f64> {
    series_strict(nu, z).map(|(_, _, d2p)| d2p)
}

/// P_ν(z) and dP_ν/dz together.
pub fn legendre_eval(nu: f64, z: f64) -> Result<LegendreEval> {
    let (value, derivative, _) = series_strict(nu, z)?;
    Ok(LegendreEval {
        degree: nu,
        argument: z,
        value,
        derivative,
    })
}

/// Partial-sum evaluation of dP_ν/dz that tolerates hitting the term cap.
///
/// Near z = -1 the series converges too slowly for the strict tolerance, but
/// the tail is eventually one-signed, so the partial sum already carries the
/// correct sign. Used by the sign scan over the full interval. The flag is
/// `true` when the strict tolerance was met.
pub fn legendre_p_prime_lenient(nu: f64, z: f64) -> (f64, bool) {
    let ((_, dp, _), converged) = series(nu, z);
    (dp, converged)
}

/// Legendre function of the second kind of degree 1,
/// Q₁(z) = (z/2) log((1+z)/(1-z)) - 1.
pub fn legendre_q1(z: f64) -> Result<f64> {
    if !(z > -1.0 && z < 1.0) {
        return Err(CoreError::Domain(format!(
            "Q1 argument must satisfy -1 < z < 1, got {z}"
        )));
    }
    Ok(0.5 * z * ((1.0 + z) / (1.0 - z)).ln() - 1.0)
}

/// Locates z* ∈ (-1, 0) with P′_{3/2}(z*) = 0 by bisection.
///
/// A coarse scan with 10³ points over (-0.999, 0) brackets the sign change;
/// bisection then shrinks the bracket until both the interval width and
/// |P′_{3/2}| at the midpoint are within `tolerance`.
pub fn find_theta_star(tolerance: f64) -> Result<ConeAngle> {
    if !(tolerance > 0.0) {
        return Err(CoreError::Domain(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    const NU: f64 = 1.5;
    const SCAN_POINTS: usize = 1000;
    let lo = -0.999;
    let hi = 0.0;
    let mut a = lo;
    let mut fa = legendre_p_prime(NU, a)?;
    let mut bracket = None;
    for k in 1..=SCAN_POINTS {
        let b = lo + (hi - lo) * (k as f64) / (SCAN_POINTS as f64);
        let fb = legendre_p_prime(NU, b)?;
        if fa == 0.0 {
            bracket = Some((a, a));
            break;
        }
        if fa * fb < 0.0 {
            bracket = Some((a, b));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        CoreError::BracketFailure(
            "no sign change of P'_{3/2} found in (-0.999, 0); \
             the series evaluation is broken"
                .into(),
        )
    })?;
    let mut fa = legendre_p_prime(NU, a)?;
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let fm = legendre_p_prime(NU, mid)?;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if (b - a).abs() <= tolerance && fm.abs() <= tolerance {
            break;
        }
    }
    let z_star = 0.5 * (a + b);
    Ok(ConeAngle {
        z_star,
        theta_star: z_star.acos(),
    })
}

/// The ratio w(z) = P′_{3/2}(-z) / P′_{3/2}(z), defined away from z*.
///
/// Strictly decreasing on each continuity interval, with w(-z*) = 0 and
/// w(0) = 1; its level sets pin down the admissible support cones of
/// degree-5/2 homogeneous solutions.
pub fn w_ratio(z: f64) -> Result<f64> {
    let denom = legendre_p_prime(1.5, z)?;
    if denom.abs() < W_RATIO_POLE_TOL {
        return Err(CoreError::Pole(format!(
            "P'_{{3/2}}({z}) = {denom:.3e} is below the pole threshold \
             {W_RATIO_POLE_TOL:.0e} (z too close to z*)"
        )));
    }
    let num = legendre_p_prime(1.5, -z)?;
    Ok(num / denom)
}
