//! Vorticity function models f(ψ) and their primitives F(ψ) = ∫₀^ψ f.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A vorticity function f(ψ) with primitive F normalized by F(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VorticityModel {
    /// f ≡ 0 (irrotational core).
    Zero,
    /// f ≡ λ.
    Constant { lambda: f64 },
    /// f(ψ) = λ ψ.
    Linear { lambda: f64 },
    /// Piecewise-linear f on ascending knots starting at ψ = 0; constant
    /// extension outside the knot range.
    Tabulated { psi: Vec<f64>, f: Vec<f64> },
}

impl VorticityModel {
    pub fn validate(&self) -> Result<()> {
        if let VorticityModel::Tabulated { psi, f } = self {
            if psi.len() != f.len() || psi.len() < 2 {
                return Err(CoreError::Domain(
                    "tabulated vorticity needs matching psi/f lists with >= 2 knots".into(),
                ));
            }
            if psi[0] != 0.0 {
                return Err(CoreError::Domain(
                    "tabulated vorticity knots must start at psi = 0".into(),
                ));
            }
            if psi.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CoreError::Domain(
                    "tabulated vorticity knots must be strictly increasing".into(),
                ));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::Domain("tabulated vorticity values not finite".into()));
            }
        }
        Ok(())
    }

    /// f(ψ).
    pub fn f(&self, psi: f64) -> f64 {
        match self {
            VorticityModel::Zero => 0.0,
            VorticityModel::Constant { lambda } => *lambda,
            VorticityModel::Linear { lambda } => lambda * psi,
            VorticityModel::Tabulated { psi: knots, f } => {
                if psi <= knots[0] {
                    return f[0];
                }
                if psi >= *knots.last().unwrap() {
                    return *f.last().unwrap();
                }
                let k = knots.partition_point(|&t| t <= psi) - 1;
                let t = (psi - knots[k]) / (knots[k + 1] - knots[k]);
                f[k] + t * (f[k + 1] - f[k])
            }
        }
    }

    /// F(ψ) = ∫₀^ψ f(s) ds, with F(0) = 0.
    pub fn primitive(&self, psi: f64) -> f64 {
        match self {
            VorticityModel::Zero => 0.0,
            VorticityModel::Constant { lambda } => lambda * psi,
            VorticityModel::Linear { lambda } => 0.5 * lambda * psi * psi,
            VorticityModel::Tabulated { psi: knots, f } => {
                // Exact integral of the piecewise-linear interpolant from 0.
                if psi <= 0.0 {
                    return f[0] * psi;
                }
                let mut acc = 0.0;
                let mut prev_t = knots[0];
                let mut prev_f = f[0];
                for k in 1..knots.len() {
                    if psi <= knots[k] {
                        let fv = self.f(psi);
                        acc += 0.5 * (prev_f + fv) * (psi - prev_t);
                        return acc;
                    }
                    acc += 0.5 * (prev_f + f[k]) * (knots[k] - prev_t);
                    prev_t = knots[k];
                    prev_f = f[k];
                }
                acc + *f.last().unwrap() * (psi - prev_t)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VorticityModel::Zero => true,
            VorticityModel::Constant { lambda } | VorticityModel::Linear { lambda } => {
                *lambda == 0.0
            }
            VorticityModel::Tabulated { f, .. } => f.iter().all(|&v| v == 0.0),
        }
    }
}
