//! Physical parameters of the unidirectional flow model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the evolution equation.
///
/// `kappa` (wall friction) must be strictly positive: the dispersive
/// denominator a(k) = kappa + (nu/2) k^2 degenerates at k = 0 otherwise and
/// the frictionless limit is outside the model's regime. `nu` (viscoelastic
/// damping) may be exactly zero, which switches the nonlocal operators to
/// their local low-pass form. `eps` scales the linear terms and must be
/// positive; `beta` (velocity-profile shape) is unconstrained, though decay
/// results hold only for `beta > -2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu: f64,
    pub eps: f64,
    pub kappa: f64,
    pub beta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { nu: 1.0, eps: 1.0, kappa: 1.0, beta: 1.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::Parameter {
                name: "kappa",
                value: self.kappa,
                requirement: "wall friction must be finite and > 0 (the frictionless limit is not modeled)",
            });
        }
        if !self.nu.is_finite() || self.nu < 0.0 {
            return Err(Error::Parameter {
                name: "nu",
                value: self.nu,
                requirement: "viscoelastic damping must be finite and >= 0",
            });
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::Parameter {
                name: "eps",
                value: self.eps,
                requirement: "scale parameter must be finite and > 0",
            });
        }
        if !self.beta.is_finite() {
            return Err(Error::Parameter {
                name: "beta",
                value: self.beta,
                requirement: "profile parameter must be finite",
            });
        }
        Ok(())
    }

    /// Dispersion denominator a(k) = kappa + (nu/2) k^2.
    pub fn dispersion(&self, k: f64) -> f64 {
        self.kappa + 0.5 * self.nu * k * k
    }

    /// True when the damping-free local formulation applies.
    pub fn is_local_regime(&self) -> bool {
        self.nu == 0.0
    }
}
