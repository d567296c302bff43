//! Per-sample scalar diagnostics: norms, the slope-based continuation
//! monitors, and the quadratic energy pair of the damping-free regime.
//!
//! The continuation criterion watches `lip(t) = max_x |f_x|`: a solution
//! extends past a time horizon exactly when the running integral of `lip`
//! stays finite, so both `1/lip` (collapsing to zero at a gradient
//! singularity) and the trapezoidal accumulation of `lip` (whose growth
//! rate then diverges) are recorded.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SpectralField;
use crate::multipliers::MultiplierTable;

/// Large finite stand-in for `1/lip` when the field has no slope at all;
/// keeps the CSV numeric instead of emitting infinities.
pub const INV_LIP_SENTINEL: f64 = 1e308;

/// One sampled row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// Zero-mode coefficient; conserved by the dynamics.
    pub mean: f64,
    /// L2 norm of the field.
    pub l2: f64,
    /// `||f||_L2^2 + || |dx|^s f ||_L2^2` at the configured Sobolev index.
    pub hs_energy: f64,
    /// `max_x |f_x|`.
    pub lip: f64,
    /// `1/lip`, or [`INV_LIP_SENTINEL`] when the slope vanishes.
    pub inv_lip: f64,
    /// Trapezoidal accumulation of `lip` over the sampled times.
    pub cum_integral: f64,
    /// `||f||^2 + (4/kappa^2) ||f_x||^2`.
    pub e1: f64,
    /// `||f_x||^2 + (4/kappa^2) ||f_xx||^2`.
    pub e2: f64,
    /// `||f_x||^2`.
    pub d1: f64,
    /// `||f_xx||^2`.
    pub d2: f64,
}

/// Trapezoidal update of the running `lip` integral between two samples.
pub fn accumulate_integral(prev_cum: f64, prev_t: f64, prev_lip: f64, t: f64, lip: f64) -> f64 {
    prev_cum + 0.5 * (lip + prev_lip) * (t - prev_t)
}

/// Largest nodal slope magnitude of the field.
pub fn lipschitz_seminorm(f: &SpectralField) -> Result<f64> {
    Ok(f.differentiate(1)?.max_abs_physical())
}

impl DiagnosticsRow {
    /// Evaluates every column at time `t`; `prev` carries the integral
    /// forward (`None` starts it at zero).
    pub fn compute(
        t: f64,
        f: &SpectralField,
        table: &MultiplierTable,
        prev: Option<&DiagnosticsRow>,
    ) -> Result<DiagnosticsRow> {
        let fx = f.differentiate(1)?;
        let fxx = f.differentiate(2)?;
        let l2_sq = f.l2_norm_sq();
        let d1 = fx.l2_norm_sq();
        let d2 = fxx.l2_norm_sq();
        let lip = fx.max_abs_physical();
        let inv = 1.0 / lip;
        let inv_lip = if lip > 0.0 && inv.is_finite() { inv } else { INV_LIP_SENTINEL };
        let cum_integral = match prev {
            Some(p) => accumulate_integral(p.cum_integral, p.t, p.lip, t, lip),
            None => 0.0,
        };
        let kappa = table.params().kappa;
        let w = 4.0 / (kappa * kappa);
        Ok(DiagnosticsRow {
            t,
            mean: f.mean(),
            l2: l2_sq.sqrt(),
            hs_energy: l2_sq + table.apply_lambda_s(f)?.l2_norm_sq(),
            lip,
            inv_lip,
            cum_integral,
            e1: l2_sq + w * d1,
            e2: d1 + w * d2,
            d1,
            d2,
        })
    }
}
