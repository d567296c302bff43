//! Half-spectrum representation of a real periodic field, with the
//! coefficient-space operations every other module builds on: derivatives,
//! dealiasing, norms, and the small linear algebra the time stepper needs.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, Grid};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Coefficients `c(k)` for `k = 0..=n/2` of a real field
/// `f(x) = sum_k c(k) exp(i k x)`; see the grid module for the convention.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub(crate) fn from_coeffs_unchecked(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        SpectralField { grid, coeffs }
    }

    /// Builds a field from explicit half-spectrum coefficients.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.num_modes() {
            return Err(Error::LengthMismatch {
                expected: grid.num_modes(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid: Arc::clone(grid), coeffs })
    }

    /// Field with a single positive-wavenumber mode `c * exp(ikx) + c.c.`
    /// (for `k = 0` the value itself, kept real).
    pub fn single_mode(grid: &Arc<Grid>, k: usize, c: Complex64) -> Result<Self> {
        if k > grid.max_wavenumber() {
            return Err(Error::LengthMismatch { expected: grid.max_wavenumber(), got: k });
        }
        let mut f = grid.zero_field();
        f.coeffs[k] = if k == 0 { Complex64::new(c.re, 0.0) } else { c };
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    /// Spatial mean, i.e. the zero-mode coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Inverse transform to nodal values.
    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.to_physical_from(&self.coeffs)
    }

    /// Spectral derivative of the given order (1..=3): multiplication by
    /// `(ik)^order`. Odd orders zero the Nyquist bin, whose sign-ambiguous
    /// odd derivative cannot be represented by a real field.
    pub fn differentiate(&self, order: usize) -> Result<SpectralField> {
        if !(1..=3).contains(&order) {
            return Err(Error::DerivativeOrder(order));
        }
        let nyq = self.grid.max_wavenumber();
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            let kf = k as f64;
            *c = match order {
                1 => Complex64::new(-kf * c.im, kf * c.re),
                2 => -kf * kf * *c,
                _ => {
                    let k3 = kf * kf * kf;
                    Complex64::new(k3 * c.im, -k3 * c.re)
                }
            };
        }
        if order % 2 == 1 {
            out.coeffs[nyq] = Complex64::new(0.0, 0.0);
        }
        Ok(out)
    }

    /// Zeroes every mode with `k > fraction * (n/2)`; a projection, and the
    /// identity at `fraction = 1`. `fraction` is expected in (0, 1].
    pub fn dealias(&self, fraction: f64) -> SpectralField {
        debug_assert!(fraction > 0.0 && fraction <= 1.0);
        let cutoff = fraction * self.grid.max_wavenumber() as f64;
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            if k as f64 > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Squared L2 norm `2 pi * sum_{full spectrum} |c(k)|^2`; interior bins
    /// count twice for their implied negative partners.
    pub fn l2_norm_sq(&self) -> f64 {
        TWO_PI * self.weighted_mode_sum(|_| 1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Squared homogeneous seminorm `2 pi * sum |k|^(2s) |c(k)|^2`; the zero
    /// mode never contributes.
    pub fn homogeneous_norm_sq(&self, s: f64) -> f64 {
        TWO_PI * self.weighted_mode_sum(|k| if k == 0 { 0.0 } else { (k as f64).powf(2.0 * s) })
    }

    /// Squared inhomogeneous Sobolev norm `2 pi * sum (1 + k^2)^s |c(k)|^2`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        TWO_PI * self.weighted_mode_sum(|k| (1.0 + (k as f64) * (k as f64)).powf(s))
    }

    fn weighted_mode_sum(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let nyq = self.grid.max_wavenumber();
        let mut sum = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let mult = if k == 0 || k == nyq { 1.0 } else { 2.0 };
            sum += mult * weight(k) * c.norm_sqr();
        }
        sum
    }

    /// L2 pairing `integral(f g)` of two real fields.
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        let nyq = self.grid.max_wavenumber();
        let mut sum = 0.0;
        for (k, (c, d)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let mult = if k == 0 || k == nyq { 1.0 } else { 2.0 };
            sum += mult * (c * d.conj()).re;
        }
        Ok(TWO_PI * sum)
    }

    /// Largest nodal magnitude.
    pub fn max_abs_physical(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// In-place `self += a * other`. Grids must match; enforced in debug
    /// builds, the hot path trusts its callers.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid.n(), other.grid.n());
        for (c, d) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * d;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }

    /// `base + sum_i coef_i * term_i`, the stage combination the integrator
    /// performs.
    pub fn linear_combination(base: &SpectralField, terms: &[(f64, &SpectralField)]) -> SpectralField {
        let mut out = base.clone();
        for &(a, term) in terms {
            out.axpy(a, term);
        }
        out
    }

    /// Maximum modulus of the coefficient-wise difference.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (c, d)| m.max((c - d).norm())))
    }
}
