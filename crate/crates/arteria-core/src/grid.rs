//! Uniform periodic grid on [0, 2*pi) with cached FFT plans.
//!
//! Spectral convention: a real field is represented as
//! `f(x) = sum_{|k| <= n/2} c(k) exp(i k x)` and only the half-spectrum
//! `k = 0..=n/2` is stored; negative modes are implied by conjugate symmetry
//! `c(-k) = conj(c(k))`, so realness holds by construction. Under this
//! normalization `c(0)` is the spatial mean and the L2 pairing reads
//! `integral(f g) = 2 pi * sum_k c_f(k) conj(c_g(k))` over the full spectrum.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::SpectralField;

/// Grid resolution plus forward/inverse transform plans, shared immutably
/// between fields, operator tables, and worker threads.
pub struct Grid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl Grid {
    /// Plans transforms for an `n`-point grid. `n` must be even and at
    /// least 8 so every derivative order keeps at least one resolved pair.
    pub fn new(n: usize) -> Result<Arc<Grid>> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::GridSize(n));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid { n, forward, inverse }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored coefficients, `n/2 + 1`.
    pub fn num_modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// Largest resolved wavenumber, `n/2`.
    pub fn max_wavenumber(&self) -> usize {
        self.n / 2
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Samples `f` at the nodes and transforms to coefficients.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> SpectralField {
        let values: Vec<f64> = (0..self.n).map(|j| f(self.node(j))).collect();
        self.to_spectral(&values).expect("sampled buffer has grid length")
    }

    /// Transforms nodal values to half-spectrum coefficients.
    pub fn to_spectral(self: &Arc<Self>, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: values.len() });
        }
        let mut buf: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        let mut coeffs: Vec<Complex64> =
            buf[..self.num_modes()].iter().map(|c| c * scale).collect();
        // Bins 0 and n/2 are real for real input; drop their roundoff-level
        // imaginary parts so the stored representation stays canonical.
        coeffs[0].im = 0.0;
        let nyq = self.n / 2;
        coeffs[nyq].im = 0.0;
        Ok(SpectralField::from_coeffs_unchecked(Arc::clone(self), coeffs))
    }

    /// All-zero field on this grid.
    pub fn zero_field(self: &Arc<Self>) -> SpectralField {
        SpectralField::from_coeffs_unchecked(
            Arc::clone(self),
            vec![Complex64::new(0.0, 0.0); self.num_modes()],
        )
    }

    /// Expands the half-spectrum to a full conjugate-symmetric buffer and
    /// inverse-transforms to nodal values. Any imaginary part left on the
    /// Nyquist bin by a complex multiplier is discarded, matching the
    /// half-complex inverse convention.
    pub(crate) fn to_physical_from(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = Complex64::new(coeffs[0].re, 0.0);
        for k in 1..n / 2 {
            buf[k] = coeffs[k];
            buf[n - k] = coeffs[k].conj();
        }
        buf[n / 2] = Complex64::new(coeffs[n / 2].re, 0.0);
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

/// Two grids are interchangeable when they have the same resolution.
pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::GridMismatch { left: a.n(), right: b.n() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_sizes() {
        assert_eq!(Grid::new(9).unwrap_err(), Error::GridSize(9));
        assert_eq!(Grid::new(6).unwrap_err(), Error::GridSize(6));
        assert_eq!(Grid::new(0).unwrap_err(), Error::GridSize(0));
        Grid::new(8).unwrap();
    }

    #[test]
    fn nodes_span_the_period_without_the_endpoint() {
        let g = Grid::new(8).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert!(g.node(7) < 2.0 * std::f64::consts::PI);
        assert!((g.spacing() - std::f64::consts::PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_is_a_pure_zero_mode() {
        let g = Grid::new(16).unwrap();
        let f = g.to_spectral(&[2.5; 16]).unwrap();
        assert!((f.coeff(0).re - 2.5).abs() < 1e-14);
        for k in 1..=g.max_wavenumber() {
            assert!(f.coeff(k).norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_occupies_exactly_one_stored_bin() {
        let g = Grid::new(32).unwrap();
        let f = g.sample(|x| (3.0 * x).cos());
        for k in 0..=g.max_wavenumber() {
            let expect = if k == 3 { 0.5 } else { 0.0 };
            assert!((f.coeff(k).re - expect).abs() < 1e-14, "k={k}");
            assert!(f.coeff(k).im.abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn wrong_length_buffer_is_reported() {
        let g = Grid::new(16).unwrap();
        assert_eq!(
            g.to_spectral(&[0.0; 10]).unwrap_err(),
            Error::LengthMismatch { expected: 16, got: 10 }
        );
    }
}
