//! Per-wavenumber symbol table for the model's nonlocal operators.
//!
//! With `a(k) = kappa + (nu/2) k^2`, the table holds
//!
//! * `p(k) = 1 / a(k)` — inverse of the dispersion operator,
//! * `m(k) = (1 + 2ik/a) / (1 + 4k^2/a^2) = a (a + 2ik) / (a^2 + 4k^2)` —
//!   the low-pass transport factor,
//! * `s(k) = m(k) - 1 = (2ik a - 4k^2) / (a^2 + 4k^2)` — its departure from
//!   the identity, which satisfies `|s(k)|^2 = 4k^2 / (a^2 + 4k^2)`,
//! * `|k|^s` — the homogeneous Sobolev weight used by the energy diagnostic.
//!
//! All of them are diagonal in coefficient space, so application is a
//! pointwise multiply over the stored half-spectrum; `m(-k) = conj(m(k))`
//! keeps realness intact structurally.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::params::ModelParams;

/// Precomputed symbols for one grid resolution and parameter set.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    params: ModelParams,
    sobolev_index: f64,
    n: usize,
    a: Vec<f64>,
    p: Vec<f64>,
    m: Vec<Complex64>,
    s: Vec<Complex64>,
    lambda_s: Vec<f64>,
}

/// Which diagonal operator to apply; used by the shared dispatch helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `p(k)`: inverse dispersion.
    InverseDispersion,
    /// `m(k)`: low-pass transport factor.
    Transport,
    /// `s(k) = m(k) - 1`: smoothing remainder.
    SmoothingRemainder,
    /// `|k|^s`: homogeneous Sobolev weight.
    SobolevWeight,
}

impl MultiplierTable {
    /// Tabulates all symbols over `k = 0..=n/2`.
    pub fn build(params: &ModelParams, grid: &Arc<Grid>, sobolev_index: f64) -> Result<Self> {
        params.validate()?;
        if !sobolev_index.is_finite() || sobolev_index < 0.0 {
            return Err(Error::Parameter {
                name: "s_index",
                value: sobolev_index,
                requirement: "Sobolev index must be finite and >= 0",
            });
        }
        let modes = grid.num_modes();
        let mut a = Vec::with_capacity(modes);
        let mut p = Vec::with_capacity(modes);
        let mut m = Vec::with_capacity(modes);
        let mut s = Vec::with_capacity(modes);
        let mut lambda_s = Vec::with_capacity(modes);
        for k in 0..modes {
            let kf = k as f64;
            let ak = params.dispersion(kf);
            let denom = ak * ak + 4.0 * kf * kf;
            let sk = Complex64::new(-4.0 * kf * kf / denom, 2.0 * kf * ak / denom);
            a.push(ak);
            p.push(1.0 / ak);
            s.push(sk);
            m.push(Complex64::new(1.0 + sk.re, sk.im));
            lambda_s.push(if k == 0 { 0.0 } else { kf.powf(sobolev_index) });
        }
        Ok(MultiplierTable {
            params: *params,
            sobolev_index,
            n: grid.n(),
            a,
            p,
            m,
            s,
            lambda_s,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sobolev_index(&self) -> f64 {
        self.sobolev_index
    }

    pub fn dispersion_symbol(&self, k: usize) -> f64 {
        self.a[k]
    }

    pub fn inverse_dispersion_symbol(&self, k: usize) -> f64 {
        self.p[k]
    }

    pub fn transport_symbol(&self, k: usize) -> Complex64 {
        self.m[k]
    }

    pub fn smoothing_symbol(&self, k: usize) -> Complex64 {
        self.s[k]
    }

    fn check_field(&self, f: &SpectralField) -> Result<()> {
        if f.grid().n() != self.n {
            return Err(Error::GridMismatch { left: self.n, right: f.grid().n() });
        }
        Ok(())
    }

    pub fn apply(&self, kind: OperatorKind, f: &SpectralField) -> Result<SpectralField> {
        self.check_field(f)?;
        let mut out = f.clone();
        match kind {
            OperatorKind::InverseDispersion => {
                for (c, &pk) in out.coeffs_mut().iter_mut().zip(&self.p) {
                    *c *= pk;
                }
            }
            OperatorKind::Transport => {
                for (c, &mk) in out.coeffs_mut().iter_mut().zip(&self.m) {
                    *c *= mk;
                }
            }
            OperatorKind::SmoothingRemainder => {
                for (c, &sk) in out.coeffs_mut().iter_mut().zip(&self.s) {
                    *c *= sk;
                }
            }
            OperatorKind::SobolevWeight => {
                for (c, &lk) in out.coeffs_mut().iter_mut().zip(&self.lambda_s) {
                    *c *= lk;
                }
            }
        }
        Ok(out)
    }

    /// Inverse dispersion operator (symbol `p(k)`); self-adjoint and
    /// positivity-preserving on each mode.
    pub fn apply_p(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply(OperatorKind::InverseDispersion, f)
    }

    /// Transport low-pass factor (symbol `m(k)`); `m(0) = 1` so the mean
    /// passes through untouched.
    pub fn apply_m(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply(OperatorKind::Transport, f)
    }

    /// Smoothing remainder (symbol `m(k) - 1`), one order smoother than the
    /// identity: see [`MultiplierTable::smoothing_norm_bound`].
    pub fn apply_s(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply(OperatorKind::SmoothingRemainder, f)
    }

    /// Homogeneous Sobolev weight `|k|^s`; annihilates the zero mode.
    pub fn apply_lambda_s(&self, f: &SpectralField) -> Result<SpectralField> {
        self.apply(OperatorKind::SobolevWeight, f)
    }

    /// Constant `C` with `||S f||_{H^(s+1)} <= C ||f||_{H^s}`, available
    /// only when `nu > 0` (without damping the remainder gains no
    /// derivative).
    pub fn smoothing_norm_bound(&self) -> Option<f64> {
        if self.params.nu > 0.0 {
            Some((8.0f64.sqrt() / self.params.kappa).max(32.0f64.sqrt() / self.params.nu))
        } else {
            None
        }
    }

    /// Relative residual of the resolvent identity
    /// `dxx(P f) = -(2/nu) f + (2 kappa/nu) P f`, which closes because
    /// `-k^2 p(k)` and `-(2/nu) + (2 kappa/nu) p(k)` agree mode by mode.
    /// Errors when `nu = 0`: the identity has no meaning there.
    pub fn resolvent_identity_residual(&self, f: &SpectralField) -> Result<f64> {
        if self.params.nu == 0.0 {
            return Err(Error::IdentityUndefined);
        }
        self.check_field(f)?;
        let pf = self.apply_p(f)?;
        let mut residual = pf.differentiate(2)?;
        residual.axpy(2.0 / self.params.nu, f);
        residual.axpy(-2.0 * self.params.kappa / self.params.nu, &pf);
        let denom = f.l2_norm();
        Ok(if denom > 0.0 { residual.l2_norm() / denom } else { residual.l2_norm() })
    }

    #[cfg(test)]
    pub(crate) fn corrupt_for_test(&mut self, k: usize, delta: f64) {
        self.p[k] += delta;
    }
}

/// Gaussian low-pass regularization with symbol `exp(-eps k^2)`; the
/// identity at `eps = 0` and an `H^r` contraction for every `eps >= 0`.
pub fn apply_mollifier(f: &SpectralField, eps: f64) -> Result<SpectralField> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Parameter {
            name: "mollify",
            value: eps,
            requirement: "regularization width must be finite and >= 0",
        });
    }
    if eps == 0.0 {
        return Ok(f.clone());
    }
    let mut out = f.clone();
    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
        let kf = k as f64;
        *c *= (-eps * kf * kf).exp();
    }
    Ok(out)
}

/// Mean-zero antiderivative: symbol `1/(ik)` for `k != 0`, zero mode mapped
/// to zero. Like odd derivatives, the Nyquist bin is zeroed.
pub fn apply_inv_dx(f: &SpectralField) -> SpectralField {
    let nyq = f.grid().max_wavenumber();
    let mut out = f.clone();
    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
        if k == 0 || k == nyq {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let kf = k as f64;
            *c = Complex64::new(c.im / kf, -c.re / kf);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn table(nu: f64, kappa: f64, n: usize) -> (Arc<Grid>, MultiplierTable) {
        let grid = Grid::new(n).unwrap();
        let params = ModelParams { nu, kappa, ..ModelParams::default() };
        let t = MultiplierTable::build(&params, &grid, 3.0).unwrap();
        (grid, t)
    }

    fn random_field(grid: &Arc<Grid>, rng: &mut StdRng) -> SpectralField {
        let values: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        grid.to_spectral(&values).unwrap()
    }

    #[test]
    fn symbols_at_unit_parameters_mode_one() {
        let (_, t) = table(1.0, 1.0, 64);
        assert!((t.dispersion_symbol(1) - 1.5).abs() < 1e-15);
        assert!((t.inverse_dispersion_symbol(1) - 2.0 / 3.0).abs() < 1e-15);
        let m = t.transport_symbol(1);
        assert!((m - Complex64::new(0.36, 0.48)).norm() < 1e-15);
        assert!((m.norm_sqr() - 0.36) < 1e-15);
        assert!((t.smoothing_symbol(1).norm_sqr() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn inverse_dispersion_inverts_the_symbol() {
        let (_, t) = table(0.7, 2.3, 128);
        for k in 0..=64 {
            let prod = t.dispersion_symbol(k) * t.inverse_dispersion_symbol(k);
            assert!((prod - 1.0).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn smoothing_symbol_magnitude_identity() {
        for (nu, kappa) in [(1.0, 1.0), (0.1, 1.0), (2.0, 3.0), (0.0, 0.5)] {
            let (_, t) = table(nu, kappa, 256);
            for k in 0..=128usize {
                let kf = k as f64;
                let a = t.dispersion_symbol(k);
                let expect = 4.0 * kf * kf / (a * a + 4.0 * kf * kf);
                assert!(
                    (t.smoothing_symbol(k).norm_sqr() - expect).abs() <= 1e-13,
                    "nu={nu} kappa={kappa} k={k}"
                );
            }
        }
    }

    #[test]
    fn transport_is_identity_plus_remainder() {
        let mut rng = StdRng::seed_from_u64(21);
        let (grid, t) = table(0.5, 1.5, 128);
        let f = random_field(&grid, &mut rng);
        let via_m = t.apply_m(&f).unwrap();
        let mut via_s = f.clone();
        via_s.axpy(1.0, &t.apply_s(&f).unwrap());
        assert!(via_m.max_coeff_diff(&via_s).unwrap() < 1e-14);
    }

    #[test]
    fn transport_scales_single_mode_by_its_symbol() {
        let (grid, t) = table(1.0, 1.0, 64);
        let f = SpectralField::single_mode(&grid, 1, Complex64::new(1.0, 0.0)).unwrap();
        let mf = t.apply_m(&f).unwrap();
        assert!((mf.coeff(1) - Complex64::new(0.36, 0.48)).norm() < 1e-15);
        assert_eq!(mf.coeff(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn transport_preserves_the_mean() {
        let (grid, t) = table(2.0, 0.7, 64);
        let f = grid.sample(|x| 1.25 + 0.3 * x.cos());
        assert!((t.apply_m(&f).unwrap().mean() - 1.25).abs() < 1e-15);
        assert!((t.apply_p(&f).unwrap().mean() - 1.25 / 0.7).abs() < 1e-14);
    }

    #[test]
    fn operators_commute_within_rounding() {
        let mut rng = StdRng::seed_from_u64(22);
        let (grid, t) = table(1.3, 0.9, 128);
        let f = random_field(&grid, &mut rng);
        let pm = t.apply_m(&t.apply_p(&f).unwrap()).unwrap();
        let mp = t.apply_p(&t.apply_m(&f).unwrap()).unwrap();
        assert!(pm.max_coeff_diff(&mp).unwrap() < 1e-14);
    }

    #[test]
    fn inverse_dispersion_is_self_adjoint() {
        let mut rng = StdRng::seed_from_u64(23);
        let (grid, t) = table(0.8, 1.1, 128);
        let f = random_field(&grid, &mut rng);
        let g = random_field(&grid, &mut rng);
        let lhs = t.apply_p(&f).unwrap().inner_product(&g).unwrap();
        let rhs = f.inner_product(&t.apply_p(&g).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn resolvent_identity_holds_with_damping() {
        let mut rng = StdRng::seed_from_u64(24);
        for (kappa, nu) in [(1.0, 1.0), (1.0, 0.1), (3.0, 2.0)] {
            let (grid, t) = table(nu, kappa, 256);
            let f = random_field(&grid, &mut rng);
            let r = t.resolvent_identity_residual(&f).unwrap();
            assert!(r <= 1e-12, "kappa={kappa} nu={nu}: residual {r:.3e}");
        }
    }

    #[test]
    fn resolvent_identity_rejects_zero_damping() {
        let (grid, t) = table(0.0, 1.0, 64);
        let f = grid.sample(|x| x.sin());
        assert_eq!(t.resolvent_identity_residual(&f).unwrap_err(), Error::IdentityUndefined);
    }

    #[test]
    fn corrupted_table_breaks_the_resolvent_identity() {
        let mut rng = StdRng::seed_from_u64(25);
        let (grid, mut t) = table(1.0, 1.0, 64);
        t.corrupt_for_test(3, 1e-3);
        let f = random_field(&grid, &mut rng);
        assert!(t.resolvent_identity_residual(&f).unwrap() > 1e-6);
    }

    #[test]
    fn zero_damping_collapses_p_to_a_constant() {
        let (_, t) = table(0.0, 2.0, 64);
        for k in 0..=32 {
            assert_eq!(t.inverse_dispersion_symbol(k), 0.5);
            let kf = k as f64;
            let denom = 1.0 + 4.0 * kf * kf / 4.0;
            let expect = Complex64::new(1.0 / denom, (2.0 * kf / 2.0) / denom);
            assert!((t.transport_symbol(k) - expect).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn smoothing_gains_one_derivative_with_damping() {
        let mut rng = StdRng::seed_from_u64(26);
        for (kappa, nu) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
            let (grid, t) = table(nu, kappa, 256);
            let f = random_field(&grid, &mut rng);
            let c = t.smoothing_norm_bound().unwrap();
            let lhs = t.apply_s(&f).unwrap().sobolev_norm_sq(4.0).sqrt();
            let rhs = c * f.sobolev_norm_sq(3.0).sqrt();
            assert!(lhs <= rhs * (1.0 + 1e-12), "kappa={kappa} nu={nu}: {lhs} > {rhs}");
        }
        let (_, t0) = table(0.0, 1.0, 64);
        assert!(t0.smoothing_norm_bound().is_none());
    }

    #[test]
    fn smoothing_bound_dominates_the_weighted_symbol() {
        for (kappa, nu) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2), (10.0, 10.0)] {
            let params = ModelParams { nu, kappa, ..ModelParams::default() };
            let cap = (8.0 / (kappa * kappa)).max(32.0 / (nu * nu));
            for k in 0..=10_000usize {
                let kf = k as f64;
                let a = params.dispersion(kf);
                let weighted = (1.0 + kf * kf) * 4.0 * kf * kf / (a * a + 4.0 * kf * kf);
                assert!(weighted <= cap * (1.0 + 1e-12), "kappa={kappa} nu={nu} k={k}");
            }
        }
    }

    #[test]
    fn sobolev_weight_annihilates_the_mean_and_scales_modes() {
        let (grid, t) = table(1.0, 1.0, 64);
        let f = grid.sample(|x| 2.0 + (2.0 * x).cos());
        let w = t.apply_lambda_s(&f).unwrap();
        assert_eq!(w.coeff(0), Complex64::new(0.0, 0.0));
        assert!((w.coeff(2).re - 8.0 * 0.5).abs() < 1e-13);
    }

    #[test]
    fn mollifier_identity_contraction_and_example_factor() {
        let mut rng = StdRng::seed_from_u64(27);
        let grid = Grid::new(128).unwrap();
        let f = random_field(&grid, &mut rng);
        assert_eq!(apply_mollifier(&f, 0.0).unwrap().max_coeff_diff(&f).unwrap(), 0.0);
        for r in [0.0, 1.5, 3.0] {
            let mollified = apply_mollifier(&f, 1e-2).unwrap();
            assert!(mollified.sobolev_norm_sq(r) <= f.sobolev_norm_sq(r) * (1.0 + 1e-14));
        }
        let mode = SpectralField::single_mode(&grid, 2, Complex64::new(1.0, 0.0)).unwrap();
        let damped = apply_mollifier(&mode, 0.25).unwrap();
        assert!((damped.coeff(2).re - (-1.0f64).exp()).abs() < 1e-15);
        assert!(apply_mollifier(&f, -0.1).is_err());
    }

    #[test]
    fn antiderivative_inverts_the_derivative_up_to_the_mean() {
        let grid = Grid::new(64).unwrap();
        let f = grid.sample(|x| 2.0 + x.cos() - 0.5 * (3.0 * x).sin());
        let restored = apply_inv_dx(&f.differentiate(1).unwrap());
        let mut mean_removed = f.clone();
        mean_removed.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        assert!(restored.max_coeff_diff(&mean_removed).unwrap() < 1e-13);
        assert_eq!(apply_inv_dx(&f).coeff(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn table_rejects_mismatched_grid() {
        let (_, t) = table(1.0, 1.0, 64);
        let other = Grid::new(32).unwrap().zero_field();
        assert!(matches!(t.apply_p(&other), Err(Error::GridMismatch { .. })));
    }
}
