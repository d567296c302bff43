//! Independent reference computations used to cross-check the production
//! pipeline: a per-mode linear growth rate with an exact exponential
//! propagator, and a dense O(n^2) convolution evaluation of the full
//! right-hand side that never touches a transform. The convolution path is
//! the arbiter for the pseudospectral product code and deliberately refuses
//! to run at production grid sizes.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::params::ModelParams;
use crate::rhs::RhsVariant;

/// Largest grid the dense convolution reference accepts.
pub const CONVOLUTION_MAX_N: usize = 32;

/// Growth rate of mode `k` under the linearized equation, computed as the
/// product of the operator symbols with the linearized bracket
/// `(1/eps) [ (1 - beta/2) k^2 + i k a(k) ]`. This is the form the solver
/// realizes operationally; [`linear_rate_real_closed`] is the independent
/// cross-check for its real part.
pub fn linear_rate(params: &ModelParams, k: f64) -> Complex64 {
    let a = params.dispersion(k);
    let denom = a * a + 4.0 * k * k;
    let m = Complex64::new(a * a / denom, 2.0 * k * a / denom);
    let p = 1.0 / a;
    let bracket = Complex64::new(
        (1.0 - params.beta / 2.0) * k * k,
        params.kappa * k + params.nu / 2.0 * k * k * k,
    ) / params.eps;
    m * p * bracket
}

/// Closed form of `Re lambda(k) = -(1 + beta/2) a(k) k^2 / (eps (a^2 + 4k^2))`,
/// derived by expanding the symbol product by hand. Negative for every
/// nonzero mode exactly when `beta > -2`.
pub fn linear_rate_real_closed(params: &ModelParams, k: f64) -> f64 {
    let a = params.dispersion(k);
    -(1.0 + params.beta / 2.0) * a * k * k / (params.eps * (a * a + 4.0 * k * k))
}

/// Exact solution operator of the linearized equation: scales each stored
/// mode by `exp(lambda(k) t)`.
pub fn evolve_linear(f0: &SpectralField, params: &ModelParams, t: f64) -> SpectralField {
    let mut out = f0.clone();
    for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= (linear_rate(params, k as f64) * t).exp();
    }
    out
}

/// Dense reference evaluation of the model right-hand side.
///
/// Every quadratic term is an explicit double sum over coefficient pairs on
/// the full signed spectrum; derivatives and operator symbols are computed
/// inline from the parameters. Products are truncated at the grid band
/// `|k| <= n/2`, so the result matches the dealiased pseudospectral
/// evaluation exactly (up to rounding) whenever the input is band-limited
/// enough that its products stay inside the retained band.
pub fn rhs_convolution(
    params: &ModelParams,
    variant: &RhsVariant,
    f: &SpectralField,
) -> Result<SpectralField> {
    let n = f.grid().n();
    if n > CONVOLUTION_MAX_N {
        return Err(Error::ConvolutionGridTooLarge { n, max: CONVOLUTION_MAX_N });
    }
    params.validate()?;
    if matches!(variant, RhsVariant::Bbm) && !params.is_local_regime() {
        return Err(Error::VariantMismatch(
            "the local low-pass formulation requires nu = 0".into(),
        ));
    }

    let kmax = n as i64 / 2;
    let idx = |k: i64| (k + kmax) as usize;
    let len = 2 * kmax as usize + 1;

    // Full signed spectrum; the Nyquist bin sits at +kmax only.
    let mut full = vec![Complex64::new(0.0, 0.0); len];
    full[idx(0)] = f.coeff(0);
    for k in 1..=kmax {
        full[idx(k)] = f.coeff(k as usize);
        if k < kmax {
            full[idx(-k)] = f.coeff(k as usize).conj();
        }
    }

    let moll_width = match variant {
        RhsVariant::Mollified { width } => *width,
        _ => 0.0,
    };
    if moll_width > 0.0 {
        for k in -kmax..=kmax {
            full[idx(k)] *= (-moll_width * (k * k) as f64).exp();
        }
    }

    let derivative = |src: &[Complex64], order: u32| -> Vec<Complex64> {
        (-kmax..=kmax)
            .map(|k| src[idx(k)] * Complex64::new(0.0, k as f64).powu(order))
            .collect()
    };
    let d1 = derivative(&full, 1);
    let d2 = derivative(&full, 2);
    let d3 = derivative(&full, 3);

    let convolve = |u: &[Complex64], v: &[Complex64]| -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); len];
        for m in -kmax..=kmax {
            let mut sum = Complex64::new(0.0, 0.0);
            for k in (-kmax).max(m - kmax)..=kmax.min(m + kmax) {
                sum += u[idx(k)] * v[idx(m - k)];
            }
            w[idx(m)] = sum;
        }
        w
    };
    let q1 = convolve(&full, &d1);
    let q2 = convolve(&d1, &d2);
    let q3 = convolve(&full, &d3);

    let (nu, eps, kappa, beta) = (params.nu, params.eps, params.kappa, params.beta);
    let mut out_half = vec![Complex64::new(0.0, 0.0); f.grid().num_modes()];
    for k in 0..=kmax {
        if k == 0 || k == kmax {
            // Same band convention as the fast path: the mean is conserved
            // and the half-mode at the grid fold is held at zero.
            continue;
        }
        let kf = k as f64;
        let i = idx(k);
        let mut bracket = -(1.0 - beta / 2.0) / eps * d2[i] + kappa / eps * d1[i]
            - nu / (2.0 * eps) * d3[i];
        bracket += (2.0 + beta / 4.0) * Complex64::new(0.0, kf) * q1[i];
        bracket += nu / (4.0 * eps) * q2[i];
        bracket -= nu / 4.0 * q3[i];
        bracket -= 2.0 * kappa * q1[i];

        let a = params.dispersion(kf);
        let denom = a * a + 4.0 * kf * kf;
        let m = Complex64::new(a * a / denom, 2.0 * kf * a / denom);
        let mut value = m * (bracket / a);
        if moll_width > 0.0 {
            value *= (-moll_width * kf * kf).exp();
        }
        out_half[k as usize] = value;
    }
    SpectralField::from_coeffs(f.grid(), out_half)
}
