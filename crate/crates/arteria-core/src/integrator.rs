//! Adaptive embedded Runge-Kutta 5(4) time stepper (Dormand-Prince
//! coefficients, FSAL) with a PI step-size controller, plus a fixed-step
//! variant for convergence studies.
//!
//! Failure is data, not an exception: overflowing products, a collapsing
//! step size, or an exhausted step budget all end the run with a
//! [`StopReason`] carrying the last trustworthy time, and the caller gets
//! the last accepted state back.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SpectralField;

/// Anything the stepper can integrate.
pub trait Rhs {
    fn eval(&self, f: &SpectralField) -> Result<SpectralField>;

    /// Largest angular frequency in the diagonal linearization, if the
    /// problem knows one. The stepper keeps `h * frequency` inside the
    /// scheme's stability region; without it, modes whose amplitude sits
    /// below the error tolerance can ride just outside the region and
    /// accumulate spurious energy too slowly for the controller to see.
    fn stability_frequency(&self) -> Option<f64> {
        None
    }
}

/// Solver controls. `dt_min` and `sample_dt` fall back to
/// `1e-12 * t_final` and `t_final / 400` when unset; the step size is
/// capped at `sample_dt` so diagnostic sampling never skips a boundary
/// (and additionally by the problem's [`Rhs::stability_frequency`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub t_final: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: Option<f64>,
    pub dt_min: Option<f64>,
    pub sample_dt: Option<f64>,
    pub max_steps: u64,
}

impl SolverConfig {
    pub fn new(t_final: f64) -> Self {
        SolverConfig {
            t_final,
            rtol: 1e-8,
            atol: 1e-8,
            dt_init: None,
            dt_min: None,
            sample_dt: None,
            max_steps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if !self.t_final.is_finite() || self.t_final <= 0.0 {
            return Err(Error::Parameter {
                name: "t_final",
                value: self.t_final,
                requirement: "integration horizon must be finite and > 0",
            });
        }
        if !self.rtol.is_finite() || self.rtol <= 0.0 {
            return Err(Error::Parameter {
                name: "rtol",
                value: self.rtol,
                requirement: "relative tolerance must be finite and > 0",
            });
        }
        if !self.atol.is_finite() || self.atol <= 0.0 {
            return Err(Error::Parameter {
                name: "atol",
                value: self.atol,
                requirement: "absolute tolerance must be finite and > 0",
            });
        }
        for (name, v) in [
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("sample_dt", self.sample_dt),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::Parameter {
                        name,
                        value: v,
                        requirement: "when given, must be finite and > 0",
                    });
                }
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Parameter {
                name: "max_steps",
                value: 0.0,
                requirement: "step budget must be positive",
            });
        }
        Ok(())
    }

    pub fn effective_dt_min(&self) -> f64 {
        self.dt_min.unwrap_or(1e-12 * self.t_final)
    }

    pub fn effective_sample_dt(&self) -> f64 {
        self.sample_dt.unwrap_or(self.t_final / 400.0)
    }
}

/// How a run ended. Early terminations carry the time of the last accepted
/// state, which is always `<= t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t_stop", rename_all = "snake_case")]
pub enum StopReason {
    /// Integrated through the full horizon.
    ReachedTFinal,
    /// The controller demanded a step below `dt_min` twice in a row.
    StepUnderflow(f64),
    /// A stage or state overflowed and shrinking the step did not help.
    NonFinite(f64),
    /// The attempt budget ran out.
    StepBudget(f64),
}

impl StopReason {
    pub fn is_complete(&self) -> bool {
        matches!(self, StopReason::ReachedTFinal)
    }

    /// Final time of the run this reason describes.
    pub fn t_stop(&self, t_final: f64) -> f64 {
        match self {
            StopReason::ReachedTFinal => t_final,
            StopReason::StepUnderflow(t) | StopReason::NonFinite(t) | StopReason::StepBudget(t) => {
                *t
            }
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::ReachedTFinal => write!(f, "reached_t_final"),
            StopReason::StepUnderflow(t) => write!(f, "step_underflow at t = {t}"),
            StopReason::NonFinite(t) => write!(f, "non_finite at t = {t}"),
            StopReason::StepBudget(t) => write!(f, "step_budget at t = {t}"),
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants: safety factor, growth clamp [0.2, 10], and the
// integral-feedback exponent pair.
const SAFETY: f64 = 0.9;
const SHRINK_LIMIT: f64 = 5.0; // h may shrink to h/5 per decision
const GROWTH_LIMIT: f64 = 0.1; // h may grow to 10 h per decision
const PI_BETA: f64 = 0.04;
const ERR_EXPONENT: f64 = 0.2 - PI_BETA * 0.75;
/// Admissible `h * frequency` for a problem that reports its fastest
/// linear frequency. The pair's amplification factor on the imaginary
/// axis crosses 1 just above `h * frequency = 1.0` (measured directly on
/// a pure rotation), so 0.9 keeps every advertised oscillation inside
/// the non-amplifying region. Without this cap, modes too small for the
/// error estimate to see can sit outside the stability region and grow
/// until the controller notices them, polluting high-derivative
/// diagnostics at roughly the tolerance level.
const STABILITY_MARGIN: f64 = 0.9;

struct Attempt {
    solution: SpectralField,
    last_stage: SpectralField,
    error: f64,
}

fn try_step<R: Rhs + ?Sized>(
    rhs: &R,
    y: &SpectralField,
    k1: &SpectralField,
    h: f64,
    rtol: f64,
    atol: f64,
) -> Option<Attempt> {
    let stage = |terms: &[(f64, &SpectralField)]| SpectralField::linear_combination(y, terms);

    let k2 = rhs.eval(&stage(&[(h * A21, k1)])).ok()?;
    let k3 = rhs.eval(&stage(&[(h * A31, k1), (h * A32, &k2)])).ok()?;
    let k4 = rhs.eval(&stage(&[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)])).ok()?;
    let k5 = rhs
        .eval(&stage(&[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]))
        .ok()?;
    let k6 = rhs
        .eval(&stage(&[
            (h * A61, k1),
            (h * A62, &k2),
            (h * A63, &k3),
            (h * A64, &k4),
            (h * A65, &k5),
        ]))
        .ok()?;
    let solution = stage(&[
        (h * B1, k1),
        (h * B3, &k3),
        (h * B4, &k4),
        (h * B5, &k5),
        (h * B6, &k6),
    ]);
    let k7 = rhs.eval(&solution).ok()?;

    let mut err_sq = 0.0;
    let modes = solution.coeffs().len();
    for i in 0..modes {
        let e = h
            * (E1 * k1.coeffs()[i]
                + E3 * k3.coeffs()[i]
                + E4 * k4.coeffs()[i]
                + E5 * k5.coeffs()[i]
                + E6 * k6.coeffs()[i]
                + E7 * k7.coeffs()[i]);
        let y0 = y.coeffs()[i];
        let y1 = solution.coeffs()[i];
        let scale_re = atol + rtol * y0.re.abs().max(y1.re.abs());
        let scale_im = atol + rtol * y0.im.abs().max(y1.im.abs());
        let r = e.re / scale_re;
        let q = e.im / scale_im;
        err_sq += r * r + q * q;
    }
    let error = (err_sq / (2 * modes) as f64).sqrt();
    if !error.is_finite() {
        return None;
    }
    Some(Attempt { solution, last_stage: k7, error })
}

/// Conservative first step: small enough that the state moves by about one
/// percent of its tolerance scale, never exceeding `t_final`. Returns the
/// estimate and a flag that is set when the right-hand side could not even
/// be evaluated at the initial state (the minimal step is returned then).
pub fn estimate_initial_step<R: Rhs + ?Sized>(
    rhs: &R,
    f0: &SpectralField,
    config: &SolverConfig,
) -> (f64, bool) {
    let r = match rhs.eval(f0) {
        Ok(r) => r,
        Err(_) => return (config.effective_dt_min(), true),
    };
    (first_step_from_slope(f0, &r, config), false)
}

fn first_step_from_slope(f0: &SpectralField, slope: &SpectralField, config: &SolverConfig) -> f64 {
    let mut rate_sq = 0.0;
    let modes = f0.coeffs().len();
    for i in 0..modes {
        let y = f0.coeffs()[i];
        let d = slope.coeffs()[i];
        let scale_re = config.atol + config.rtol * y.re.abs();
        let scale_im = config.atol + config.rtol * y.im.abs();
        let r = d.re / scale_re;
        let q = d.im / scale_im;
        rate_sq += r * r + q * q;
    }
    let rate = (rate_sq / (2 * modes) as f64).sqrt();
    let h = if rate <= 1e-14 || !rate.is_finite() {
        config.t_final
    } else {
        (0.01 / rate).min(config.t_final)
    };
    h.max(config.effective_dt_min())
}

/// Integrates from `t = 0` to `config.t_final`, invoking `observer` at
/// `t = 0` and after every accepted step. Returns the last accepted state
/// and how the run ended.
pub fn integrate<R: Rhs + ?Sized>(
    rhs: &R,
    f0: &SpectralField,
    config: &SolverConfig,
    mut observer: impl FnMut(f64, &SpectralField),
) -> (SpectralField, StopReason) {
    debug_assert!(config.validate().is_ok());
    let t_final = config.t_final;
    let dt_min = config.effective_dt_min();
    let mut cap = config.effective_sample_dt();
    if let Some(w) = rhs.stability_frequency() {
        if w > 0.0 && w.is_finite() {
            cap = cap.min(STABILITY_MARGIN / w);
        }
    }

    let mut y = f0.clone();
    let mut t = 0.0f64;
    observer(t, &y);

    let mut k1 = match rhs.eval(&y) {
        Ok(r) => r,
        Err(_) => return (y, StopReason::NonFinite(0.0)),
    };
    let mut h = config
        .dt_init
        .unwrap_or_else(|| first_step_from_slope(&y, &k1, config))
        .min(cap)
        .min(t_final)
        .max(dt_min);
    let mut facold = 1e-4f64;
    let mut underflow_strikes = 0u32;
    let mut attempts = 0u64;

    loop {
        if attempts >= config.max_steps {
            return (y, StopReason::StepBudget(t));
        }
        attempts += 1;

        let remaining = t_final - t;
        let hitting_end = h >= remaining;
        let h_eff = if hitting_end { remaining } else { h };

        match try_step(rhs, &y, &k1, h_eff, config.rtol, config.atol) {
            None => {
                // Overflow inside the stages: shrink hard, give up once the
                // floor cannot absorb it.
                if h_eff <= dt_min * (1.0 + 1e-9) {
                    return (y, StopReason::NonFinite(t));
                }
                h = (h_eff / SHRINK_LIMIT).max(dt_min);
            }
            Some(attempt) if attempt.error <= 1.0 => {
                t = if hitting_end { t_final } else { t + h_eff };
                y = attempt.solution;
                k1 = attempt.last_stage;
                observer(t, &y);
                if t >= t_final {
                    return (y, StopReason::ReachedTFinal);
                }
                let fac11 = attempt.error.powf(ERR_EXPONENT);
                let fac = (fac11 / facold.powf(PI_BETA) / SAFETY)
                    .clamp(GROWTH_LIMIT, SHRINK_LIMIT);
                facold = attempt.error.max(1e-4);
                let hnew = (h_eff / fac).min(cap);
                if hnew < dt_min {
                    underflow_strikes += 1;
                    if underflow_strikes >= 2 {
                        return (y, StopReason::StepUnderflow(t));
                    }
                    h = dt_min;
                } else {
                    underflow_strikes = 0;
                    h = hnew;
                }
            }
            Some(attempt) => {
                let fac11 = attempt.error.powf(ERR_EXPONENT);
                let hnew = h_eff / (fac11 / SAFETY).min(SHRINK_LIMIT);
                if hnew < dt_min {
                    underflow_strikes += 1;
                    if underflow_strikes >= 2 {
                        return (y, StopReason::StepUnderflow(t));
                    }
                    h = dt_min;
                } else {
                    underflow_strikes = 0;
                    h = hnew;
                }
            }
        }
    }
}

/// Fixed-step variant of the same tableau, for order measurements. Errors
/// if any stage stops being finite.
pub fn integrate_fixed<R: Rhs + ?Sized>(
    rhs: &R,
    f0: &SpectralField,
    t_final: f64,
    steps: u64,
) -> Result<SpectralField> {
    use crate::error::Error;
    let h = t_final / steps as f64;
    let mut y = f0.clone();
    let mut k1 = rhs.eval(&y)?;
    for _ in 0..steps {
        let attempt = try_step(rhs, &y, &k1, h, 1.0, 1.0).ok_or(Error::NonFinite)?;
        y = attempt.solution;
        k1 = attempt.last_stage;
    }
    Ok(y)
}
