//! End-to-end runs: localized-bump initial data, diagnostic sampling on a
//! uniform time lattice, evenly spaced solution snapshots, and parameter
//! sweeps over damping, amplitude, or profile shape.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::integrator::{integrate, SolverConfig, StopReason};
use crate::multipliers::MultiplierTable;
use crate::params::ModelParams;
use crate::rhs::{ModelRhs, RhsVariant};

/// Damping sweep of the reference protocol: varies `nu` at amplitude 0.1.
pub const NU_SWEEP_VALUES: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 1.5, 2.0, 3.0];
/// Amplitude sweep at unit damping; the three largest values are expected
/// to terminate early.
pub const AMPLITUDE_SWEEP_VALUES: [f64; 5] = [0.5, 1.0, 5.0, 10.0, 20.0];
/// Profile-shape sweep in the damping-free regime at amplitude 0.1.
pub const BETA_SWEEP_VALUES: [f64; 3] = [2.0, 0.0, -1.0];

/// Snapshots stored per run, evenly spaced over the horizon.
pub const DEFAULT_SNAPSHOT_COUNT: usize = 8;

/// Complete description of one run; everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub label: String,
    pub params: ModelParams,
    /// Height of the initial bump before mean removal.
    pub amplitude: f64,
    pub grid_n: usize,
    pub solver: SolverConfig,
    pub variant: RhsVariant,
    /// Whether quadratic products are guarded by the 2/3 rule.
    pub dealias: bool,
    /// Index of the Sobolev energy diagnostic.
    pub sobolev_index: f64,
}

impl ExperimentSpec {
    /// Reference setup: unit parameters, amplitude 0.1, 1024 points,
    /// horizon 10 with default tolerances.
    pub fn baseline() -> Self {
        ExperimentSpec {
            label: "baseline".into(),
            params: ModelParams::default(),
            amplitude: 0.1,
            grid_n: 1 << 10,
            solver: SolverConfig::new(10.0),
            variant: RhsVariant::General,
            dealias: true,
            sobolev_index: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.solver.validate()?;
        if !self.amplitude.is_finite() {
            return Err(Error::Parameter {
                name: "amp",
                value: self.amplitude,
                requirement: "initial amplitude must be finite",
            });
        }
        if self.grid_n < 8 || !self.grid_n.is_multiple_of(2) {
            return Err(Error::GridSize(self.grid_n));
        }
        if !self.sobolev_index.is_finite() || self.sobolev_index < 0.0 {
            return Err(Error::Parameter {
                name: "s_index",
                value: self.sobolev_index,
                requirement: "Sobolev index must be finite and >= 0",
            });
        }
        match self.variant {
            RhsVariant::Bbm if !self.params.is_local_regime() => Err(Error::VariantMismatch(
                "the local low-pass formulation requires nu = 0".into(),
            )),
            RhsVariant::Mollified { width } if !width.is_finite() || width < 0.0 => {
                Err(Error::Parameter {
                    name: "mollify",
                    value: width,
                    requirement: "regularization width must be finite and >= 0",
                })
            }
            _ => Ok(()),
        }
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Nu,
    Amplitude,
    Beta,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Nu => "nu",
            SweepAxis::Amplitude => "amp",
            SweepAxis::Beta => "beta",
        }
    }

    /// Copy of `base` with this axis set to `value` and a labeled suffix.
    pub fn instantiate(&self, base: &ExperimentSpec, value: f64) -> ExperimentSpec {
        let mut spec = base.clone();
        match self {
            SweepAxis::Nu => spec.params.nu = value,
            SweepAxis::Amplitude => spec.amplitude = value,
            SweepAxis::Beta => spec.params.beta = value,
        }
        spec.label = format!("{}_{}_{}", base.label, self.name(), value);
        spec
    }
}

/// A sweep: one base spec plus the list of values for the varied axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ExperimentSpec,
}

/// Stored solution profile at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub spec: ExperimentSpec,
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<Snapshot>,
    pub stop: StopReason,
    pub final_state: SpectralField,
    pub wall_seconds: f64,
}

/// Localized initial bump `A sech^2(x - pi)` placed in the evolved band:
/// the discrete mean is removed exactly (the conserved zero mode starts at
/// zero) and the fold bin is cleared, since the evolution holds it constant
/// and any residue there would pollute the higher-derivative diagnostics.
pub fn build_initial_data(grid: &Arc<Grid>, amplitude: f64) -> SpectralField {
    let pi = std::f64::consts::PI;
    let mut f = grid.sample(|x| {
        let c = (x - pi).cosh();
        amplitude / (c * c)
    });
    let zero = rustfft::num_complex::Complex64::new(0.0, 0.0);
    f.coeffs_mut()[0] = zero;
    let fold = grid.max_wavenumber();
    f.coeffs_mut()[fold] = zero;
    f
}

/// Chooses, for each multiple of `sample_dt`, the accepted state closest to
/// it; one-step memory suffices because the stepper caps its step at
/// `sample_dt`. Also collects the evenly spaced snapshots.
struct SampleCollector<'a> {
    table: &'a MultiplierTable,
    sample_dt: f64,
    t_final: f64,
    eps: f64,
    next_boundary: usize,
    prev: Option<(f64, SpectralField)>,
    rows: Vec<DiagnosticsRow>,
    snapshot_targets: Vec<f64>,
    next_snapshot: usize,
    snapshots: Vec<Snapshot>,
    failure: Option<Error>,
}

impl<'a> SampleCollector<'a> {
    fn new(table: &'a MultiplierTable, solver: &SolverConfig) -> Self {
        let t_final = solver.t_final;
        let count = DEFAULT_SNAPSHOT_COUNT;
        let snapshot_targets = (0..count)
            .map(|i| i as f64 * t_final / (count - 1) as f64)
            .collect();
        SampleCollector {
            table,
            sample_dt: solver.effective_sample_dt(),
            t_final,
            eps: 1e-9 * solver.effective_sample_dt(),
            next_boundary: 0,
            prev: None,
            rows: Vec::new(),
            snapshot_targets,
            next_snapshot: 0,
            snapshots: Vec::new(),
            failure: None,
        }
    }

    fn emit_row(&mut self, t: f64, f: &SpectralField) {
        if self.failure.is_some() {
            return;
        }
        match DiagnosticsRow::compute(t, f, self.table, self.rows.last()) {
            Ok(row) => self.rows.push(row),
            Err(e) => self.failure = Some(e),
        }
    }

    fn observe(&mut self, t: f64, f: &SpectralField) {
        while self.next_snapshot < self.snapshot_targets.len()
            && t + self.eps >= self.snapshot_targets[self.next_snapshot]
        {
            self.snapshots.push(Snapshot { t, values: f.to_physical() });
            self.next_snapshot += 1;
        }

        while (self.next_boundary as f64) * self.sample_dt <= self.t_final + self.eps {
            let boundary = self.next_boundary as f64 * self.sample_dt;
            if t + self.eps < boundary {
                break;
            }
            let use_prev = match &self.prev {
                Some((tp, _)) => {
                    (tp - boundary).abs() < (t - boundary).abs()
                        && self.rows.last().is_none_or(|r| *tp > r.t)
                }
                None => false,
            };
            if use_prev {
                let (tp, fp) = self.prev.take().unwrap();
                self.emit_row(tp, &fp);
            } else {
                self.emit_row(t, f);
            }
            self.next_boundary += 1;
        }
        self.prev = Some((t, f.clone()));
    }

    fn finish(mut self, t_stop: f64, final_state: &SpectralField) -> (Vec<DiagnosticsRow>, Vec<Snapshot>) {
        if self.rows.last().is_none_or(|r| r.t + self.eps < t_stop) {
            self.emit_row(t_stop, final_state);
        }
        if self
            .snapshots
            .last()
            .is_none_or(|s| s.t + self.eps < t_stop)
        {
            self.snapshots.push(Snapshot { t: t_stop, values: final_state.to_physical() });
        }
        (self.rows, self.snapshots)
    }
}

/// Runs one experiment to completion or early termination.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunRecord> {
    spec.validate()?;
    let started = Instant::now();
    let grid = Grid::new(spec.grid_n)?;
    let table = MultiplierTable::build(&spec.params, &grid, spec.sobolev_index)?;
    let rhs = ModelRhs::new(&grid, table.clone(), spec.variant, spec.dealias)?;
    let f0 = build_initial_data(&grid, spec.amplitude);

    let mut collector = SampleCollector::new(&table, &spec.solver);
    let (final_state, stop) = integrate(&rhs, &f0, &spec.solver, |t, f| collector.observe(t, f));
    if let Some(e) = collector.failure.take() {
        return Err(e);
    }
    let (rows, snapshots) = collector.finish(stop.t_stop(spec.solver.t_final), &final_state);

    Ok(RunRecord {
        spec: spec.clone(),
        rows,
        snapshots,
        stop,
        final_state,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs every value of a sweep, in parallel over the configured thread
/// pool. Results come back in the order of `sweep.values`, and each record
/// is identical to what a standalone [`run_experiment`] would produce.
pub fn run_sweep(sweep: &SweepSpec) -> Result<Vec<RunRecord>> {
    let specs: Vec<ExperimentSpec> = sweep
        .values
        .iter()
        .map(|&v| sweep.axis.instantiate(&sweep.base, v))
        .collect();
    for spec in &specs {
        spec.validate()?;
    }
    specs.par_iter().map(run_experiment).collect()
}
