//! End-to-end acceptance gate for the solver: operator identities, oracle
//! agreement, conservation, decay, early-termination behavior, and the
//! canned parameter sweeps. Each test prints one `[criterion N] PASS` line
//! with its measured figure and elapsed wall time (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rustfft::num_complex::Complex64;

use arteria_core::{
    integrate, oracle, run_experiment, run_sweep, ExperimentSpec,
    Grid, ModelParams, ModelRhs, MultiplierTable, RhsVariant, RunRecord, SolverConfig,
    SpectralField, StopReason, SweepAxis, SweepSpec, AMPLITUDE_SWEEP_VALUES,
    BETA_SWEEP_VALUES, NU_SWEEP_VALUES,
};

fn random_field(grid: &Arc<Grid>, band: usize, rng: &mut StdRng) -> SpectralField {
    let mut f = grid.zero_field();
    let band = band.min(grid.max_wavenumber() - 1);
    for k in 1..=band {
        let scale = 1.0 / (1.0 + (k * k) as f64);
        f.coeffs_mut()[k] =
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
    }
    f
}

/// Least-squares slope of `y` against `t`.
fn linear_fit_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let cov: f64 = ts.iter().zip(ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let var: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    cov / var
}

fn max_node_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let pa = a.to_physical();
    let pb = b.to_physical();
    pa.iter()
        .zip(&pb)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn criterion_1_operator_identities() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst_residual = 0.0f64;
    let mut worst_symbol = 0.0f64;
    for &(kappa, nu) in &[(1.0, 1.0), (1.0, 0.1), (3.0, 2.0)] {
        let params = ModelParams { nu, kappa, ..ModelParams::default() };
        for &n in &[64usize, 256] {
            let grid = Grid::new(n).unwrap();
            let table = MultiplierTable::build(&params, &grid, 3.0).unwrap();
            for _ in 0..100 {
                let f = random_field(&grid, n / 2 - 1, &mut rng);
                let r = table.resolvent_identity_residual(&f).unwrap();
                assert!(
                    r <= 1e-12,
                    "[criterion 1] FAIL: residual {r:.3e} at n={n} kappa={kappa} nu={nu}"
                );
                worst_residual = worst_residual.max(r);
            }
            for k in 0..=grid.max_wavenumber() {
                let kf = k as f64;
                let a = params.dispersion(kf);
                let expect = 4.0 * kf * kf / (a * a + 4.0 * kf * kf);
                let got = table.smoothing_symbol(k).norm_sqr();
                let d = (got - expect).abs();
                assert!(
                    d <= 1e-13,
                    "[criterion 1] FAIL: |m-1|^2 off by {d:.3e} at k={k}"
                );
                worst_symbol = worst_symbol.max(d);
            }
        }
    }
    println!(
        "[criterion 1] PASS — resolvent residual <= {worst_residual:.2e} over 600 fields, \
         symbol identity <= {worst_symbol:.2e} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_2_linear_propagator() {
    let start = Instant::now();
    let params = ModelParams::default();

    // A nearly-linear-amplitude mode must follow the analytic propagator.
    let grid = Grid::new(64).unwrap();
    let table = MultiplierTable::build(&params, &grid, 3.0).unwrap();
    let rhs = ModelRhs::new(&grid, table, RhsVariant::General, true).unwrap();
    let c0 = Complex64::new(1e-8, 0.0);
    let f0 = SpectralField::single_mode(&grid, 1, c0).unwrap();
    let mut config = SolverConfig::new(1.0);
    config.rtol = 1e-10;
    config.atol = 1e-30; // pure relative control at this amplitude
    let (final_state, stop) = integrate(&rhs, &f0, &config, |_, _| ());
    assert_eq!(stop, StopReason::ReachedTFinal, "[criterion 2] FAIL: {stop}");
    let expect = oracle::linear_rate(&params, 1.0).exp() * c0;
    let rel = (final_state.coeff(1) - expect).norm() / expect.norm();
    assert!(rel <= 1e-6, "[criterion 2] FAIL: propagator mismatch {rel:.3e}");

    // The two algebraic forms of the decay rate must agree everywhere.
    let mut worst_form = 0.0f64;
    for &kappa in &[0.1, 1.0, 3.0] {
        for &nu in &[0.1, 1.0, 3.0] {
            for &beta in &[-1.0, 0.0, 1.0, 2.0] {
                let p = ModelParams { nu, kappa, beta, ..ModelParams::default() };
                for k in 0..=64 {
                    let kf = k as f64;
                    let product = oracle::linear_rate(&p, kf).re;
                    let closed = oracle::linear_rate_real_closed(&p, kf);
                    let d = (product - closed).abs() / closed.abs().max(1.0);
                    assert!(
                        d <= 1e-13,
                        "[criterion 2] FAIL: rate forms differ {d:.3e} at k={k}"
                    );
                    worst_form = worst_form.max(d);
                }
            }
        }
    }
    println!(
        "[criterion 2] PASS — propagator relative error {rel:.2e}, rate forms agree to \
         {worst_form:.2e} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_3_dense_convolution() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(103);
    let grid = Grid::new(32).unwrap();
    let damped = ModelParams { nu: 0.7, eps: 1.3, kappa: 0.9, beta: -0.5 };
    let undamped = ModelParams { nu: 0.0, ..damped };
    let cases: Vec<(ModelParams, RhsVariant)> = vec![
        (damped, RhsVariant::General),
        (ModelParams::default(), RhsVariant::General),
        (damped, RhsVariant::Mollified { width: 1e-3 }),
        (undamped, RhsVariant::Bbm),
        (undamped, RhsVariant::General),
    ];
    let mut worst = 0.0f64;
    let mut evals = 0usize;
    for (params, variant) in &cases {
        let table = MultiplierTable::build(params, &grid, 3.0).unwrap();
        let rhs = ModelRhs::new(&grid, table, *variant, true).unwrap();
        for _ in 0..50 {
            let f = random_field(&grid, 5, &mut rng);
            let fast = rhs.eval(&f).unwrap();
            let dense = oracle::rhs_convolution(params, variant, &f).unwrap();
            let d = fast.max_coeff_diff(&dense).unwrap();
            assert!(
                d <= 1e-12,
                "[criterion 3] FAIL: {} variant differs by {d:.3e}",
                variant.name()
            );
            worst = worst.max(d);
            evals += 1;
        }
    }
    println!(
        "[criterion 3] PASS — fast path matches dense convolution to {worst:.2e} over \
         {evals} evaluations ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_4_mean_conservation() {
    let start = Instant::now();
    let spec = ExperimentSpec::baseline();
    let record = run_experiment(&spec).unwrap();
    assert_eq!(
        record.stop,
        StopReason::ReachedTFinal,
        "[criterion 4] FAIL: baseline stopped early: {}",
        record.stop
    );
    assert_eq!(
        record.rows.len(),
        401,
        "[criterion 4] FAIL: expected one row per sample boundary"
    );
    let drift = record
        .rows
        .iter()
        .fold(0.0f64, |m, row| m.max(row.mean.abs()));
    assert!(drift <= 1e-10, "[criterion 4] FAIL: mean drift {drift:.3e}");
    println!(
        "[criterion 4] PASS — mean drift <= {drift:.2e} across 401 samples, \
         run complete ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_5_undamped_decay() {
    let start = Instant::now();
    let mut details = Vec::new();
    for &beta in &[2.0, 1.0, 0.0] {
        let mut spec = ExperimentSpec::baseline();
        spec.label = format!("decay_beta_{beta}");
        spec.params = ModelParams { nu: 0.0, beta, ..ModelParams::default() };
        spec.amplitude = 0.01;
        spec.grid_n = 512;
        spec.solver = SolverConfig::new(20.0);
        spec.solver.rtol = 1e-10;
        spec.solver.atol = 1e-10;
        let record = run_experiment(&spec).unwrap();
        assert_eq!(
            record.stop,
            StopReason::ReachedTFinal,
            "[criterion 5] FAIL: beta={beta} stopped early"
        );

        // Fit the log of the slope-energy square root over the second half.
        let half: Vec<&_> = record.rows.iter().filter(|r| r.t >= 10.0).collect();
        let ts: Vec<f64> = half.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = half.iter().map(|r| 0.5 * r.e2.ln()).collect();
        let slope = linear_fit_slope(&ts, &ys);
        assert!(slope < 0.0, "[criterion 5] FAIL: beta={beta} slope {slope:.3e}");
        let theory = -(1.0 + beta / 2.0) / 5.0; // slowest mode at unit kappa, eps
        let ratio = slope / theory;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "[criterion 5] FAIL: beta={beta} fitted {slope:.4} vs theory {theory:.4}"
        );

        // The combined energy pair must not grow beyond stepping slack.
        let f0 = record.rows[0].e1 + record.rows[0].e2;
        let slack = 10.0 * spec.solver.rtol * f0;
        for pair in record.rows.windows(2) {
            let prev = pair[0].e1 + pair[0].e2;
            let next = pair[1].e1 + pair[1].e2;
            assert!(
                next <= prev + slack,
                "[criterion 5] FAIL: beta={beta} energy rose {prev:.6e} -> {next:.6e} at t={}",
                pair[1].t
            );
        }
        details.push(format!("beta={beta}: fit/theory {ratio:.3}"));
    }
    println!(
        "[criterion 5] PASS — decay rates bracket theory: {} ({:.2}s)",
        details.join(", "),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_6_local_formulation_equivalence() {
    let start = Instant::now();
    let mut spec = ExperimentSpec::baseline();
    spec.label = "nonlocal_form".into();
    spec.params = ModelParams { nu: 0.0, ..ModelParams::default() };
    spec.solver = SolverConfig::new(5.0);
    spec.solver.rtol = 1e-11;
    spec.solver.atol = 1e-11;
    let general = run_experiment(&spec).unwrap();

    spec.label = "local_form".into();
    spec.variant = RhsVariant::Bbm;
    let local = run_experiment(&spec).unwrap();

    assert_eq!(general.stop, StopReason::ReachedTFinal, "[criterion 6] FAIL");
    assert_eq!(local.stop, StopReason::ReachedTFinal, "[criterion 6] FAIL");
    let diff = max_node_diff(&general.final_state, &local.final_state);
    assert!(
        diff <= 1e-8,
        "[criterion 6] FAIL: formulations diverged by {diff:.3e}"
    );
    println!(
        "[criterion 6] PASS — nonlocal and local formulations agree to {diff:.2e} \
         at t=5 ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

fn assert_steepening_record(record: &RunRecord, label: &str) -> f64 {
    let t_stop = match record.stop {
        StopReason::StepUnderflow(t) | StopReason::NonFinite(t) => t,
        other => panic!("[criterion 7] FAIL: {label} ended with {other}"),
    };
    assert!(
        (0.3..=1.2).contains(&t_stop),
        "[criterion 7] FAIL: {label} stopped at t={t_stop:.4}"
    );

    // Over the last fifth of the samples the gradient proxy must fall
    // strictly and the accumulated slope integral must accelerate.
    let rows = &record.rows;
    let window = (rows.len() / 5).max(3);
    let tail = &rows[rows.len() - window..];
    for pair in tail.windows(2) {
        assert!(
            pair[1].inv_lip < pair[0].inv_lip,
            "[criterion 7] FAIL: {label} inverse slope rose at t={}",
            pair[1].t
        );
    }
    let rates: Vec<f64> = tail
        .windows(2)
        .map(|p| (p[1].cum_integral - p[0].cum_integral) / (p[1].t - p[0].t))
        .collect();
    for pair in rates.windows(2) {
        assert!(
            pair[1] >= pair[0],
            "[criterion 7] FAIL: {label} slope integral decelerated"
        );
    }
    assert!(
        rates.last().unwrap() > rates.first().unwrap(),
        "[criterion 7] FAIL: {label} slope integral never accelerated"
    );
    t_stop
}

#[test]
fn criterion_7_steepening_termination() {
    let start = Instant::now();
    let mut stops = Vec::new();
    for &n in &[1usize << 10, 1 << 12] {
        let mut spec = ExperimentSpec::baseline();
        spec.label = format!("steep_n_{n}");
        spec.amplitude = 5.0;
        spec.grid_n = n;
        let record = run_experiment(&spec).unwrap();
        let t_stop = assert_steepening_record(&record, &spec.label);
        stops.push(format!("n={n}: t_stop={t_stop:.4} ({})", record.stop));
    }
    println!(
        "[criterion 7] PASS — {} ({:.2}s)",
        stops.join("; "),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_8_regularization_consistency() {
    let start = Instant::now();
    let widths = [1e-2, 1e-3, 1e-4];
    let mut spec = ExperimentSpec::baseline();
    spec.label = "unregularized".into();
    spec.solver = SolverConfig::new(1.0);
    spec.solver.rtol = 1e-12;
    spec.solver.atol = 1e-12;
    let reference = run_experiment(&spec).unwrap();
    assert_eq!(reference.stop, StopReason::ReachedTFinal, "[criterion 8] FAIL");

    let mut gaps = Vec::new();
    for &width in &widths {
        spec.label = format!("regularized_{width}");
        spec.variant = RhsVariant::Mollified { width };
        let record = run_experiment(&spec).unwrap();
        assert_eq!(record.stop, StopReason::ReachedTFinal, "[criterion 8] FAIL");
        let mut diff = record.final_state.clone();
        diff.axpy(-1.0, &reference.final_state);
        gaps.push(diff.l2_norm());
    }
    for pair in gaps.windows(2) {
        assert!(
            pair[1] < pair[0],
            "[criterion 8] FAIL: gaps not monotone: {gaps:?}"
        );
    }
    println!(
        "[criterion 8] PASS — regularization gaps decrease monotonically: \
         {:.3e} -> {:.3e} -> {:.3e} ({:.2}s)",
        gaps[0],
        gaps[1],
        gaps[2],
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_9_parameter_sweeps() {
    let start = Instant::now();
    let base = ExperimentSpec::baseline();

    let nu_sweep = run_sweep(&SweepSpec {
        axis: SweepAxis::Nu,
        values: NU_SWEEP_VALUES.to_vec(),
        base: base.clone(),
    })
    .unwrap();
    for record in &nu_sweep {
        assert_eq!(
            record.stop,
            StopReason::ReachedTFinal,
            "[criterion 9] FAIL: {} stopped early ({})",
            record.spec.label,
            record.stop
        );
    }

    let amp_sweep = run_sweep(&SweepSpec {
        axis: SweepAxis::Amplitude,
        values: AMPLITUDE_SWEEP_VALUES.to_vec(),
        base: base.clone(),
    })
    .unwrap();
    let mut t_stops = Vec::new();
    for (record, &a) in amp_sweep.iter().zip(AMPLITUDE_SWEEP_VALUES.iter()) {
        let complete = record.stop == StopReason::ReachedTFinal;
        assert_eq!(
            complete,
            a < 5.0,
            "[criterion 9] FAIL: amplitude {a} ended with {}",
            record.stop
        );
        t_stops.push(record.stop.t_stop(record.spec.solver.t_final));
    }
    for pair in t_stops.windows(2) {
        assert!(
            pair[1] <= pair[0],
            "[criterion 9] FAIL: termination times not monotone: {t_stops:?}"
        );
    }

    let mut beta_base = base.clone();
    beta_base.params.nu = 0.0;
    let beta_sweep = run_sweep(&SweepSpec {
        axis: SweepAxis::Beta,
        values: BETA_SWEEP_VALUES.to_vec(),
        base: beta_base,
    })
    .unwrap();
    for record in &beta_sweep {
        assert_eq!(
            record.stop,
            StopReason::ReachedTFinal,
            "[criterion 9] FAIL: {} stopped early",
            record.spec.label
        );
    }

    let wall: f64 = nu_sweep
        .iter()
        .chain(&amp_sweep)
        .chain(&beta_sweep)
        .map(|r| r.wall_seconds)
        .sum();
    println!(
        "[criterion 9] PASS — 15 sweep runs: damping sweep complete, amplitude sweep \
         terminates early from A=5 with non-increasing t_stop, shape sweep complete \
         (cpu {wall:.1}s, wall {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}
