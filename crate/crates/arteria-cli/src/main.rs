//! Command-line front end for the spectral solver: single runs, parameter
//! families, the numerical self-test battery, and a plotting helper.
//!
//! Exit codes are the machine-readable channel: 0 for a run that reached
//! its final time, 3 for a run the solver had to stop early, 1 for
//! configuration or I/O problems, 2 for a failed self-test check.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use arteria_core::{
    run_experiment, run_sweep, selftest, CheckStatus, ExperimentSpec, StopReason, SweepAxis,
    SweepSpec, AMPLITUDE_SWEEP_VALUES, BETA_SWEEP_VALUES, NU_SWEEP_VALUES,
};
use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_on_off, SpecOverrides, VariantChoice};

#[derive(Parser)]
#[command(
    name = "arteria",
    version,
    about = "Spectral solver for a damped dispersive wave model on the circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its artifacts
    Run(RunArgs),
    /// Run a family of configurations varying one parameter
    Sweep(SweepArgs),
    /// Check the numerical core against its built-in identities
    Selftest(SelftestArgs),
    /// Write a gnuplot script that renders run artifacts
    PlotScript(PlotArgs),
}

/// Model, discretization, and solver settings shared by `run` and
/// `sweep`. Every flag is optional; omitted settings come from `--config`
/// and then from the built-in defaults.
#[derive(Args)]
struct SpecArgs {
    /// Damping strength (>= 0)
    #[arg(long)]
    nu: Option<f64>,
    /// Slow-time scale (> 0)
    #[arg(long)]
    eps: Option<f64>,
    /// Elasticity coefficient (> 0)
    #[arg(long)]
    kappa: Option<f64>,
    /// Velocity-profile shape parameter
    #[arg(long)]
    beta: Option<f64>,
    /// Height of the initial bump
    #[arg(long)]
    amp: Option<f64>,
    /// Grid size (even, >= 8)
    #[arg(long)]
    n: Option<usize>,
    /// Integration horizon (> 0)
    #[arg(long)]
    t_final: Option<f64>,
    /// Relative step-error tolerance
    #[arg(long)]
    rtol: Option<f64>,
    /// Absolute step-error tolerance
    #[arg(long)]
    atol: Option<f64>,
    /// Index of the Sobolev energy diagnostic
    #[arg(long)]
    s_index: Option<f64>,
    /// Guard quadratic products with the 2/3 rule
    #[arg(long, value_name = "on|off", value_parser = parse_on_off)]
    dealias: Option<bool>,
    /// Low-pass width; selects the regularized formulation
    #[arg(long, value_name = "WIDTH")]
    mollify: Option<f64>,
    /// Which formulation to integrate
    #[arg(long, value_enum)]
    variant: Option<VariantChoice>,
    /// Diagnostic sampling interval (default: t_final / 400)
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Step-attempt budget
    #[arg(long)]
    max_steps: Option<u64>,
    /// Smallest admissible step
    #[arg(long)]
    dt_min: Option<f64>,
    /// First step to try (default: chosen from the initial slope)
    #[arg(long)]
    dt_init: Option<f64>,
    /// Run label used in manifests
    #[arg(long)]
    label: Option<String>,
    /// Flat `key = value` file with `#` comments; flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl SpecArgs {
    fn overrides(&self) -> SpecOverrides {
        SpecOverrides {
            nu: self.nu,
            eps: self.eps,
            kappa: self.kappa,
            beta: self.beta,
            amp: self.amp,
            n: self.n,
            t_final: self.t_final,
            rtol: self.rtol,
            atol: self.atol,
            s_index: self.s_index,
            dealias: self.dealias,
            mollify: self.mollify,
            variant: self.variant,
            sample_dt: self.sample_dt,
            max_steps: self.max_steps,
            dt_min: self.dt_min,
            dt_init: self.dt_init,
            label: self.label.clone(),
        }
    }

    /// Flags over file over defaults; `adjust` edits the merged overrides
    /// before defaults are filled in.
    fn resolve_with(
        &self,
        adjust: impl FnOnce(&mut SpecOverrides),
    ) -> Result<ExperimentSpec, String> {
        let file = match &self.config {
            Some(path) => config::parse_file(path)?,
            None => SpecOverrides::default(),
        };
        let mut merged = self.overrides().merged_over(file);
        adjust(&mut merged);
        merged.into_spec()
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Directory receiving diagnostics, snapshots, and the manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisChoice {
    Nu,
    Amp,
    Beta,
}

impl From<AxisChoice> for SweepAxis {
    fn from(choice: AxisChoice) -> SweepAxis {
        match choice {
            AxisChoice::Nu => SweepAxis::Nu,
            AxisChoice::Amp => SweepAxis::Amplitude,
            AxisChoice::Beta => SweepAxis::Beta,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Which parameter the family varies
    #[arg(long, value_enum)]
    axis: AxisChoice,
    /// Comma-separated values (default: the built-in matrix for the axis)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Option<Vec<f64>>,
    #[command(flatten)]
    spec: SpecArgs,
    /// Directory receiving one subdirectory per value plus the family manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// Damping strength (>= 0)
    #[arg(long)]
    nu: Option<f64>,
    /// Slow-time scale (> 0)
    #[arg(long)]
    eps: Option<f64>,
    /// Elasticity coefficient (> 0)
    #[arg(long)]
    kappa: Option<f64>,
    /// Velocity-profile shape parameter
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory receiving `plot.gp`
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if informational { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Selftest(args) => cmd_selftest(args),
        Command::PlotScript(args) => cmd_plot_script(args),
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn stop_exit(stop: StopReason) -> ExitCode {
    if stop.is_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn describe_stop(stop: StopReason, t_final: f64) -> String {
    match stop {
        StopReason::ReachedTFinal => format!("reached t = {t_final}"),
        StopReason::StepUnderflow(t) => format!("step underflow at t = {t:.6}"),
        StopReason::NonFinite(t) => format!("lost finiteness at t = {t:.6}"),
        StopReason::StepBudget(t) => format!("step budget exhausted at t = {t:.6}"),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let spec = match args.spec.resolve_with(|_| {}) {
        Ok(spec) => spec,
        Err(message) => return fail(message),
    };
    let started = Utc::now();
    let record = match run_experiment(&spec) {
        Ok(record) => record,
        Err(err) => return fail(err),
    };
    if let Err(message) = output::write_run(&record, &args.out, started) {
        return fail(message);
    }
    eprintln!(
        "run `{}`: {} ({} samples, {:.2}s) -> {}",
        spec.label,
        describe_stop(record.stop, spec.solver.t_final),
        record.rows.len(),
        record.wall_seconds,
        args.out.display(),
    );
    stop_exit(record.stop)
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    if let Ok(setting) = std::env::var("ARTERIA_THREADS") {
        let threads: usize = match setting.trim().parse() {
            Ok(t) if t >= 1 => t,
            _ => return fail(format!("ARTERIA_THREADS: `{setting}` is not a thread count")),
        };
        // A later build_global for the same process-wide pool is a no-op;
        // each CLI invocation is its own process, so this one wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let axis = SweepAxis::from(args.axis);
    let base = match args.spec.resolve_with(|merged| {
        // The shape family is studied in the undamped regime unless the
        // caller explicitly sets a damping strength.
        if axis == SweepAxis::Beta && merged.nu.is_none() {
            merged.nu = Some(0.0);
        }
    }) {
        Ok(spec) => spec,
        Err(message) => return fail(message),
    };
    let values = args.values.unwrap_or_else(|| match axis {
        SweepAxis::Nu => NU_SWEEP_VALUES.to_vec(),
        SweepAxis::Amplitude => AMPLITUDE_SWEEP_VALUES.to_vec(),
        SweepAxis::Beta => BETA_SWEEP_VALUES.to_vec(),
    });
    if values.is_empty() {
        return fail("sweep needs at least one value");
    }
    let sweep = SweepSpec { axis, values: values.clone(), base: base.clone() };
    let started = Utc::now();
    let records = match run_sweep(&sweep) {
        Ok(records) => records,
        Err(err) => return fail(err),
    };
    let manifest =
        match output::write_sweep(&records, axis, &values, &base, &args.out, started) {
            Ok(manifest) => manifest,
            Err(message) => return fail(message),
        };
    for entry in &manifest.runs {
        eprintln!(
            "  {} = {:<8} {}",
            axis.name(),
            entry.value,
            describe_stop(entry.stop, entry.t_stop),
        );
    }
    let all_complete = records.iter().all(|r| r.stop.is_complete());
    eprintln!(
        "sweep over {} ({} runs) -> {}",
        axis.name(),
        records.len(),
        args.out.display(),
    );
    if all_complete {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn cmd_selftest(args: SelftestArgs) -> ExitCode {
    let defaults = ExperimentSpec::baseline().params;
    let params = arteria_core::ModelParams {
        nu: args.nu.unwrap_or(defaults.nu),
        eps: args.eps.unwrap_or(defaults.eps),
        kappa: args.kappa.unwrap_or(defaults.kappa),
        beta: args.beta.unwrap_or(defaults.beta),
    };
    let checks = match selftest::run(&params) {
        Ok(checks) => checks,
        Err(err) => return fail(err),
    };
    println!("{:<34} {:<8} detail", "check", "status");
    for check in &checks {
        let status = match check.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skipped",
        };
        println!("{:<34} {:<8} {}", check.name, status, check.detail);
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == CheckStatus::Fail)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: self-test failed: {}", failed.join(", "));
        ExitCode::from(2)
    }
}

fn cmd_plot_script(args: PlotArgs) -> ExitCode {
    if let Err(message) = output::write_plot_script(&args.out) {
        return fail(message);
    }
    eprintln!("wrote {}", args.out.join("plot.gp").display());
    ExitCode::SUCCESS
}
