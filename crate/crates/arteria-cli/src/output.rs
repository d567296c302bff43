//! Persistence: diagnostic CSV, snapshot CSV, JSON manifests, and the
//! gnuplot helper script. All floating-point text uses 17 significant
//! digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use arteria_core::{ExperimentSpec, Grid, RunRecord, StopReason, SweepAxis};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DIAGNOSTICS_HEADER: &str = "t,mean,l2,hs_energy,lip,inv_lip,cum_integral,e1,e2,d1,d2";

/// Everything needed to interpret one run directory later, echoing the
/// fully resolved configuration so no default stays hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub label: String,
    pub spec: ExperimentSpec,
    pub started: String,
    pub finished: String,
    pub stop: StopReason,
    pub wall_seconds: f64,
    pub output_files: Vec<String>,
}

/// Index over a family of run directories produced by one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ExperimentSpec,
    pub started: String,
    pub finished: String,
    pub runs: Vec<SweepEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    pub label: String,
    pub dir: String,
    pub stop: StopReason,
    pub t_stop: f64,
}

fn artifact_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write `{}`: {e}", path.display()))
}

/// Write one run's artifacts into `dir` and return the manifest that was
/// stored there as `manifest.json`.
pub fn write_run(
    record: &RunRecord,
    dir: &Path,
    started: DateTime<Utc>,
) -> Result<RunManifest, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
    let mut output_files = Vec::new();

    let mut csv = String::with_capacity(64 + 200 * record.rows.len());
    csv.push_str(DIAGNOSTICS_HEADER);
    csv.push('\n');
    for r in &record.rows {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.mean, r.l2, r.hs_energy, r.lip, r.inv_lip, r.cum_integral, r.e1, r.e2, r.d1, r.d2,
        );
    }
    write_file(&dir.join("diagnostics.csv"), &csv)?;
    output_files.push("diagnostics.csv".to_string());

    let grid = Grid::new(record.spec.grid_n).map_err(|e| e.to_string())?;
    let nodes = grid.nodes();
    for (index, snapshot) in record.snapshots.iter().enumerate() {
        let name = format!("snapshot_{index}.csv");
        let mut body = String::with_capacity(16 + 50 * nodes.len());
        let _ = writeln!(body, "# t = {:.16e}", snapshot.t);
        body.push_str("x,f\n");
        for (x, v) in nodes.iter().zip(&snapshot.values) {
            let _ = writeln!(body, "{x:.16e},{v:.16e}");
        }
        write_file(&dir.join(&name), &body)?;
        output_files.push(name);
    }

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: artifact_version(),
        label: record.spec.label.clone(),
        spec: record.spec.clone(),
        started: stamp(started),
        finished: stamp(Utc::now()),
        stop: record.stop,
        wall_seconds: record.wall_seconds,
        output_files,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format!("cannot serialize manifest: {e}"))?;
    write_file(&dir.join("manifest.json"), &json)?;
    Ok(manifest)
}

/// Write each sweep record into `dir/<axis>_<value>/` plus a family-level
/// `sweep_manifest.json` indexing them.
pub fn write_sweep(
    records: &[RunRecord],
    axis: SweepAxis,
    values: &[f64],
    base: &ExperimentSpec,
    dir: &Path,
    started: DateTime<Utc>,
) -> Result<SweepManifest, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
    let mut runs = Vec::with_capacity(records.len());
    for (value, record) in values.iter().zip(records) {
        let sub = format!("{}_{}", axis.name(), value);
        write_run(record, &dir.join(&sub), started)?;
        runs.push(SweepEntry {
            value: *value,
            label: record.spec.label.clone(),
            dir: sub,
            stop: record.stop,
            t_stop: record.stop.t_stop(record.spec.solver.t_final),
        });
    }
    let manifest = SweepManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: artifact_version(),
        axis,
        values: values.to_vec(),
        base: base.clone(),
        started: stamp(started),
        finished: stamp(Utc::now()),
        runs,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format!("cannot serialize sweep manifest: {e}"))?;
    write_file(&dir.join("sweep_manifest.json"), &json)?;
    Ok(manifest)
}

/// Emit `plot.gp` into `dir`; running `gnuplot plot.gp` inside a run
/// directory renders the diagnostic curves and the snapshot gallery.
pub fn write_plot_script(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
    let script = concat!(
        "# Renders diagnostics.csv and snapshot_*.csv from a run directory.\n",
        "# Usage: run `gnuplot plot.gp` inside the output directory.\n",
        "set datafile separator ','\n",
        "set terminal pngcairo size 1400,900\n",
        "set key noenhanced\n",
        "\n",
        "set output 'diagnostics.png'\n",
        "set multiplot layout 2,2\n",
        "set xlabel 't'\n",
        "set logscale y\n",
        "plot 'diagnostics.csv' using 1:3 with lines lw 2 title 'L2 norm', \\\n",
        "     '' using 1:4 with lines lw 2 title 'Sobolev energy'\n",
        "plot 'diagnostics.csv' using 1:8 with lines lw 2 title 'E1', \\\n",
        "     '' using 1:9 with lines lw 2 title 'E2'\n",
        "unset logscale y\n",
        "plot 'diagnostics.csv' using 1:5 with lines lw 2 title 'max slope', \\\n",
        "     '' using 1:6 with lines lw 2 title 'inverse max slope'\n",
        "plot 'diagnostics.csv' using 1:7 with lines lw 2 title 'integrated slope'\n",
        "unset multiplot\n",
        "\n",
        "set output 'snapshots.png'\n",
        "set xlabel 'x'\n",
        "set ylabel 'f'\n",
        "plot for [file in system('ls snapshot_*.csv 2>/dev/null')] \\\n",
        "     file using 1:2 with lines title file\n",
    );
    write_file(&dir.join("plot.gp"), script)
}
