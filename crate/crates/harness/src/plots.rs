//! Emits self-contained plotting scripts next to the result CSVs.
//!
//! The scripts use only the Python standard library plus matplotlib, read
//! `trace_rep*.csv` relative to their own directory, and save PNGs beside
//! themselves, so a result directory can be shipped around and plotted
//! anywhere.

use std::path::Path;

use crate::trace::write_atomic;
use crate::HarnessError;

const PREAMBLE: &str = r#"#!/usr/bin/env python3
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load_traces():
    traces = []
    for path in sorted(glob.glob(os.path.join(HERE, "trace_rep*.csv"))):
        with open(path) as f:
            rows = list(csv.DictReader(f))
        cols = {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}
        traces.append((os.path.basename(path), cols))
    return traces
"#;

const TRAJECTORY_BODY: &str = r#"
traces = load_traces()
if not traces:
    raise SystemExit("no trace_rep*.csv files next to this script")
fig, ax = plt.subplots(figsize=(7, 5))
name0, cols0 = traces[0]
ax.plot(cols0["x_d"], cols0["y_d"], "k--", label="reference")
for name, cols in traces:
    ax.plot(cols["x"], cols["y"], label=name.replace(".csv", ""))
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.set_aspect("equal", adjustable="datalim")
ax.legend()
ax.set_title("trajectory overlay")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "trajectory.png"), dpi=150)
print("wrote trajectory.png")
"#;

const ERROR_BODY: &str = r#"
traces = load_traces()
if not traces:
    raise SystemExit("no trace_rep*.csv files next to this script")
fig, ax = plt.subplots(figsize=(7, 4))
for name, cols in traces:
    ax.plot(cols["t"], cols["e_p"], label=name.replace(".csv", ""))
ax.set_xlabel("t [s]")
ax.set_ylabel("position error [m]")
ax.legend()
ax.set_title("tracking error")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "error.png"), dpi=150)
print("wrote error.png")
"#;

const FORCES_BODY: &str = r#"
traces = load_traces()
if not traces:
    raise SystemExit("no trace_rep*.csv files next to this script")
name, cols = traces[0]
fig, axes = plt.subplots(4, 1, sharex=True, figsize=(7, 8))
for i, ax in enumerate(axes, start=1):
    ax.plot(cols["t"], cols[f"f{i}"])
    ax.set_ylabel(f"f{i} [N]")
axes[-1].set_xlabel("t [s]")
axes[0].set_title(f"thruster forces ({name})")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "forces.png"), dpi=150)
print("wrote forces.png")
"#;

/// Writes the three plot scripts if the directory holds at least one trace;
/// returns the script names written.
pub fn emit_plots(result_dir: &Path) -> Result<Vec<String>, HarnessError> {
    let has_traces = std::fs::read_dir(result_dir)
        .map_err(|e| HarnessError::Runtime(format!("cannot read {}: {e}", result_dir.display())))?
        .flatten()
        .any(|entry| {
            let name = entry.file_name();
            let name = name.to_string_lossy();
            name.starts_with("trace_rep") && name.ends_with(".csv")
        });
    if !has_traces {
        eprintln!(
            "warning: no trace_rep*.csv in {}, skipping plot scripts",
            result_dir.display()
        );
        return Ok(Vec::new());
    }

    let scripts = [
        ("plot_trajectory.py", TRAJECTORY_BODY),
        ("plot_error.py", ERROR_BODY),
        ("plot_forces.py", FORCES_BODY),
    ];
    let mut written = Vec::new();
    for (name, body) in scripts {
        let mut content = String::from(PREAMBLE);
        content.push_str(body);
        write_atomic(&result_dir.join(name), &content)?;
        written.push(name.to_string());
    }
    Ok(written)
}
