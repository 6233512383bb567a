//! Trace and learning-curve CSV formats, plus reference-row loading.
//!
//! One trace row per executed control step, logging the post-step state and
//! reference so every metric and reward component can be recomputed offline
//! (the action-change term uses the previous row's thruster columns, zero
//! for the first row).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use asv_core::ddpg::EpisodeStats;
use asv_core::episode::{EpisodeLog, StepRecord, Termination};
use asv_core::guidance::{ReferenceRow, SampledTrajectory};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const TRACE_COLUMNS: [&str; 28] = [
    "t", "x", "y", "psi", "u", "v", "w", "x_d", "y_d", "psi_d", "u_d", "v_d", "w_d", "psi_s",
    "f1", "f2", "f3", "f4", "e_p", "r_p", "r_psi", "r_w", "r_a", "r_e", "r_total", "tau_env_u",
    "tau_env_v", "tau_env_w",
];

/// A parsed trace row; field order mirrors [`TRACE_COLUMNS`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x_d: f64,
    pub y_d: f64,
    pub psi_d: f64,
    pub u_d: f64,
    pub v_d: f64,
    pub w_d: f64,
    pub psi_s: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub e_p: f64,
    pub r_p: f64,
    pub r_psi: f64,
    pub r_w: f64,
    pub r_a: f64,
    pub r_e: f64,
    pub r_total: f64,
    pub tau_env_u: f64,
    pub tau_env_v: f64,
    pub tau_env_w: f64,
}

impl From<&StepRecord> for TraceRow {
    fn from(s: &StepRecord) -> Self {
        Self {
            t: s.t,
            x: s.state.x,
            y: s.state.y,
            psi: s.state.psi,
            u: s.state.u,
            v: s.state.v,
            w: s.state.w,
            x_d: s.reference.x_d,
            y_d: s.reference.y_d,
            psi_d: s.reference.psi_d,
            u_d: s.reference.u_d,
            v_d: s.reference.v_d,
            w_d: s.reference.w_d,
            psi_s: s.psi_s,
            f1: s.cmd.f1,
            f2: s.cmd.f2,
            f3: s.cmd.f3,
            f4: s.cmd.f4,
            e_p: s.e_p,
            r_p: s.reward.r_p,
            r_psi: s.reward.r_psi,
            r_w: s.reward.r_w,
            r_a: s.reward.r_a,
            r_e: s.reward.r_e,
            r_total: s.reward.total,
            tau_env_u: s.tau_env[0],
            tau_env_v: s.tau_env[1],
            tau_env_w: s.tau_env[2],
        }
    }
}

pub fn write_trace(path: &Path, log: &EpisodeLog) -> Result<(), HarnessError> {
    let file = File::create(path)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for step in &log.steps {
        w.serialize(TraceRow::from(step))
            .map_err(|e| HarnessError::Runtime(format!("trace write failed: {e}")))?;
    }
    w.flush()
        .map_err(|e| HarnessError::Runtime(format!("trace flush failed: {e}")))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, HarnessError> {
    let file = File::open(path)
        .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    for row in reader.deserialize() {
        rows.push(row.map_err(|e| HarnessError::Runtime(format!("bad trace row: {e}")))?);
    }
    Ok(rows)
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::TimeLimit => "time_limit",
        Termination::OutOfBounds => "out_of_bounds",
        Termination::ModelExplosion => "model_explosion",
    }
}

/// Appends learning-curve rows as episodes finish.
pub struct CurveWriter {
    writer: csv::Writer<BufWriter<File>>,
}

impl CurveWriter {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = File::create(path)
            .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer
            .write_record([
                "episode",
                "steps",
                "return",
                "mean_e_p",
                "terminated_by",
                "moving_average",
            ])
            .map_err(|e| HarnessError::Runtime(format!("curve header failed: {e}")))?;
        Ok(Self { writer })
    }

    pub fn append(&mut self, s: &EpisodeStats) -> Result<(), HarnessError> {
        self.writer
            .write_record([
                s.episode.to_string(),
                s.steps.to_string(),
                s.total_return.to_string(),
                s.mean_e_p.to_string(),
                termination_name(s.termination).to_string(),
                s.moving_average.to_string(),
            ])
            .map_err(|e| HarnessError::Runtime(format!("curve write failed: {e}")))?;
        // Keep the file current so long runs can be inspected while live.
        self.writer
            .flush()
            .map_err(|e| HarnessError::Runtime(format!("curve flush failed: {e}")))
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.writer
            .flush()
            .map_err(|e| HarnessError::Runtime(format!("curve flush failed: {e}")))
    }
}

/// Loads a reference trajectory from rows of
/// `t, x_d, y_d, psi_d, u_d, v_d, w_d`.
pub fn load_reference_csv(path: &Path) -> Result<SampledTrajectory, HarnessError> {
    #[derive(Deserialize)]
    struct Row {
        t: f64,
        x_d: f64,
        y_d: f64,
        psi_d: f64,
        u_d: f64,
        v_d: f64,
        w_d: f64,
    }
    let file = File::open(path)
        .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for row in reader.deserialize() {
        let r: Row = row.map_err(|e| HarnessError::Config(format!("bad reference row: {e}")))?;
        if r.t <= prev_t {
            return Err(HarnessError::Config(
                "reference rows must have strictly increasing t".into(),
            ));
        }
        prev_t = r.t;
        rows.push(ReferenceRow {
            t: r.t,
            x_d: r.x_d,
            y_d: r.y_d,
            psi_d: r.psi_d,
            u_d: r.u_d,
            v_d: r.v_d,
            w_d: r.w_d,
        });
    }
    SampledTrajectory::new(rows)
        .map_err(|e| HarnessError::Config(format!("reference trajectory invalid: {e}")))
}

/// Open-loop action schedule: rows of `t, f1, f2, f3, f4`, zero-order-held
/// between timestamps.
#[derive(Debug, Clone)]
pub struct ActionSchedule {
    rows: Vec<(f64, [f64; 4])>,
}

impl ActionSchedule {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            f1: f64,
            f2: f64,
            f3: f64,
            f4: f64,
        }
        let file = File::open(path)
            .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
        let mut reader = csv::Reader::from_reader(BufReader::new(file));
        let mut rows = Vec::new();
        for row in reader.deserialize() {
            let r: Row = row.map_err(|e| HarnessError::Config(format!("bad action row: {e}")))?;
            rows.push((r.t, [r.f1, r.f2, r.f3, r.f4]));
        }
        if rows.is_empty() {
            return Err(HarnessError::Config("action schedule is empty".into()));
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
        Ok(Self { rows })
    }

    pub fn at(&self, t: f64) -> [f64; 4] {
        let idx = self.rows.partition_point(|(rt, _)| *rt <= t);
        if idx == 0 {
            self.rows[0].1
        } else {
            self.rows[idx - 1].1
        }
    }
}

/// Writes a file atomically via a temporary sibling and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)
            .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", tmp.display())))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| HarnessError::Runtime(format!("write failed: {e}")))?;
        f.sync_all().ok();
    }
    std::fs::rename(&tmp, path)
        .map_err(|e| HarnessError::Runtime(format!("rename to {} failed: {e}", path.display())))?;
    Ok(())
}
