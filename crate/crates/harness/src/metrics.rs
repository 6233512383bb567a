//! Tracking metrics computed from trace rows.
//!
//! RMSE is over the Euclidean position error, the heading error is the mean
//! absolute wrapped difference to the reference heading, and the mean power
//! proxy is `sqrt(sum_i (|f1| + |f2| + |f3| + |f4|) / N)` with the
//! proportionality constant fixed at one.

use asv_core::fmath;
use serde::{Deserialize, Serialize};

use crate::trace::TraceRow;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub rmse_e_p: f64,
    pub mean_heading_error: f64,
    pub e_ave: f64,
    pub steps: usize,
}

/// Metrics over one trace; fails on an empty trace.
pub fn compute_metrics(rows: &[TraceRow]) -> Result<TraceMetrics, HarnessError> {
    compute_metrics_after(rows, 0.0)
}

/// Metrics ignoring every row with `t <= skip_s` (transient removal).
pub fn compute_metrics_after(rows: &[TraceRow], skip_s: f64) -> Result<TraceMetrics, HarnessError> {
    let kept: Vec<&TraceRow> = rows.iter().filter(|r| r.t > skip_s).collect();
    if kept.is_empty() {
        return Err(HarnessError::Runtime(
            "cannot compute metrics over an empty trace".into(),
        ));
    }
    let n = kept.len() as f64;
    let mut sq_err = 0.0;
    let mut heading = 0.0;
    let mut effort = 0.0;
    for r in &kept {
        let e = fmath::hypot(r.x - r.x_d, r.y - r.y_d);
        sq_err += e * e;
        heading += fmath::abs(fmath::wrap_angle_diff(r.psi, r.psi_d));
        effort += r.f1.abs() + r.f2.abs() + r.f3.abs() + r.f4.abs();
    }
    Ok(TraceMetrics {
        rmse_e_p: fmath::sqrt(sq_err / n),
        mean_heading_error: heading / n,
        e_ave: fmath::sqrt(effort / n),
        steps: kept.len(),
    })
}

/// Per-repetition metrics plus completion status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepReport {
    pub rep: usize,
    pub seed: u64,
    pub completed: bool,
    pub terminated_by: String,
    pub metrics: TraceMetrics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub reps: usize,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub heading_mean: f64,
    pub e_ave_mean: f64,
    pub e_ave_std: f64,
}

/// Full experiment report; failed repetitions are listed but excluded from
/// the aggregate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub controller: String,
    pub per_rep: Vec<RepReport>,
    pub failed_reps: usize,
    pub warning: Option<String>,
    pub aggregate: Option<Aggregate>,
}

impl MetricsReport {
    pub fn new(controller: &str, per_rep: Vec<RepReport>) -> Self {
        let completed: Vec<&RepReport> = per_rep.iter().filter(|r| r.completed).collect();
        let failed_reps = per_rep.len() - completed.len();
        let warning = (failed_reps > 0).then(|| {
            format!("{failed_reps} repetition(s) failed and are excluded from the aggregate")
        });
        let aggregate = (!completed.is_empty()).then(|| {
            let n = completed.len() as f64;
            let mean = |f: &dyn Fn(&RepReport) -> f64| {
                completed.iter().map(|r| f(r)).sum::<f64>() / n
            };
            let std = |f: &dyn Fn(&RepReport) -> f64, m: f64| {
                if completed.len() < 2 {
                    0.0
                } else {
                    fmath::sqrt(
                        completed.iter().map(|r| (f(r) - m) * (f(r) - m)).sum::<f64>() / (n - 1.0),
                    )
                }
            };
            let rmse = |r: &RepReport| r.metrics.rmse_e_p;
            let eave = |r: &RepReport| r.metrics.e_ave;
            let head = |r: &RepReport| r.metrics.mean_heading_error;
            let rmse_mean = mean(&rmse);
            let e_ave_mean = mean(&eave);
            Aggregate {
                reps: completed.len(),
                rmse_mean,
                rmse_std: std(&rmse, rmse_mean),
                heading_mean: mean(&head),
                e_ave_mean,
                e_ave_std: std(&eave, e_ave_mean),
            }
        });
        Self {
            controller: controller.into(),
            per_rep,
            failed_reps,
            warning,
            aggregate,
        }
    }
}
