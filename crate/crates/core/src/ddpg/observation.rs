//! Observation construction: a stacked window of per-step records.
//!
//! Each record is 16 values, `[q, q_d, a_prev]`, and the observation
//! flattens the latest `H + 1` records (zero-padded at episode start). In
//! the default reference-relative encoding the pose is expressed as the
//! position error rotated into the reference-tangent frame plus the wrapped
//! heading error, which makes the policy translation- and rotation-
//! invariant; the absolute encoding feeds raw world coordinates instead.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::dynamics::{ThrustCommand, VesselState};
use crate::fmath;
use crate::guidance::ReferenceSample;

/// Values per step record: 6 state + 6 reference + 4 previous action.
pub const RECORD_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsConfig {
    /// Number of past records kept in addition to the current one.
    pub history: usize,
    /// Reference-relative encoding (default) versus absolute coordinates.
    pub relative: bool,
}

impl Default for ObsConfig {
    fn default() -> Self {
        Self {
            history: 4,
            relative: true,
        }
    }
}

impl ObsConfig {
    pub fn observation_len(&self) -> usize {
        RECORD_WIDTH * (self.history + 1)
    }
}

/// Maintains the rolling window for one episode.
#[derive(Debug, Clone)]
pub struct ObservationBuilder {
    cfg: ObsConfig,
    f_max: f64,
    window: VecDeque<[f64; RECORD_WIDTH]>,
}

impl ObservationBuilder {
    pub fn new(cfg: ObsConfig, f_max: f64) -> Self {
        assert!(f_max > 0.0);
        let mut builder = Self {
            cfg,
            f_max,
            window: VecDeque::with_capacity(cfg.history + 1),
        };
        builder.reset();
        builder
    }

    pub fn reset(&mut self) {
        self.window.clear();
        for _ in 0..=self.cfg.history {
            self.window.push_back([0.0; RECORD_WIDTH]);
        }
    }

    pub fn observation_len(&self) -> usize {
        self.cfg.observation_len()
    }

    fn record(
        &self,
        measured: &VesselState,
        reference: &ReferenceSample,
        prev_cmd: &ThrustCommand,
    ) -> [f64; RECORD_WIDTH] {
        let mut r = [0.0; RECORD_WIDTH];
        if self.cfg.relative {
            let ex = measured.x - reference.x_d;
            let ey = measured.y - reference.y_d;
            let (s, c) = (fmath::sin(reference.tangent), fmath::cos(reference.tangent));
            // Rotate the world-frame error into the tangent frame.
            r[0] = c * ex + s * ey;
            r[1] = -s * ex + c * ey;
            r[2] = fmath::wrap_angle_diff(measured.psi, reference.psi_d);
            r[3] = measured.u;
            r[4] = measured.v;
            r[5] = measured.w;
            // Reference pose is the frame origin by construction.
            r[9] = reference.u_d;
            r[10] = reference.v_d;
            r[11] = reference.w_d;
        } else {
            r[0] = measured.x;
            r[1] = measured.y;
            r[2] = measured.psi;
            r[3] = measured.u;
            r[4] = measured.v;
            r[5] = measured.w;
            r[6] = reference.x_d;
            r[7] = reference.y_d;
            r[8] = reference.psi_d;
            r[9] = reference.u_d;
            r[10] = reference.v_d;
            r[11] = reference.w_d;
        }
        let a = prev_cmd.as_array();
        for i in 0..4 {
            r[12 + i] = a[i] / self.f_max;
        }
        r
    }

    /// Appends the newest record, drops the oldest, and returns the
    /// flattened window.
    pub fn push(
        &mut self,
        measured: &VesselState,
        reference: &ReferenceSample,
        prev_cmd: &ThrustCommand,
    ) -> Vec<f64> {
        self.window.pop_front();
        self.window.push_back(self.record(measured, reference, prev_cmd));
        let mut out = Vec::with_capacity(self.observation_len());
        for rec in &self.window {
            out.extend_from_slice(rec);
        }
        out
    }
}
