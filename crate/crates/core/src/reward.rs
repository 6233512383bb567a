//! Five-term shaped tracking reward with a boundary penalty.
//!
//! The total is a weighted sum of position, heading, yaw-rate, action-
//! smoothness and energy terms; sailing further than `e_bound` from the
//! reference replaces the whole sum with a large fixed punishment. Heading
//! quality is judged against the LOS sight heading rather than the reference
//! heading.

use crate::dynamics::{ThrustCommand, VesselState};
use crate::fmath;
use crate::guidance::ReferenceSample;

/// How the action-variation term aggregates per-thruster changes.
///
/// `Absolute` sums |f_i(t) - f_i(t-1)| so oscillations cannot cancel;
/// `Signed` keeps the raw sum for fidelity studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionVariation {
    #[default]
    Absolute,
    Signed,
}

/// Reward constants; defaults are the values the controller was tuned with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub mu: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    /// Boundary distance [m] beyond which the punishment applies.
    pub e_bound: f64,
    pub boundary_penalty: f64,
    pub action_variation: ActionVariation,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            mu: 3.0,
            k1: 4.0,
            k2: 3.0,
            k3: 1.0,
            k4: 0.033,
            k5: 0.017,
            lambda1: 1.5,
            lambda2: 0.5,
            lambda3: 1.0,
            lambda4: 0.5,
            lambda5: 0.2,
            e_bound: 1.0,
            boundary_penalty: -25.0,
            action_variation: ActionVariation::Absolute,
        }
    }
}

impl RewardParams {
    /// Ablation variant: keeps only the position and heading terms.
    pub fn simple(mut self) -> Self {
        self.lambda3 = 0.0;
        self.lambda4 = 0.0;
        self.lambda5 = 0.0;
        self
    }
}

/// Component values, their weighted total, and the boundary flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub r_p: f64,
    pub r_psi: f64,
    pub r_w: f64,
    pub r_a: f64,
    pub r_e: f64,
    pub total: f64,
    pub out_of_bounds: bool,
}

/// Position term `2^(-k1 (mu |e_v| + 1) e_p) - 1`, in (-1, 0].
pub fn position_reward(e_p: f64, e_v: f64, params: &RewardParams) -> f64 {
    debug_assert!(e_p >= 0.0 && e_v >= 0.0);
    fmath::exp2(-params.k1 * (params.mu * e_v + 1.0) * e_p) - 1.0
}

/// Heading term against the sight heading, piecewise at a quarter turn:
/// `exp(-k2 |d|)` for `|d| <= pi/2`, `-exp(k2 (|d| - pi))` beyond.
pub fn heading_reward(psi: f64, psi_s: f64, params: &RewardParams) -> f64 {
    let d = fmath::abs(fmath::wrap_angle_diff(psi, psi_s));
    if d <= 0.5 * fmath::PI {
        fmath::exp(-params.k2 * d)
    } else {
        -fmath::exp(params.k2 * (d - fmath::PI))
    }
}

/// Yaw-rate term `exp(-k3 |w - w_d|) - 1`, in (-1, 0].
pub fn yaw_rate_reward(w: f64, w_d: f64, params: &RewardParams) -> f64 {
    fmath::exp(-params.k3 * fmath::abs(w - w_d)) - 1.0
}

/// Action-smoothness term `exp(-k4 delta_a) - 1` over the per-thruster
/// command change.
pub fn action_smoothness_reward(
    cmd: &ThrustCommand,
    prev_cmd: &ThrustCommand,
    params: &RewardParams,
) -> f64 {
    let deltas = [
        cmd.f1 - prev_cmd.f1,
        cmd.f2 - prev_cmd.f2,
        cmd.f3 - prev_cmd.f3,
        cmd.f4 - prev_cmd.f4,
    ];
    let delta_a: f64 = match params.action_variation {
        ActionVariation::Absolute => deltas.iter().map(|d| fmath::abs(*d)).sum(),
        ActionVariation::Signed => deltas.iter().sum(),
    };
    fmath::exp(-params.k4 * delta_a) - 1.0
}

/// Energy term `exp(-k5 sum f_i^2) - 1`, in (-1, 0].
pub fn energy_reward(cmd: &ThrustCommand, params: &RewardParams) -> f64 {
    let e_p: f64 = cmd.as_array().iter().map(|f| f * f).sum();
    fmath::exp(-params.k5 * e_p) - 1.0
}

/// Full reward at one step. Components are always reported; the total is the
/// weighted sum in bounds and the boundary penalty outside.
pub fn total_reward(
    state: &VesselState,
    reference: &ReferenceSample,
    psi_s: f64,
    cmd: &ThrustCommand,
    prev_cmd: &ThrustCommand,
    params: &RewardParams,
) -> RewardBreakdown {
    let e_p = fmath::hypot(state.x - reference.x_d, state.y - reference.y_d);
    let e_v = fmath::hypot(state.u - reference.u_d, state.v - reference.v_d);

    let r_p = position_reward(e_p, e_v, params);
    let r_psi = heading_reward(state.psi, psi_s, params);
    let r_w = yaw_rate_reward(state.w, reference.w_d, params);
    let r_a = action_smoothness_reward(cmd, prev_cmd, params);
    let r_e = energy_reward(cmd, params);

    let out_of_bounds = e_p > params.e_bound;
    let total = if out_of_bounds {
        params.boundary_penalty
    } else {
        params.lambda1 * r_p
            + params.lambda2 * r_psi
            + params.lambda3 * r_w
            + params.lambda4 * r_a
            + params.lambda5 * r_e
    };

    RewardBreakdown {
        r_p,
        r_psi,
        r_w,
        r_a,
        r_e,
        total,
        out_of_bounds,
    }
}
