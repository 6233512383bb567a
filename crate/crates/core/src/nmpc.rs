//! Receding-horizon tracking NMPC over the nominal vessel model.
//!
//! Single shooting: the decision vector is the thrust sequence over the
//! horizon, rolled through the same RK4 plant the simulator uses (with no
//! disturbance knowledge). A Gauss-Newton step on the stacked weighted
//! residuals with a backtracking, box-clamped line search minimizes
//!
//! ```text
//! sum_k ||stage error_k||^2_W + ||u_k||^2_R + ||u_k - u_{k-1}||^2_S
//! ```
//!
//! Each control period solves from the previous solution shifted by one
//! step and applies the first command.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::dynamics::{step_rk4, ModelParameters, ThrustCommand, VesselState};
use crate::episode::{ControlContext, Controller};
use crate::fmath;
use crate::guidance::{ReferencePath, ReferenceSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmpcConfig {
    /// Prediction horizon in control periods.
    pub horizon: usize,
    pub w_pos: f64,
    pub w_heading: f64,
    pub w_vel: f64,
    pub w_ctrl: f64,
    pub w_rate: f64,
    pub max_iters: usize,
    /// Projected-gradient norm below which the solve stops.
    pub grad_tol: f64,
}

impl Default for NmpcConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            w_pos: 10.0,
            w_heading: 1.0,
            w_vel: 0.5,
            w_ctrl: 0.05,
            w_rate: 0.1,
            max_iters: 15,
            grad_tol: 1e-6,
        }
    }
}

/// Diagnostics for one solve.
#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iters: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// Iteration cap hit before convergence.
    pub hit_iter_cap: bool,
    /// Linearization produced non-finite values; the previous command was
    /// held instead.
    pub aborted: bool,
    /// Cost after the initial point and after each accepted iteration.
    pub cost_history: Vec<f64>,
}

/// Rolls the nominal (disturbance-free) dynamics under a control sequence;
/// returns the `horizon + 1` states including the initial one.
pub fn predict(
    params: &ModelParameters,
    state: &VesselState,
    controls: &[ThrustCommand],
    dt: f64,
) -> Option<Vec<VesselState>> {
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(*state);
    let zero_env = nalgebra::Vector3::zeros();
    for cmd in controls {
        let next = step_rk4(params, states.last().unwrap(), cmd, &zero_env, dt).ok()?;
        states.push(next);
    }
    Some(states)
}

/// Residuals per horizon step: 6 stage + 4 control + 4 control-rate.
const RESIDUALS_PER_STEP: usize = 14;

struct Problem<'a> {
    params: &'a ModelParameters,
    config: &'a NmpcConfig,
    state: VesselState,
    refs: &'a [ReferenceSample],
    prev_cmd: [f64; 4],
    dt: f64,
}

impl Problem<'_> {
    fn n_vars(&self) -> usize {
        4 * self.config.horizon
    }

    fn n_residuals(&self) -> usize {
        RESIDUALS_PER_STEP * self.config.horizon
    }

    /// Stacked weighted residual vector; `None` on model explosion.
    fn residuals(&self, u: &[f64]) -> Option<DVector<f64>> {
        let np = self.config.horizon;
        let mut r = DVector::zeros(self.n_residuals());
        let sw_pos = fmath::sqrt(self.config.w_pos);
        let sw_head = fmath::sqrt(self.config.w_heading);
        let sw_vel = fmath::sqrt(self.config.w_vel);
        let sw_ctrl = fmath::sqrt(self.config.w_ctrl);
        let sw_rate = fmath::sqrt(self.config.w_rate);

        let mut state = self.state;
        let zero_env = nalgebra::Vector3::zeros();
        let mut prev = self.prev_cmd;
        for k in 0..np {
            let uk = [u[4 * k], u[4 * k + 1], u[4 * k + 2], u[4 * k + 3]];
            let cmd = ThrustCommand::from_array(uk);
            state = step_rk4(self.params, &state, &cmd, &zero_env, self.dt).ok()?;
            let reference = &self.refs[k];
            let base = RESIDUALS_PER_STEP * k;
            r[base] = sw_pos * (state.x - reference.x_d);
            r[base + 1] = sw_pos * (state.y - reference.y_d);
            r[base + 2] = sw_head * fmath::wrap_angle_diff(state.psi, reference.psi_d);
            r[base + 3] = sw_vel * (state.u - reference.u_d);
            r[base + 4] = sw_vel * (state.v - reference.v_d);
            r[base + 5] = sw_vel * (state.w - reference.w_d);
            for i in 0..4 {
                r[base + 6 + i] = sw_ctrl * uk[i];
                r[base + 10 + i] = sw_rate * (uk[i] - prev[i]);
            }
            prev = uk;
        }
        Some(r)
    }

    fn cost(&self, u: &[f64]) -> Option<f64> {
        self.residuals(u).map(|r| r.norm_squared())
    }

    /// Central-difference Jacobian of the residual vector.
    fn jacobian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        let h = 1e-5;
        let mut j = DMatrix::zeros(self.n_residuals(), self.n_vars());
        let mut probe = u.to_vec();
        for col in 0..self.n_vars() {
            let saved = probe[col];
            probe[col] = saved + h;
            let plus = self.residuals(&probe)?;
            probe[col] = saved - h;
            let minus = self.residuals(&probe)?;
            probe[col] = saved;
            let scale = 1.0 / (2.0 * h);
            for row in 0..self.n_residuals() {
                j[(row, col)] = (plus[row] - minus[row]) * scale;
            }
        }
        Some(j)
    }
}

fn clamp_controls(u: &mut [f64], f_max: f64) {
    for v in u {
        *v = fmath::clamp(*v, -f_max, f_max);
    }
}

/// Gradient norm ignoring components that push against an active bound.
fn projected_grad_norm(u: &[f64], grad: &DVector<f64>, f_max: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        let g = grad[i];
        let blocked = (u[i] >= f_max && g < 0.0) || (u[i] <= -f_max && g > 0.0);
        if !blocked {
            acc += g * g;
        }
    }
    fmath::sqrt(acc)
}

/// Solves the horizon problem from a warm-start sequence.
pub fn solve(
    config: &NmpcConfig,
    params: &ModelParameters,
    state: &VesselState,
    refs: &[ReferenceSample],
    prev_cmd: &ThrustCommand,
    warm_start: &[f64],
    dt: f64,
) -> (Vec<f64>, SolveStats) {
    assert_eq!(refs.len(), config.horizon, "need one reference per step");
    assert_eq!(warm_start.len(), 4 * config.horizon);
    let problem = Problem {
        params,
        config,
        state: *state,
        refs,
        prev_cmd: prev_cmd.as_array(),
        dt,
    };
    run_solver(problem, warm_start)
}

fn run_solver(problem: Problem<'_>, warm_start: &[f64]) -> (Vec<f64>, SolveStats) {
    let f_max = problem.params.f_max;
    let mut u = warm_start.to_vec();
    clamp_controls(&mut u, f_max);

    let mut stats = SolveStats {
        iters: 0,
        cost: f64::NAN,
        grad_norm: f64::NAN,
        converged: false,
        hit_iter_cap: false,
        aborted: false,
        cost_history: Vec::new(),
    };

    let mut cost = match problem.cost(&u) {
        Some(c) if c.is_finite() => c,
        _ => {
            stats.aborted = true;
            return (u, stats);
        }
    };
    stats.cost_history.push(cost);

    for _ in 0..problem.config.max_iters {
        let (residual, jacobian) = match (problem.residuals(&u), problem.jacobian(&u)) {
            (Some(r), Some(j)) if r.iter().all(|v| v.is_finite()) && j.iter().all(|v| v.is_finite()) => (r, j),
            _ => {
                stats.aborted = true;
                return (u, stats);
            }
        };
        let grad = 2.0 * jacobian.transpose() * &residual;
        let pg = projected_grad_norm(&u, &grad, f_max);
        stats.grad_norm = pg;
        if pg < problem.config.grad_tol {
            stats.converged = true;
            break;
        }

        // Gauss-Newton direction with a small ridge for safety.
        let mut jtj = jacobian.transpose() * &jacobian;
        for i in 0..jtj.nrows() {
            jtj[(i, i)] += 1e-10;
        }
        let rhs = -(jacobian.transpose() * &residual);
        let delta = match jtj.cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => {
                stats.aborted = true;
                return (u, stats);
            }
        };

        // Backtracking line search over the clamped trial point.
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..7 {
            let mut trial = u.clone();
            for i in 0..trial.len() {
                trial[i] += alpha * delta[i];
            }
            clamp_controls(&mut trial, f_max);
            if let Some(trial_cost) = problem.cost(&trial) {
                if trial_cost.is_finite() && trial_cost < cost {
                    u = trial;
                    cost = trial_cost;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Stationary under the bounds as far as the line search sees.
            stats.converged = true;
            break;
        }
        stats.iters += 1;
        stats.cost_history.push(cost);
    }

    if !stats.converged && stats.iters >= problem.config.max_iters {
        stats.hit_iter_cap = true;
    }
    stats.cost = cost;
    if stats.grad_norm.is_nan() {
        stats.grad_norm = 0.0;
    }
    (u, stats)
}

/// Receding-horizon controller holding the warm start between steps.
pub struct NmpcController {
    pub config: NmpcConfig,
    params: ModelParameters,
    dt: f64,
    warm: Vec<f64>,
    prev_cmd: ThrustCommand,
    /// Set when a solve aborted and the previous command was held.
    pub degraded: bool,
    /// Diagnostics of every solve this episode.
    pub solve_log: Vec<SolveStats>,
}

impl NmpcController {
    pub fn new(config: NmpcConfig, params: ModelParameters, dt: f64) -> Self {
        assert!(config.horizon >= 1);
        Self {
            config,
            params,
            dt,
            warm: vec![0.0; 4 * config.horizon],
            prev_cmd: ThrustCommand::zeros(),
            degraded: false,
            solve_log: Vec::new(),
        }
    }

    /// References at `t + dt, ..., t + horizon * dt`, holding the final
    /// trajectory point once the horizon runs past the end.
    fn reference_window(&self, path: &dyn ReferencePath, t: f64) -> Vec<ReferenceSample> {
        let duration = path.duration();
        (1..=self.config.horizon)
            .map(|k| {
                let tk = (t + k as f64 * self.dt).min(duration);
                path.sample(tk).expect("window clamped to duration")
            })
            .collect()
    }

    /// One receding-horizon step: warm-started solve, apply first control.
    pub fn control_step(&mut self, measured: &VesselState, path: &dyn ReferencePath, t: f64) -> ThrustCommand {
        let refs = self.reference_window(path, t);
        let problem = Problem {
            params: &self.params,
            config: &self.config,
            state: *measured,
            refs: &refs,
            prev_cmd: self.prev_cmd.as_array(),
            dt: self.dt,
        };
        let warm = self.warm.clone();
        let (u, stats) = run_solver(problem, &warm);
        let aborted = stats.aborted;
        self.solve_log.push(stats);
        if aborted {
            self.degraded = true;
            return self.prev_cmd;
        }
        self.degraded = false;

        // Shift the solution one period for the next warm start.
        let n = self.config.horizon;
        for k in 0..n - 1 {
            for i in 0..4 {
                self.warm[4 * k + i] = u[4 * (k + 1) + i];
            }
        }
        for i in 0..4 {
            self.warm[4 * (n - 1) + i] = u[4 * (n - 1) + i];
        }

        let cmd = ThrustCommand::new(u[0], u[1], u[2], u[3]).clamped(self.params.f_max);
        self.prev_cmd = cmd;
        cmd
    }
}

impl Controller for NmpcController {
    fn reset(&mut self) {
        self.warm.fill(0.0);
        self.prev_cmd = ThrustCommand::zeros();
        self.degraded = false;
        self.solve_log.clear();
    }

    fn command(&mut self, ctx: &ControlContext<'_>) -> ThrustCommand {
        self.control_step(&ctx.measured, ctx.path, ctx.t)
    }
}
