//! Closed-loop episode machinery shared by training, evaluation, and the
//! NMPC baseline.
//!
//! `EnvStepper` owns the plant state, the disturbance processes, and the
//! measurement-noise stream for one episode, and advances them together at
//! the control period. Controllers only see a `ControlContext`; the stepper
//! computes rewards from the true state and terminates on boundary violation
//! or the time limit.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::disturbance::DisturbanceState;
use crate::dynamics::{
    step_rk4, BodyWrench, DynamicsError, ModelParameters, ThrustCommand, VesselState,
};
use crate::fmath;
use crate::guidance::{sight_heading, ReferencePath, ReferenceSample};
use crate::reward::{total_reward, RewardBreakdown, RewardParams};

/// Noise-stream identifiers carved out of one episode seed.
const STREAM_MEASUREMENT: u64 = 3;
const STREAM_INIT: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Measurement noise on, callers may learn from the transitions.
    Train,
    /// Clean measurements, nothing stochastic on the vessel side.
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TimeLimit,
    OutOfBounds,
    /// Dynamics produced a non-finite state; treated as an episode failure.
    ModelExplosion,
}

/// Per-episode timing, measurement noise, and initial-condition ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    /// Control period [s].
    pub dt: f64,
    /// Episode length [s]; must be an integer multiple of `dt`.
    pub t_max: f64,
    /// Covariance scale of the measurement noise (`cov = noise_cov * I6`).
    pub noise_cov: f64,
    /// Radius of the uniform disc around the initial reference point [m].
    pub init_pos_radius: f64,
    /// Initial heading is tangent + uniform(-range, range]; `pi` means any.
    pub init_heading_range: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 30.0,
            noise_cov: 0.1,
            init_pos_radius: 0.3,
            init_heading_range: fmath::PI,
        }
    }
}

impl EpisodeConfig {
    pub fn steps(&self) -> usize {
        let steps = libm::round(self.t_max / self.dt);
        assert!(
            fmath::abs(self.t_max - steps * self.dt) < 1e-9,
            "t_max must be an integer multiple of dt"
        );
        steps as usize
    }
}

/// Everything fixed about the environment for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub model: ModelParameters,
    pub reward: RewardParams,
    pub episode: EpisodeConfig,
    /// LOS lookahead distance [m].
    pub lookahead: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            model: ModelParameters::default(),
            reward: RewardParams::default(),
            episode: EpisodeConfig::default(),
            lookahead: 0.9,
        }
    }
}

/// What a controller sees at one control instant.
pub struct ControlContext<'a> {
    pub t: f64,
    pub measured: VesselState,
    pub reference: ReferenceSample,
    pub path: &'a dyn ReferencePath,
    pub prev_cmd: ThrustCommand,
    pub dt: f64,
    pub t_max: f64,
}

/// A feedback controller driving the vessel at the control rate.
pub trait Controller {
    fn reset(&mut self);
    fn command(&mut self, ctx: &ControlContext<'_>) -> ThrustCommand;
}

/// Everything logged about one executed control step; `state` and
/// `reference` are taken after the step, so the reward is recomputable
/// from the row (plus the previous row's command).
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub state: VesselState,
    pub reference: ReferenceSample,
    pub psi_s: f64,
    pub cmd: ThrustCommand,
    pub reward: RewardBreakdown,
    pub tau_env: BodyWrench,
    pub e_p: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub record: StepRecord,
    pub done: bool,
    pub termination: Option<Termination>,
}

#[derive(Debug, Clone)]
pub struct EpisodeLog {
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
    pub total_return: f64,
    pub mean_e_p: f64,
}

impl EpisodeLog {
    fn from_steps(steps: Vec<StepRecord>, termination: Termination) -> Self {
        let total_return = steps.iter().map(|s| s.reward.total).sum();
        let mean_e_p = if steps.is_empty() {
            0.0
        } else {
            steps.iter().map(|s| s.e_p).sum::<f64>() / steps.len() as f64
        };
        Self {
            steps,
            termination,
            total_return,
            mean_e_p,
        }
    }
}

/// Owns one episode's plant state, disturbances, and noise streams.
pub struct EnvStepper<'a> {
    env: &'a EnvConfig,
    path: &'a dyn ReferencePath,
    state: VesselState,
    measured: VesselState,
    t: f64,
    step_idx: usize,
    steps_max: usize,
    prev_cmd: ThrustCommand,
    disturbance: DisturbanceState,
    meas_rng: ChaCha8Rng,
    mode: Mode,
    finished: bool,
}

impl<'a> EnvStepper<'a> {
    pub fn new(
        env: &'a EnvConfig,
        path: &'a dyn ReferencePath,
        init: VesselState,
        disturbance: DisturbanceState,
        mode: Mode,
        seed: u64,
    ) -> Self {
        assert!(
            path.duration() >= env.episode.t_max - 1e-9,
            "trajectory shorter than the episode"
        );
        let mut meas_rng = ChaCha8Rng::seed_from_u64(seed);
        meas_rng.set_stream(STREAM_MEASUREMENT);
        let steps_max = env.episode.steps();
        let mut stepper = Self {
            env,
            path,
            state: init,
            measured: init,
            t: 0.0,
            step_idx: 0,
            steps_max,
            prev_cmd: ThrustCommand::zeros(),
            disturbance,
            meas_rng,
            mode,
            finished: false,
        };
        stepper.measured = stepper.observe();
        stepper
    }

    fn observe(&mut self) -> VesselState {
        match self.mode {
            Mode::Eval => self.state,
            Mode::Train => {
                let std = fmath::sqrt(self.env.episode.noise_cov);
                let mut draw = || {
                    let g: f64 = self.meas_rng.sample(rand_distr::StandardNormal);
                    std * g
                };
                VesselState::new(
                    self.state.x + draw(),
                    self.state.y + draw(),
                    self.state.psi + draw(),
                    self.state.u + draw(),
                    self.state.v + draw(),
                    self.state.w + draw(),
                )
            }
        }
    }

    fn sample_path(&self, t: f64) -> ReferenceSample {
        // Accumulated dt rounding can overshoot the duration by a few ulp.
        let t = t.min(self.path.duration());
        self.path
            .sample(t)
            .expect("time inside the asserted duration")
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> VesselState {
        self.state
    }

    /// The state as the controller sees it (noisy in train mode); drawn once
    /// per control step.
    pub fn measured(&self) -> VesselState {
        self.measured
    }

    pub fn prev_cmd(&self) -> ThrustCommand {
        self.prev_cmd
    }

    pub fn reference(&self) -> ReferenceSample {
        self.sample_path(self.t)
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn context(&self) -> ControlContext<'a> {
        ControlContext {
            t: self.t,
            measured: self.measured,
            reference: self.reference(),
            path: self.path,
            prev_cmd: self.prev_cmd,
            dt: self.env.episode.dt,
            t_max: self.env.episode.t_max,
        }
    }

    /// Applies one command over a control period.
    pub fn step(&mut self, cmd: ThrustCommand) -> Result<StepOutcome, DynamicsError> {
        assert!(!self.finished, "episode already terminated");
        let dt = self.env.episode.dt;
        let cmd = cmd.clamped(self.env.model.f_max);
        let tau_env = self
            .disturbance
            .step(&self.env.model, &self.state, dt);
        let next = step_rk4(&self.env.model, &self.state, &cmd, &tau_env, dt)?;

        self.step_idx += 1;
        self.t = self.step_idx as f64 * dt;
        let reference = self.sample_path(self.t);
        let psi_s = sight_heading(self.path, self.t.min(self.path.duration()),
            (next.x, next.y), self.env.lookahead)
            .expect("time inside the asserted duration");
        let reward = total_reward(
            &next,
            &reference,
            psi_s,
            &cmd,
            &self.prev_cmd,
            &self.env.reward,
        );
        let e_p = fmath::hypot(next.x - reference.x_d, next.y - reference.y_d);

        let termination = if reward.out_of_bounds {
            Some(Termination::OutOfBounds)
        } else if self.step_idx >= self.steps_max {
            Some(Termination::TimeLimit)
        } else {
            None
        };
        self.finished = termination.is_some();

        self.state = next;
        self.prev_cmd = cmd;
        self.measured = self.observe();

        Ok(StepOutcome {
            record: StepRecord {
                t: self.t,
                state: next,
                reference,
                psi_s,
                cmd,
                reward,
                tau_env,
                e_p,
            },
            done: self.finished,
            termination,
        })
    }
}

/// Vessel placed exactly on the reference start, moving with it.
pub fn exact_initial_state(path: &dyn ReferencePath) -> VesselState {
    let r = path.sample(0.0).expect("trajectory starts at t = 0");
    VesselState::new(r.x_d, r.y_d, r.tangent, r.u_d, r.v_d, r.w_d)
}

/// Vessel placed uniformly in a disc around the reference start with a
/// randomized heading, at rest; the training initial condition.
pub fn randomized_initial_state(
    path: &dyn ReferencePath,
    cfg: &EpisodeConfig,
    seed: u64,
) -> VesselState {
    let r = path.sample(0.0).expect("trajectory starts at t = 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_INIT);
    let radius = cfg.init_pos_radius * fmath::sqrt(rng.random::<f64>());
    let angle = rng.random::<f64>() * fmath::TWO_PI;
    let heading_offset = if cfg.init_heading_range > 0.0 {
        rng.random_range(-cfg.init_heading_range..=cfg.init_heading_range)
    } else {
        0.0
    };
    VesselState::new(
        r.x_d + radius * fmath::cos(angle),
        r.y_d + radius * fmath::sin(angle),
        r.tangent + heading_offset,
        0.0,
        0.0,
        0.0,
    )
}

/// Runs a controller for one full episode and returns the log. A dynamics
/// blow-up ends the episode with `Termination::ModelExplosion` rather than
/// an error so partial traces stay available for diagnostics.
pub fn run_closed_loop(
    env: &EnvConfig,
    path: &dyn ReferencePath,
    controller: &mut dyn Controller,
    init: VesselState,
    disturbance: DisturbanceState,
    mode: Mode,
    seed: u64,
) -> EpisodeLog {
    controller.reset();
    let mut stepper = EnvStepper::new(env, path, init, disturbance, mode, seed);
    let mut steps = Vec::with_capacity(env.episode.steps());
    loop {
        let cmd = controller.command(&stepper.context());
        match stepper.step(cmd) {
            Ok(outcome) => {
                steps.push(outcome.record);
                if outcome.done {
                    let termination = outcome.termination.expect("done implies termination");
                    return EpisodeLog::from_steps(steps, termination);
                }
            }
            Err(DynamicsError::ModelExplosion) => {
                return EpisodeLog::from_steps(steps, Termination::ModelExplosion);
            }
        }
    }
}
