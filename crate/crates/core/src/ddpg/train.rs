//! The episodic training loop.
//!
//! Every episode draws a fresh sinusoid, a randomized initial pose, and new
//! noise streams, all derived from the master seed, then performs one
//! gradient update per environment step once the buffer can fill a batch.
//! The best actor by 50-episode moving-average return is kept as the
//! emitted policy.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::agent::{DdpgAgent, DdpgHyper, TrainError};
use super::observation::ObservationBuilder;
use crate::disturbance::{CurrentModel, DisturbanceState, WaveModel, WindModel};
use crate::dynamics::ThrustCommand;
use crate::episode::{randomized_initial_state, EnvConfig, EnvStepper, Mode, Termination};
use crate::fmath;
use crate::guidance::{training_sampler, TrainingRanges};
use crate::nn::{Mlp, OuNoise, ReplayBuffer, Transition};

const STREAM_OU: u64 = 4;
const STREAM_TRAJECTORY: u64 = 5;
const STREAM_BATCH: u64 = 7;

/// Secondary stop rule: halt when the moving-average return has moved less
/// than `rel_tol` (relatively) over the last `span` episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauConfig {
    pub window: usize,
    pub span: usize,
    pub rel_tol: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            window: 50,
            span: 200,
            rel_tol: 0.01,
        }
    }
}

/// Disturbance processes to run during training episodes (off by default;
/// robustness comes from measurement noise and randomized trajectories).
#[derive(Debug, Clone, Copy, Default)]
pub struct DisturbanceTemplate {
    pub wind: Option<WindModel>,
    pub wave: Option<WaveModel>,
    pub current: Option<CurrentModel>,
}

impl DisturbanceTemplate {
    pub fn instantiate(&self, seed: u64) -> DisturbanceState {
        DisturbanceState::new(self.wind, self.wave, self.current, seed)
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub hyper: DdpgHyper,
    pub env: EnvConfig,
    pub ranges: TrainingRanges,
    pub disturbance: DisturbanceTemplate,
    pub episodes: usize,
    pub plateau: PlateauConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hyper: DdpgHyper::default(),
            env: EnvConfig::default(),
            ranges: TrainingRanges::default(),
            disturbance: DisturbanceTemplate::default(),
            episodes: 3000,
            plateau: PlateauConfig::default(),
            seed: 0,
        }
    }
}

/// Learning-curve entry for one episode.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeStats {
    pub episode: usize,
    pub steps: usize,
    pub total_return: f64,
    pub mean_e_p: f64,
    pub termination: Termination,
    pub moving_average: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Best actor by moving-average return.
    pub policy: Mlp,
    /// Actor at the end of training.
    pub final_policy: Mlp,
    pub curve: Vec<EpisodeStats>,
    pub best_moving_average: f64,
    pub stopped_on_plateau: bool,
}

fn moving_average(returns: &[f64], window: usize) -> f64 {
    let n = returns.len().min(window);
    if n == 0 {
        return 0.0;
    }
    returns[returns.len() - n..].iter().sum::<f64>() / n as f64
}

/// Runs the full training loop; `on_episode` fires after every episode for
/// logging. A diverged update aborts and returns the best checkpoint so far
/// inside the error path would lose the curve, so divergence is surfaced in
/// the outcome of the last episode instead: the loop stops and returns what
/// it has.
pub fn train(
    config: &TrainConfig,
    mut on_episode: impl FnMut(&EpisodeStats),
) -> Result<TrainOutcome, TrainError> {
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut traj_rng = ChaCha8Rng::seed_from_u64(config.seed);
    traj_rng.set_stream(STREAM_TRAJECTORY);

    let mut agent = DdpgAgent::new(config.hyper, config.env.model.f_max, &mut master);
    let mut buffer = ReplayBuffer::new(config.hyper.buffer_capacity);
    let mut builder = ObservationBuilder::new(config.hyper.obs, config.env.model.f_max);

    let mut curve: Vec<EpisodeStats> = Vec::with_capacity(config.episodes);
    let mut returns: Vec<f64> = Vec::with_capacity(config.episodes);
    let mut ma_history: Vec<f64> = Vec::with_capacity(config.episodes);
    let mut best_ma = f64::NEG_INFINITY;
    let mut best_policy = agent.actor.clone();
    let mut stopped_on_plateau = false;

    for episode in 0..config.episodes {
        let ep_seed: u64 = master.random();
        let spec = training_sampler(&mut traj_rng, &config.ranges);
        let init = randomized_initial_state(&spec, &config.env.episode, ep_seed);
        let disturbance = config.disturbance.instantiate(ep_seed);
        let mut stepper = EnvStepper::new(
            &config.env,
            &spec,
            init,
            disturbance,
            Mode::Train,
            ep_seed,
        );

        let mut ou = OuNoise::new(
            4,
            config.hyper.ou_theta,
            config.hyper.ou_sigma,
            config.hyper.ou_dt,
        );
        let mut ou_rng = ChaCha8Rng::seed_from_u64(ep_seed);
        ou_rng.set_stream(STREAM_OU);
        let mut batch_rng = ChaCha8Rng::seed_from_u64(ep_seed);
        batch_rng.set_stream(STREAM_BATCH);

        builder.reset();
        let mut obs = builder.push(
            &stepper.measured(),
            &stepper.reference(),
            &ThrustCommand::zeros(),
        );

        let mut steps = 0;
        let mut total_return = 0.0;
        let mut e_p_acc = 0.0;
        let termination;
        loop {
            let cmd = agent.act(&obs, Some((&mut ou, &mut ou_rng)));
            match stepper.step(cmd) {
                Ok(outcome) => {
                    steps += 1;
                    total_return += outcome.record.reward.total;
                    e_p_acc += outcome.record.e_p;
                    let next_obs = builder.push(
                        &stepper.measured(),
                        &outcome.record.reference,
                        &cmd,
                    );
                    buffer.push(Transition {
                        obs: core::mem::take(&mut obs),
                        action: cmd.as_array(),
                        reward: outcome.record.reward.total,
                        next_obs: next_obs.clone(),
                        done: outcome.done,
                    });
                    let warmup = agent.hyper.warmup_steps.max(agent.hyper.batch_size);
                    if buffer.len() >= warmup {
                        agent.train_step(&buffer, &mut batch_rng)?;
                    }
                    obs = next_obs;
                    if outcome.done {
                        termination = outcome.termination.expect("done implies termination");
                        break;
                    }
                }
                Err(_) => {
                    termination = Termination::ModelExplosion;
                    break;
                }
            }
        }

        returns.push(total_return);
        let ma = moving_average(&returns, config.plateau.window);
        ma_history.push(ma);
        if ma > best_ma {
            best_ma = ma;
            best_policy = agent.actor.clone();
        }
        let stats = EpisodeStats {
            episode,
            steps,
            total_return,
            mean_e_p: if steps > 0 { e_p_acc / steps as f64 } else { 0.0 },
            termination,
            moving_average: ma,
        };
        on_episode(&stats);
        curve.push(stats);

        // Plateau rule engages only after the window has real history.
        let span = config.plateau.span;
        if curve.len() >= config.plateau.window + span {
            let then = ma_history[ma_history.len() - 1 - span];
            let scale = fmath::abs(then).max(1e-9);
            if fmath::abs(ma - then) / scale < config.plateau.rel_tol {
                stopped_on_plateau = true;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        policy: best_policy,
        final_policy: agent.actor,
        curve,
        best_moving_average: best_ma,
        stopped_on_plateau,
    })
}
