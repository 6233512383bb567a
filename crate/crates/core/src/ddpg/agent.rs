//! Actor-critic pair with target networks and the batched update step.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::observation::{ObsConfig, ObservationBuilder};
use crate::dynamics::ThrustCommand;
use crate::episode::{ControlContext, Controller};
use crate::linalg::Mat;
use crate::nn::{Activation, Adam, AdamParams, Mlp, OuNoise, ReplayBuffer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpgHyper {
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Environment steps collected before updates begin; never below the
    /// batch size.
    pub warmup_steps: usize,
    pub hidden_width: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    /// Discretization step of the exploration process. The classic unit
    /// step gives full-strength noise from the first control period.
    pub ou_dt: f64,
    pub obs: ObsConfig,
}

impl Default for DdpgHyper {
    fn default() -> Self {
        Self {
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            gamma: 0.99,
            tau: 0.005,
            batch_size: 128,
            buffer_capacity: 1_000_000,
            warmup_steps: 128,
            hidden_width: 300,
            ou_theta: 0.2,
            ou_sigma: 0.15,
            ou_dt: 1.0,
            obs: ObsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    /// Mean squared TD error of the critic over the batch.
    pub critic: f64,
    /// Negative mean Q of the re-evaluated policy actions.
    pub actor: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training diverged: critic loss {critic}, actor loss {actor}")]
    Diverged { critic: f64, actor: f64 },
}

/// Online and target networks plus their optimizers.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    pub hyper: DdpgHyper,
    pub f_max: f64,
}

impl DdpgAgent {
    pub fn new<R: Rng>(hyper: DdpgHyper, f_max: f64, rng: &mut R) -> Self {
        let obs_dim = hyper.obs.observation_len();
        let h = hyper.hidden_width;
        let actor = Mlp::new(&[obs_dim, h, h, 4], Activation::Relu, Activation::Tanh, rng);
        let critic = Mlp::new(
            &[obs_dim + 4, h, h, 1],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let actor_opt = Adam::new(&actor, AdamParams::with_lr(hyper.actor_lr));
        let critic_opt = Adam::new(&critic, AdamParams::with_lr(hyper.critic_lr));
        Self {
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            hyper,
            f_max,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    /// Maps an observation to a clamped thrust command. Exploration noise,
    /// when provided, is added in normalized units before the clamp.
    pub fn act<R: Rng>(
        &self,
        obs: &[f64],
        explore: Option<(&mut OuNoise, &mut R)>,
    ) -> ThrustCommand {
        let mut a = self.actor.forward(obs);
        if let Some((noise, rng)) = explore {
            for (v, n) in a.iter_mut().zip(noise.sample(rng)) {
                *v += n;
            }
        }
        ThrustCommand::new(
            a[0] * self.f_max,
            a[1] * self.f_max,
            a[2] * self.f_max,
            a[3] * self.f_max,
        )
        .clamped(self.f_max)
    }

    /// One gradient update of critic and actor from a uniform minibatch,
    /// followed by soft target updates.
    pub fn train_step<R: Rng>(
        &mut self,
        buffer: &ReplayBuffer,
        rng: &mut R,
    ) -> Result<Losses, TrainError> {
        let n = self.hyper.batch_size;
        let d = self.obs_dim();
        let idx = buffer.sample_indices(n, rng);

        let mut obs = Mat::zeros(n, d);
        let mut obs_next = Mat::zeros(n, d);
        let mut critic_in = Mat::zeros(n, d + 4);
        let mut rewards = vec![0.0; n];
        let mut not_done = vec![0.0; n];
        for (row, &i) in idx.iter().enumerate() {
            let tr = buffer.get(i);
            obs.set_row(row, &tr.obs);
            obs_next.set_row(row, &tr.next_obs);
            let ci = critic_in.row_mut(row);
            ci[..d].copy_from_slice(&tr.obs);
            for k in 0..4 {
                ci[d + k] = tr.action[k] / self.f_max;
            }
            rewards[row] = tr.reward;
            not_done[row] = if tr.done { 0.0 } else { 1.0 };
        }

        // Bootstrapped target y = r + gamma * (1 - done) * Q'(s', pi'(s')).
        let next_actions = self.target_actor.forward_batch(&obs_next);
        let mut target_in = Mat::zeros(n, d + 4);
        for row in 0..n {
            let ti = target_in.row_mut(row);
            ti[..d].copy_from_slice(obs_next.row(row));
            ti[d..].copy_from_slice(next_actions.output().row(row));
        }
        let q_next = self.target_critic.forward_batch(&target_in);
        let y: Vec<f64> = (0..n)
            .map(|row| {
                rewards[row] + self.hyper.gamma * not_done[row] * q_next.output().get(row, 0)
            })
            .collect();

        // Critic regression toward the targets.
        let critic_cache = self.critic.forward_batch(&critic_in);
        let mut critic_loss = 0.0;
        let mut d_q = Mat::zeros(n, 1);
        for row in 0..n {
            let err = critic_cache.output().get(row, 0) - y[row];
            critic_loss += err * err / n as f64;
            d_q.set(row, 0, 2.0 * err / n as f64);
        }
        let (critic_grads, _) = self.critic.backward_batch(&critic_cache, &d_q, true);
        self.critic_opt
            .step(&mut self.critic, &critic_grads.expect("param grads requested"));

        // Actor ascends Q(s, pi(s)) through the updated critic.
        let actor_cache = self.actor.forward_batch(&obs);
        let mut policy_in = Mat::zeros(n, d + 4);
        for row in 0..n {
            let pi = policy_in.row_mut(row);
            pi[..d].copy_from_slice(obs.row(row));
            pi[d..].copy_from_slice(actor_cache.output().row(row));
        }
        let q_cache = self.critic.forward_batch(&policy_in);
        let actor_loss =
            -(0..n).map(|row| q_cache.output().get(row, 0)).sum::<f64>() / n as f64;
        let d_neg = Mat::from_vec(n, 1, vec![-1.0 / n as f64; n]);
        let (_, d_critic_in) = self.critic.backward_batch(&q_cache, &d_neg, false);
        let mut d_actions = Mat::zeros(n, 4);
        for row in 0..n {
            d_actions.row_mut(row).copy_from_slice(&d_critic_in.row(row)[d..]);
        }
        let (actor_grads, _) = self.actor.backward_batch(&actor_cache, &d_actions, true);
        self.actor_opt
            .step(&mut self.actor, &actor_grads.expect("param grads requested"));

        self.target_critic
            .soft_update_from(&self.critic, self.hyper.tau);
        self.target_actor
            .soft_update_from(&self.actor, self.hyper.tau);

        if critic_loss.is_finite() && actor_loss.is_finite() {
            Ok(Losses {
                critic: critic_loss,
                actor: actor_loss,
            })
        } else {
            Err(TrainError::Diverged {
                critic: critic_loss,
                actor: actor_loss,
            })
        }
    }
}

/// Deterministic evaluation wrapper around a trained actor.
pub struct PolicyController {
    actor: Mlp,
    builder: ObservationBuilder,
    f_max: f64,
}

impl PolicyController {
    pub fn new(actor: Mlp, obs: ObsConfig, f_max: f64) -> Self {
        assert_eq!(
            actor.input_dim(),
            obs.observation_len(),
            "policy input does not match the observation layout"
        );
        Self {
            actor,
            builder: ObservationBuilder::new(obs, f_max),
            f_max,
        }
    }
}

impl Controller for PolicyController {
    fn reset(&mut self) {
        self.builder.reset();
    }

    fn command(&mut self, ctx: &ControlContext<'_>) -> ThrustCommand {
        let obs = self
            .builder
            .push(&ctx.measured, &ctx.reference, &ctx.prev_cmd);
        let a = self.actor.forward(&obs);
        ThrustCommand::new(
            a[0] * self.f_max,
            a[1] * self.f_max,
            a[2] * self.f_max,
            a[3] * self.f_max,
        )
        .clamped(self.f_max)
    }
}
