//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figures. The long full-reproduction run is `#[ignore]`d by
//! default; see the README for how to run it.

use std::path::Path;
use std::time::Instant;

use asv_core::ddpg::{
    train, DdpgAgent, DdpgHyper, ObsConfig, PolicyController, TrainConfig,
};
use asv_core::disturbance::{CurrentModel, WaveModel};
use asv_core::dynamics::{
    coriolis, rotation_to_inertial, step_rk4, ModelParameters, ThrustCommand, VesselState,
};
use asv_core::episode::{
    exact_initial_state, run_closed_loop, EnvConfig, EpisodeConfig, Mode, Termination,
};
use asv_core::fmath;
use asv_core::guidance::{ReferenceSample, TrainingRanges, TrajectorySpec};
use asv_core::linalg::Mat;
use asv_core::nmpc::NmpcController;
use asv_core::nn::{Activation, Mlp, OuNoise, ReplayBuffer, Transition};
use asv_core::reward::{heading_reward, position_reward, total_reward, RewardParams};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(name: &str, detail: String) {
    println!("[PASS] {name}: {detail}");
}

// --- Criterion: dynamics properties -------------------------------------

#[test]
fn dynamics_properties() {
    let start = Instant::now();
    let p = ModelParameters::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // Coriolis skew-symmetry, exactly, over random velocities.
    for _ in 0..10_000 {
        let vel = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let c = coriolis(&p, &vel);
        let s = c + c.transpose();
        assert!(s.iter().all(|e| *e == 0.0), "skew violated at {vel:?}");
    }

    // Rotation orthonormality to 1e-12.
    for i in 0..10_000 {
        let psi = -10.0 + 0.002 * i as f64;
        let t = rotation_to_inertial(psi);
        let id = t * t.transpose();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((id[(r, c)] - expect).abs() < 1e-12);
            }
        }
        assert!((t.determinant() - 1.0).abs() < 1e-12);
    }

    // Measured RK4 order on a smooth forced trajectory via Richardson
    // comparison against a fine-step reference.
    let cmd = ThrustCommand::new(1.0, 0.6, 0.3, -0.2);
    let tau_env = Vector3::new(0.05, -0.03, 0.01);
    let init = VesselState::new(0.0, 0.0, 0.2, 0.1, 0.0, 0.05);
    let integrate = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let mut s = init;
        for _ in 0..steps {
            s = step_rk4(&p, &s, &cmd, &tau_env, dt).unwrap();
        }
        s.to_vector()
    };
    let reference = integrate(1000);
    let err_coarse = (integrate(10) - reference).norm();
    let err_fine = (integrate(20) - reference).norm();
    let order = (err_coarse / err_fine).log2();
    assert!(
        (3.8..=4.2).contains(&order),
        "measured RK4 order {order} outside [3.8, 4.2]"
    );

    // Unforced kinetic-energy proxy is non-increasing.
    let ke = |s: &VesselState| 0.5 * (p.m11 * s.u * s.u + p.m22 * s.v * s.v + p.m33 * s.w * s.w);
    let mut state = VesselState::new(0.0, 0.0, 0.5, 0.9, -0.5, 0.7);
    let mut prev = ke(&state);
    for _ in 0..1000 {
        state = step_rk4(&p, &state, &ThrustCommand::zeros(), &Vector3::zeros(), 0.1).unwrap();
        let now = ke(&state);
        assert!(now <= prev + 1e-12, "energy rose: {prev} -> {now}");
        prev = now;
    }

    assert!(start.elapsed().as_secs() < 10, "criterion must finish in 10 s");
    pass(
        "dynamics-properties",
        format!("skew exact, orthonormal to 1e-12, RK4 order {order:.3}, energy monotone ({:.1} s)",
            start.elapsed().as_secs_f64()),
    );
}

// --- Criterion: reward unit suite ----------------------------------------

#[test]
fn reward_unit_suite() {
    let start = Instant::now();
    let params = RewardParams::default();

    assert_eq!(position_reward(1.0, 0.0, &params), 0.0625 - 1.0);
    assert_eq!(heading_reward(0.3, 0.3, &params), 1.0);
    assert_eq!(heading_reward(fmath::PI, 0.0, &params), -1.0);

    let reference = ReferenceSample {
        x_d: 0.0,
        y_d: 0.0,
        psi_d: 0.0,
        u_d: 0.3,
        v_d: 0.0,
        w_d: 0.0,
        tangent: 0.0,
    };
    let far = VesselState::new(1.01, 0.0, 0.0, 0.3, 0.0, 0.0);
    let b = total_reward(&far, &reference, 0.0, &ThrustCommand::zeros(), &ThrustCommand::zeros(), &params);
    assert!(b.out_of_bounds);
    assert_eq!(b.total, -25.0);

    // Ranges and invariances over a million random scenes. The open lower
    // bounds saturate to -1.0 exactly when the exponentials underflow f64.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1_000_000 {
        let state = VesselState::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-2.0..2.0),
        );
        let reference = ReferenceSample {
            x_d: rng.random_range(-2.0..2.0),
            y_d: rng.random_range(-2.0..2.0),
            psi_d: rng.random_range(-3.0..3.0),
            u_d: rng.random_range(0.0..0.6),
            v_d: 0.0,
            w_d: rng.random_range(-0.5..0.5),
            tangent: 0.0,
        };
        let psi_s = rng.random_range(-4.0..4.0);
        let cmd = ThrustCommand::new(
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
        );
        let prev = ThrustCommand::new(
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
            rng.random_range(-4.0..4.0),
        );
        let b = total_reward(&state, &reference, psi_s, &cmd, &prev, &params);
        assert!((-1.0..=0.0).contains(&b.r_p));
        assert!((-1.0..=1.0).contains(&b.r_psi));
        assert!((-1.0..=0.0).contains(&b.r_w));
        assert!((-1.0..=0.0).contains(&b.r_a));
        assert!((-1.0..=0.0).contains(&b.r_e));
        if !b.out_of_bounds {
            assert!(b.total >= -3.7 && b.total <= 0.5 + 1e-12);
        } else {
            assert_eq!(b.total, -25.0);
        }

        // Translation invariance.
        let (dx, dy) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let mut state2 = state;
        state2.x += dx;
        state2.y += dy;
        let mut ref2 = reference;
        ref2.x_d += dx;
        ref2.y_d += dy;
        let b2 = total_reward(&state2, &ref2, psi_s, &cmd, &prev, &params);
        assert!((b.total - b2.total).abs() < 1e-9);

        // Rotation equivariance about the origin.
        let theta = rng.random_range(-3.0..3.0);
        let rot = |x: f64, y: f64| {
            (
                x * fmath::cos(theta) - y * fmath::sin(theta),
                x * fmath::sin(theta) + y * fmath::cos(theta),
            )
        };
        let (sx, sy) = rot(state.x, state.y);
        let state3 = VesselState::new(sx, sy, state.psi + theta, state.u, state.v, state.w);
        let (rx, ry) = rot(reference.x_d, reference.y_d);
        let mut ref3 = reference;
        ref3.x_d = rx;
        ref3.y_d = ry;
        ref3.psi_d = fmath::wrap_angle(reference.psi_d + theta);
        let b3 = total_reward(
            &state3,
            &ref3,
            fmath::wrap_angle(psi_s + theta),
            &cmd,
            &prev,
            &params,
        );
        assert!((b.total - b3.total).abs() < 1e-9);
    }

    assert!(start.elapsed().as_secs() < 30, "criterion must finish in 30 s");
    pass(
        "reward-unit-suite",
        format!(
            "pinned values exact, 1e6 random scenes in ranges and invariant ({:.1} s)",
            start.elapsed().as_secs_f64()
        ),
    );
}

// --- Criterion: neural gradient check ------------------------------------

/// Squared-error loss of `net` on a fixed batch, halved.
fn net_loss(net: &Mlp, input: &Mat, target: &Mat) -> f64 {
    let out = net.forward_batch(input);
    let o = out.output();
    let mut acc = 0.0;
    for r in 0..o.rows() {
        for c in 0..o.cols() {
            let d = o.get(r, c) - target.get(r, c);
            acc += 0.5 * d * d;
        }
    }
    acc
}

/// Draws a batch that keeps every hidden pre-activation away from the ReLU
/// kink so the finite-difference sweep stays smooth.
fn kink_free_batch<R: Rng>(net: &Mlp, rows: usize, rng: &mut R) -> Mat {
    'outer: for _ in 0..200 {
        let input = Mat::from_fn(rows, net.input_dim(), |_, _| rng.random_range(-1.0..1.0));
        let cache = net.forward_batch(&input);
        for act in &cache.acts[1..cache.acts.len() - 1] {
            // Post-ReLU zero means the pre-activation was at or below zero;
            // only near-zero positive values sit dangerously close.
            if act.as_slice().iter().any(|a| *a > 0.0 && *a < 1e-4) {
                continue 'outer;
            }
        }
        return input;
    }
    panic!("could not find a kink-free batch");
}

fn gradient_check(net: &Mlp, label: &str, rng: &mut ChaCha8Rng) -> f64 {
    let input = kink_free_batch(net, 2, rng);
    let target = Mat::from_fn(2, net.output_dim(), |_, _| rng.random_range(-0.5..0.5));
    let cache = net.forward_batch(&input);
    let out = cache.output();
    let d_out = Mat::from_fn(out.rows(), out.cols(), |r, c| out.get(r, c) - target.get(r, c));
    let (grads, _) = net.backward_batch(&cache, &d_out, true);
    let grads = grads.unwrap();

    let h = 1e-5;
    let mut worst: f64 = 0.0;

    // Parameter sweep, chunk-parallel: each worker owns a clone of the net
    // and perturbs it in place.
    let layout: Vec<(usize, usize, usize)> = net
        .layers
        .iter()
        .enumerate()
        .map(|(li, l)| (li, l.w.rows() * l.w.cols(), l.b.len()))
        .collect();
    let jobs: Vec<(usize, usize)> = layout
        .iter()
        .flat_map(|(li, wn, bn)| (0..wn + bn).map(move |k| (*li, k)))
        .collect();

    use rayon::prelude::*;
    let worst_chunk = jobs
        .par_chunks(20_000)
        .map(|chunk| {
            let mut local = net.clone();
            let mut local_worst: f64 = 0.0;
            for &(li, k) in chunk {
                let cols = local.layers[li].w.cols();
                let wn = local.layers[li].w.rows() * cols;
                let (analytic, fd) = if k < wn {
                    let (r, c) = (k / cols, k % cols);
                    let saved = local.layers[li].w.get(r, c);
                    local.layers[li].w.set(r, c, saved + h);
                    let plus = net_loss(&local, &input, &target);
                    local.layers[li].w.set(r, c, saved - h);
                    let minus = net_loss(&local, &input, &target);
                    local.layers[li].w.set(r, c, saved);
                    (grads.layers[li].0.get(r, c), (plus - minus) / (2.0 * h))
                } else {
                    let b = k - wn;
                    let saved = local.layers[li].b[b];
                    local.layers[li].b[b] = saved + h;
                    let plus = net_loss(&local, &input, &target);
                    local.layers[li].b[b] = saved - h;
                    let minus = net_loss(&local, &input, &target);
                    local.layers[li].b[b] = saved;
                    (grads.layers[li].1[b], (plus - minus) / (2.0 * h))
                };
                let denom = analytic.abs().max(fd.abs()).max(1e-6);
                local_worst = local_worst.max(((analytic - fd) / denom).abs());
            }
            local_worst
        })
        .reduce(|| 0.0, f64::max);
    worst = worst.max(worst_chunk);

    assert!(
        worst < 1e-4,
        "{label}: worst relative gradient error {worst:.2e}"
    );
    worst
}

#[test]
fn neural_gradient_check() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let obs = ObsConfig::default().observation_len();

    let hyper = DdpgHyper {
        batch_size: 64,
        buffer_capacity: 10_000,
        ..DdpgHyper::default()
    };
    let mut agent = DdpgAgent::new(hyper, 4.0, &mut rng);

    let worst_actor_init = gradient_check(&agent.actor, "actor at init", &mut rng);
    let worst_critic_init = gradient_check(&agent.critic, "critic at init", &mut rng);

    // 1000 training steps on synthetic transitions to move the weights.
    let mut buf = ReplayBuffer::new(10_000);
    for _ in 0..1_000 {
        buf.push(Transition {
            obs: (0..obs).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: core::array::from_fn(|_| rng.random_range(-4.0..4.0)),
            reward: rng.random_range(-2.0..0.5),
            next_obs: (0..obs).map(|_| rng.random_range(-1.0..1.0)).collect(),
            done: rng.random_range(0.0..1.0) < 0.03,
        });
    }
    for _ in 0..1000 {
        agent.train_step(&buf, &mut rng).unwrap();
    }

    let worst_actor_trained = gradient_check(&agent.actor, "actor after 1000 steps", &mut rng);
    let worst_critic_trained = gradient_check(&agent.critic, "critic after 1000 steps", &mut rng);

    assert!(start.elapsed().as_secs() < 120, "criterion must finish in 2 min");
    pass(
        "neural-gradient-check",
        format!(
            "worst rel err: actor {worst_actor_init:.1e}/{worst_actor_trained:.1e}, \
             critic {worst_critic_init:.1e}/{worst_critic_trained:.1e} (init/trained, {:.0} s)",
            start.elapsed().as_secs_f64()
        ),
    );
}

// --- Criterion: noise-process statistics ----------------------------------

#[test]
fn noise_process_statistics() {
    let start = Instant::now();

    // Ornstein-Uhlenbeck stationary standard deviation.
    let mut ou = OuNoise::new(1, 0.2, 0.15, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut sum_sq = 0.0;
    let steps = 1_000_000;
    for _ in 0..steps {
        let x = ou.sample(&mut rng)[0];
        sum_sq += x * x;
    }
    let ou_std = (sum_sq / steps as f64).sqrt();
    let ou_expected = 0.15 / (0.4f64).sqrt();
    assert!((ou_expected - 0.2372).abs() < 5e-4);
    assert!(
        ((ou_std - ou_expected) / ou_expected).abs() < 0.10,
        "OU std {ou_std} vs {ou_expected}"
    );

    // Gauss-Markov current without the cap: compare the second moment of
    // the zero-floored process against the half-normal matching moment.
    let mut current = CurrentModel {
        mu_c: 0.1,
        sigma_c: 0.045,
        v_cap: f64::INFINITY,
        v_c: 0.0,
        ..CurrentModel::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sum_sq = 0.0;
    for _ in 0..steps {
        asv_core::disturbance::current_step(&mut current, 0.0, 0.1, &mut rng);
        sum_sq += current.v_c * current.v_c;
    }
    let gm_std = (sum_sq / steps as f64).sqrt();
    let gm_expected = 0.045 / (2.0f64 * 0.1).sqrt();
    assert!(
        ((gm_std - gm_expected) / gm_expected).abs() < 0.10,
        "Gauss-Markov std {gm_std} vs {gm_expected}"
    );

    // Wave oscillatory component is zero-mean (batch-means standard error
    // absorbs the autocorrelation).
    let mut wave = WaveModel {
        drift_sigma: 0.0,
        ..WaveModel::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let state = VesselState::zeros();
    let blocks = 1000;
    let block_len = 1000;
    let mut means = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let mut acc = 0.0;
        for _ in 0..block_len {
            asv_core::disturbance::wave_step(&mut wave, &state, 0.1, &mut rng);
            acc += wave.xf2;
        }
        means.push(acc / block_len as f64);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        mean.abs() < 3.0 * se,
        "wave mean {mean} exceeds 3 SE = {}",
        3.0 * se
    );

    assert!(start.elapsed().as_secs() < 60, "criterion must finish in 1 min");
    pass(
        "noise-process-statistics",
        format!(
            "OU std {ou_std:.4} (target {ou_expected:.4}), GM std {gm_std:.4} \
             (target {gm_expected:.4}), wave mean {mean:.2e} within 3 SE ({:.0} s)",
            start.elapsed().as_secs_f64()
        ),
    );
}

// --- Criterion: NMPC nominal closed loop ----------------------------------

#[test]
fn nmpc_nominal_closed_loop() {
    let start = Instant::now();
    let env = EnvConfig::default();
    let spec = TrajectorySpec::sinusoid(1.0, 8.0, 0.3, 35.0);
    let mut controller = NmpcController::new(Default::default(), env.model, env.episode.dt);
    let log = run_closed_loop(
        &env,
        &spec,
        &mut controller,
        exact_initial_state(&spec),
        asv_core::disturbance::DisturbanceState::none(),
        Mode::Eval,
        0,
    );
    assert_eq!(log.termination, Termination::TimeLimit);

    let tail: Vec<f64> = log
        .steps
        .iter()
        .filter(|s| s.t > 3.0)
        .map(|s| s.e_p * s.e_p)
        .collect();
    let rmse = (tail.iter().sum::<f64>() / tail.len() as f64).sqrt();
    assert!(rmse < 0.05, "post-transient RMSE {rmse}");

    let mut solves = 0;
    for stats in &controller.solve_log {
        assert!(!stats.aborted);
        for w in stats.cost_history.windows(2) {
            assert!(w[1] <= w[0], "cost rose within a solve");
        }
        solves += 1;
    }

    assert!(start.elapsed().as_secs() < 60, "criterion must finish in 1 min");
    pass(
        "nmpc-nominal-closed-loop",
        format!(
            "RMSE {rmse:.4} m after 3 s transient, cost monotone across {solves} solves ({:.0} s)",
            start.elapsed().as_secs_f64()
        ),
    );
}

// --- Criterion: training smoke test ----------------------------------------

fn smoke_train_config(episodes: usize) -> TrainConfig {
    let mut env = EnvConfig::default();
    env.episode = EpisodeConfig {
        init_heading_range: fmath::PI / 3.0,
        ..EpisodeConfig::default()
    };
    TrainConfig {
        hyper: DdpgHyper {
            batch_size: 64,
            ..DdpgHyper::default()
        },
        env,
        ranges: TrainingRanges {
            amplitude: (0.75, 0.75),
            period: (8.0, 8.0),
            speed: (0.25, 0.25),
            duration: 30.0,
        },
        disturbance: Default::default(),
        episodes,
        plateau: Default::default(),
        seed: 7,
    }
}

#[test]
#[ignore = "about 10 minutes; run with --ignored"]
fn training_smoke_test() {
    let start = Instant::now();
    let config = smoke_train_config(300);
    let outcome = train(&config, |s| {
        if (s.episode + 1) % 50 == 0 {
            eprintln!(
                "smoke episode {:>3}: return {:>8.2} ma50 {:>8.2}",
                s.episode, s.total_return, s.moving_average
            );
        }
    })
    .unwrap();

    let returns: Vec<f64> = outcome.curve.iter().map(|s| s.total_return).collect();
    let first50 = returns[..50].iter().sum::<f64>() / 50.0;
    let last50 = returns[returns.len() - 50..].iter().sum::<f64>() / 50.0;
    assert!(
        last50 > first50,
        "no improvement: first-50 mean {first50:.2}, last-50 mean {last50:.2}"
    );

    // The selected policy must survive a full evaluation episode on the
    // training trajectory.
    let spec = TrajectorySpec::sinusoid(0.75, 8.0, 0.25, 35.0);
    let mut policy = PolicyController::new(
        outcome.policy.clone(),
        config.hyper.obs,
        config.env.model.f_max,
    );
    let log = run_closed_loop(
        &config.env,
        &spec,
        &mut policy,
        exact_initial_state(&spec),
        asv_core::disturbance::DisturbanceState::none(),
        Mode::Eval,
        123,
    );
    assert_eq!(
        log.termination,
        Termination::TimeLimit,
        "trained policy left the boundary (mean e_p {:.3})",
        log.mean_e_p
    );

    assert!(
        start.elapsed().as_secs() < 900,
        "criterion must finish in 15 min"
    );
    pass(
        "training-smoke-test",
        format!(
            "first-50 mean {first50:.2} -> last-50 mean {last50:.2}, eval episode complete \
             (mean e_p {:.3} m, {:.0} s)",
            log.mean_e_p,
            start.elapsed().as_secs_f64()
        ),
    );
}

// --- Criterion: determinism -------------------------------------------------

#[test]
fn determinism_bit_identical_runs() {
    // Evaluation: the same seeded NMPC episode twice, trace bytes compared.
    let dir = tempfile::tempdir().unwrap();
    let env = EnvConfig::default();
    let spec = TrajectorySpec::sinusoid(1.0, 8.0, 0.3, 35.0);
    let trace_for = |path: &Path| {
        let mut controller =
            NmpcController::new(Default::default(), env.model, env.episode.dt);
        let log = run_closed_loop(
            &env,
            &spec,
            &mut controller,
            exact_initial_state(&spec),
            asv_core::disturbance::DisturbanceState::new(
                Some(Default::default()),
                Some(Default::default()),
                Some(Default::default()),
                42,
            ),
            Mode::Eval,
            42,
        );
        asv_harness::trace::write_trace(path, &log).unwrap();
        std::fs::read(path).unwrap()
    };
    let a = trace_for(&dir.path().join("a.csv"));
    let b = trace_for(&dir.path().join("b.csv"));
    assert_eq!(a, b, "evaluation traces differ between identical runs");
    assert!(!a.is_empty());

    // Training: a short seeded run repeated, curves and weights compared.
    let mut config = smoke_train_config(6);
    config.hyper.batch_size = 32;
    let run = || {
        let mut curve = Vec::new();
        let outcome = train(&config, |s| curve.push((s.steps, s.total_return))).unwrap();
        (curve, outcome.final_policy)
    };
    let (curve_a, policy_a) = run();
    let (curve_b, policy_b) = run();
    assert_eq!(curve_a, curve_b, "training curves differ");
    assert_eq!(policy_a, policy_b, "trained weights differ");

    pass(
        "determinism",
        format!(
            "identical trace bytes ({} bytes) and bit-identical training curves/weights",
            a.len()
        ),
    );
}

// --- Criterion: metrics oracle ----------------------------------------------

#[test]
fn metrics_oracle() {
    // Produce a real trace, then recompute the metrics with a trivial
    // independent pass over the parsed CSV text.
    let dir = tempfile::tempdir().unwrap();
    let env = EnvConfig::default();
    let spec = TrajectorySpec::sinusoid(1.0, 8.0, 0.3, 35.0);
    let mut controller = NmpcController::new(Default::default(), env.model, env.episode.dt);
    let log = run_closed_loop(
        &env,
        &spec,
        &mut controller,
        exact_initial_state(&spec),
        asv_core::disturbance::DisturbanceState::none(),
        Mode::Eval,
        9,
    );
    let path = dir.path().join("trace_rep0.csv");
    asv_harness::trace::write_trace(&path, &log).unwrap();

    let rows = asv_harness::trace::read_trace(&path).unwrap();
    let reported = asv_harness::metrics::compute_metrics(&rows).unwrap();

    // Independent trivial recomputation straight off the text.
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (cx, cy, cxd, cyd, cpsi, cpsid) = (
        col("x"),
        col("y"),
        col("x_d"),
        col("y_d"),
        col("psi"),
        col("psi_d"),
    );
    let (c1, c2, c3, c4) = (col("f1"), col("f2"), col("f3"), col("f4"));
    let mut n = 0.0;
    let mut sq = 0.0;
    let mut heading = 0.0;
    let mut effort = 0.0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let (dx, dy) = (v[cx] - v[cxd], v[cy] - v[cyd]);
        sq += dx * dx + dy * dy;
        let mut d = (v[cpsi] - v[cpsid]) % (2.0 * std::f64::consts::PI);
        if d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        if d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        heading += d.abs();
        effort += v[c1].abs() + v[c2].abs() + v[c3].abs() + v[c4].abs();
        n += 1.0;
    }
    let rmse = (sq / n).sqrt();
    let mean_heading = heading / n;
    let e_ave = (effort / n).sqrt();

    assert!((rmse - reported.rmse_e_p).abs() < 1e-9);
    assert!((mean_heading - reported.mean_heading_error).abs() < 1e-9);
    assert!((e_ave - reported.e_ave).abs() < 1e-9);

    // The shipped Python script agrees too.
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/verify_metrics.py");
    let out = std::process::Command::new("python3")
        .arg(script)
        .arg(&path)
        .output()
        .expect("python3 available");
    assert!(
        out.status.success(),
        "verify_metrics.py failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((parsed["rmse_e_p"].as_f64().unwrap() - reported.rmse_e_p).abs() < 1e-9);
    assert!((parsed["e_ave"].as_f64().unwrap() - reported.e_ave).abs() < 1e-9);

    pass(
        "metrics-oracle",
        format!(
            "independent recompute matches to 1e-9 (rmse {rmse:.6}, E_ave {e_ave:.6})"
        ),
    );
}

// --- Criterion: full reproduction (long) -------------------------------------

/// Runs the whole study end to end: trains the full-reward and simple-reward
/// policies for 3000 episodes each (as two concurrent CLI processes), then
/// evaluates DRL vs NMPC under the disturbance scenario and the two reward
/// arms against each other. Takes a few hours on two cores.
#[test]
#[ignore = "multi-hour full training; run with --ignored"]
fn full_reproduction() {
    let start = Instant::now();
    let repro = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../repro");
    std::fs::create_dir_all(&repro).unwrap();
    let bin = env!("CARGO_BIN_EXE_asv");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/full.toml");
    let eval_config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/eval_disturbed.toml");

    let full_dir = repro.join("train_full");
    let simple_dir = repro.join("train_simple");
    let have = |d: &Path| d.join("policy.ckpt").exists();

    // Train both arms concurrently unless checkpoints already exist.
    if !(have(&full_dir) && have(&simple_dir)) {
        let spawn = |out: &Path, extra: &[&str]| {
            let mut cmd = std::process::Command::new(bin);
            cmd.arg("--config")
                .arg(&config)
                .arg("--out-dir")
                .arg(out)
                .arg("--threads")
                .arg("1")
                .arg("train")
                .arg("--quiet");
            for e in extra {
                cmd.arg(e);
            }
            cmd.spawn().expect("spawn training")
        };
        let mut full = spawn(&full_dir, &[]);
        let mut simple = spawn(&simple_dir, &["--simple-reward"]);
        assert!(full.wait().unwrap().success(), "full-reward training failed");
        assert!(
            simple.wait().unwrap().success(),
            "simple-reward training failed"
        );
    }

    let evaluate = |controller: &str, checkpoint: Option<&Path>, out: &Path| {
        let mut cmd = std::process::Command::new(bin);
        cmd.arg("--config")
            .arg(&eval_config)
            .arg("--out-dir")
            .arg(out)
            .arg("--reps")
            .arg("3")
            .arg("--seed")
            .arg("1000")
            .arg("evaluate")
            .arg("--controller")
            .arg(controller);
        if let Some(c) = checkpoint {
            cmd.arg("--checkpoint").arg(c);
        }
        let status = cmd.status().expect("run evaluate");
        assert!(status.success(), "{controller} evaluation failed");
        let json = std::fs::read_to_string(out.join("metrics.json")).unwrap();
        serde_json::from_str::<serde_json::Value>(&json).unwrap()
    };

    let full_ckpt = full_dir.join("policy.ckpt");
    let simple_ckpt = simple_dir.join("policy.ckpt");
    let drl = evaluate("drl", Some(&full_ckpt), &repro.join("eval_drl"));
    let nmpc = evaluate("nmpc", None, &repro.join("eval_nmpc"));
    let simple = evaluate("drl", Some(&simple_ckpt), &repro.join("eval_simple"));

    // (a) Disturbed sinusoid tracking below 0.15 m RMSE.
    let drl_rmse = drl["aggregate"]["rmse_mean"].as_f64().expect("drl aggregate");
    assert!(drl_rmse < 0.15, "(a) DRL RMSE {drl_rmse}");

    // (b) DRL beats NMPC on the same disturbance seeds in >= 2 of 3 reps.
    let per = |v: &serde_json::Value| -> Vec<f64> {
        v["per_rep"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["metrics"]["rmse_e_p"].as_f64().unwrap())
            .collect()
    };
    let drl_reps = per(&drl);
    let nmpc_reps = per(&nmpc);
    let wins = drl_reps
        .iter()
        .zip(&nmpc_reps)
        .filter(|(d, n)| d < n)
        .count();
    assert!(wins >= 2, "(b) DRL won only {wins}/3 (drl {drl_reps:?}, nmpc {nmpc_reps:?})");

    // (c) Full reward tracks better than the simple reward.
    let simple_rmse = simple["aggregate"]["rmse_mean"]
        .as_f64()
        .expect("simple aggregate");
    assert!(
        drl_rmse < simple_rmse,
        "(c) full {drl_rmse} vs simple {simple_rmse}"
    );

    pass(
        "full-reproduction",
        format!(
            "(a) DRL RMSE {drl_rmse:.4} < 0.15, (b) DRL < NMPC in {wins}/3 reps \
             (NMPC mean {:.4}), (c) full {drl_rmse:.4} < simple {simple_rmse:.4} \
             ({:.0} min total)",
            nmpc["aggregate"]["rmse_mean"].as_f64().unwrap(),
            start.elapsed().as_secs_f64() / 60.0
        ),
    );
}
