//! Experiment orchestration: training runs, closed-loop evaluations with
//! repetitions, the reward ablation, and open-loop scripted simulation.

use std::fs;
use std::path::{Path, PathBuf};

use asv_core::ddpg::{
    train, DdpgHyper, PolicyController, TrainConfig, TrainOutcome,
};
use asv_core::episode::{
    exact_initial_state, run_closed_loop, Controller, EpisodeLog, Mode, Termination,
};
use asv_core::guidance::ReferencePath;
use asv_core::nmpc::NmpcController;
use asv_core::nn::{decode_mlp, encode_mlp, Mlp};
use serde::Serialize;

use crate::config::{TrajectoryChoice, WorkbenchConfig};
use crate::manifest::{config_hash, rep_seed, Manifest};
use crate::metrics::{compute_metrics, MetricsReport, RepReport};
use crate::plots::emit_plots;
use crate::trace::{
    load_reference_csv, termination_name, write_atomic, write_trace, ActionSchedule, CurveWriter,
};
use crate::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which controller an evaluation runs.
#[derive(Debug, Clone)]
pub enum ControllerSpec {
    Drl { checkpoint: PathBuf },
    Nmpc,
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::Drl { .. } => "drl",
            ControllerSpec::Nmpc => "nmpc",
        }
    }
}

pub fn load_policy(path: &Path) -> Result<Mlp, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| {
        HarnessError::Config(format!("cannot read checkpoint {}: {e}", path.display()))
    })?;
    decode_mlp(&text)
        .map_err(|e| HarnessError::Config(format!("bad checkpoint {}: {e}", path.display())))
}

pub fn save_policy(path: &Path, policy: &Mlp) -> Result<(), HarnessError> {
    write_atomic(path, &encode_mlp(policy))
}

/// Resolves the configured trajectory; evaluation requires one.
pub fn build_trajectory(
    config: &WorkbenchConfig,
) -> Result<Box<dyn ReferencePath + Send + Sync>, HarnessError> {
    let choice = config.trajectory.as_ref().ok_or_else(|| {
        HarnessError::Config("this command needs a [trajectory] section".into())
    })?;
    let path: Box<dyn ReferencePath + Send + Sync> = match choice {
        TrajectoryChoice::Analytic(spec) => Box::new(*spec),
        TrajectoryChoice::Csv(file) => Box::new(load_reference_csv(file)?),
    };
    if path.duration() < config.env.episode.t_max - 1e-9 {
        return Err(HarnessError::Config(format!(
            "trajectory duration {} is shorter than t_max {}",
            path.duration(),
            config.env.episode.t_max
        )));
    }
    Ok(path)
}

fn make_controller(
    spec: &ControllerSpec,
    config: &WorkbenchConfig,
) -> Result<Box<dyn Controller + Send>, HarnessError> {
    match spec {
        ControllerSpec::Nmpc => Ok(Box::new(NmpcController::new(
            config.nmpc,
            config.env.model,
            config.env.episode.dt,
        ))),
        ControllerSpec::Drl { checkpoint } => {
            let actor = load_policy(checkpoint)?;
            if actor.input_dim() != config.ddpg.obs.observation_len() {
                return Err(HarnessError::Config(format!(
                    "checkpoint expects observation length {}, config gives {}",
                    actor.input_dim(),
                    config.ddpg.obs.observation_len()
                )));
            }
            Ok(Box::new(PolicyController::new(
                actor,
                config.ddpg.obs,
                config.env.model.f_max,
            )))
        }
    }
}

fn run_one_rep(
    spec: &ControllerSpec,
    config: &WorkbenchConfig,
    path: &(dyn ReferencePath + Send + Sync),
    seed: u64,
) -> Result<EpisodeLog, HarnessError> {
    let mut controller = make_controller(spec, config)?;
    let init = exact_initial_state(path);
    let disturbance = config.disturbance.instantiate(seed);
    Ok(run_closed_loop(
        &config.env,
        path,
        controller.as_mut(),
        init,
        disturbance,
        Mode::Eval,
        seed,
    ))
}

/// Runs `reps` independent episodes (concurrently), writes traces, metrics,
/// manifest, and plot scripts into `out_dir`.
pub fn run_experiment(
    spec: &ControllerSpec,
    config: &WorkbenchConfig,
    config_path: &Path,
    config_bytes: &[u8],
    reps: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<MetricsReport, HarnessError> {
    if reps == 0 {
        return Err(HarnessError::Config("need at least one repetition".into()));
    }
    // Fail fast on a bad checkpoint before spawning work.
    make_controller(spec, config)?;
    let path = build_trajectory(config)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let seeds: Vec<u64> = (0..reps).map(|r| rep_seed(seed, r)).collect();
    let mut logs: Vec<Option<Result<EpisodeLog, HarnessError>>> = Vec::new();
    logs.resize_with(reps, || None);

    std::thread::scope(|scope| {
        let path_ref = path.as_ref();
        let mut handles = Vec::new();
        for (r, slot_seed) in seeds.iter().enumerate() {
            let spec = spec.clone();
            let seed = *slot_seed;
            handles.push((
                r,
                scope.spawn(move || run_one_rep(&spec, config, path_ref, seed)),
            ));
        }
        for (r, handle) in handles {
            logs[r] = Some(handle.join().unwrap_or_else(|_| {
                Err(HarnessError::Runtime(format!("repetition {r} panicked")))
            }));
        }
    });

    let mut per_rep = Vec::with_capacity(reps);
    for (r, slot) in logs.into_iter().enumerate() {
        let log = slot.expect("filled above")?;
        let trace_path = out_dir.join(format!("trace_rep{r}.csv"));
        write_trace(&trace_path, &log)?;
        let rows = crate::trace::read_trace(&trace_path)?;
        let metrics = compute_metrics(&rows)?;
        per_rep.push(RepReport {
            rep: r,
            seed: seeds[r],
            completed: log.termination == Termination::TimeLimit,
            terminated_by: termination_name(log.termination).into(),
            metrics,
        });
    }

    let report = MetricsReport::new(spec.name(), per_rep);
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| HarnessError::Runtime(format!("metrics encode failed: {e}")))?;
    write_atomic(&out_dir.join("metrics.json"), &json)?;

    let mut outputs: Vec<String> = (0..reps).map(|r| format!("trace_rep{r}.csv")).collect();
    outputs.push("metrics.json".into());
    outputs.extend(emit_plots(out_dir)?);
    Manifest {
        tool_version: VERSION.into(),
        command: format!("evaluate --controller {}", spec.name()),
        config_path: config_path.display().to_string(),
        config_sha256: config_hash(config_bytes),
        seed,
        reps,
        rep_seeds: seeds,
        outputs,
    }
    .write(&out_dir.join("manifest.json"))?;

    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct AblationReport {
    pub full: MetricsReport,
    pub simple: MetricsReport,
    /// full / simple aggregate RMSE; < 1 means the full reward tracks better.
    pub rmse_ratio: Option<f64>,
    pub rmse_reduction_pct: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub energy_reduction_pct: Option<f64>,
    pub paper_reference: PaperReference,
}

/// Reported values from the original study, included for context only and
/// never asserted by the harness.
#[derive(Debug, Serialize)]
pub struct PaperReference {
    pub rmse_reduction_pct: f64,
    pub energy_reduction_pct: f64,
    pub asserted: bool,
}

/// Evaluates two checkpoints on identical seeds and trajectories.
pub fn run_ablation(
    full_checkpoint: &Path,
    simple_checkpoint: &Path,
    config: &WorkbenchConfig,
    config_path: &Path,
    config_bytes: &[u8],
    reps: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<AblationReport, HarnessError> {
    let full = run_experiment(
        &ControllerSpec::Drl {
            checkpoint: full_checkpoint.to_path_buf(),
        },
        config,
        config_path,
        config_bytes,
        reps,
        seed,
        &out_dir.join("full"),
    )?;
    let simple = run_experiment(
        &ControllerSpec::Drl {
            checkpoint: simple_checkpoint.to_path_buf(),
        },
        config,
        config_path,
        config_bytes,
        reps,
        seed,
        &out_dir.join("simple"),
    )?;

    let ratios = match (&full.aggregate, &simple.aggregate) {
        (Some(f), Some(s)) if s.rmse_mean > 0.0 && s.e_ave_mean > 0.0 => Some((
            f.rmse_mean / s.rmse_mean,
            f.e_ave_mean / s.e_ave_mean,
        )),
        _ => None,
    };
    let report = AblationReport {
        full,
        simple,
        rmse_ratio: ratios.map(|r| r.0),
        rmse_reduction_pct: ratios.map(|r| (1.0 - r.0) * 100.0),
        energy_ratio: ratios.map(|r| r.1),
        energy_reduction_pct: ratios.map(|r| (1.0 - r.1) * 100.0),
        paper_reference: PaperReference {
            rmse_reduction_pct: 33.03,
            energy_reduction_pct: 37.07,
            asserted: false,
        },
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| HarnessError::Runtime(format!("ablation encode failed: {e}")))?;
    write_atomic(&out_dir.join("ablation.json"), &json)?;
    Ok(report)
}

/// Scripted open-loop controller for the `simulate` subcommand.
struct ScriptedController {
    schedule: ActionSchedule,
}

impl Controller for ScriptedController {
    fn reset(&mut self) {}
    fn command(
        &mut self,
        ctx: &asv_core::episode::ControlContext<'_>,
    ) -> asv_core::dynamics::ThrustCommand {
        asv_core::dynamics::ThrustCommand::from_array(self.schedule.at(ctx.t))
    }
}

/// Runs the scripted action sequence open loop and writes one trace.
pub fn simulate_scripted(
    actions: &Path,
    config: &WorkbenchConfig,
    config_path: &Path,
    config_bytes: &[u8],
    seed: u64,
    out_dir: &Path,
) -> Result<EpisodeLog, HarnessError> {
    let schedule = ActionSchedule::load(actions)?;
    let path = build_trajectory(config)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut controller = ScriptedController { schedule };
    let init = exact_initial_state(path.as_ref());
    let disturbance = config.disturbance.instantiate(seed);
    let log = run_closed_loop(
        &config.env,
        path.as_ref(),
        &mut controller,
        init,
        disturbance,
        Mode::Eval,
        seed,
    );
    write_trace(&out_dir.join("trace_rep0.csv"), &log)?;
    Manifest {
        tool_version: VERSION.into(),
        command: format!("simulate --actions {}", actions.display()),
        config_path: config_path.display().to_string(),
        config_sha256: config_hash(config_bytes),
        seed,
        reps: 1,
        rep_seeds: vec![seed],
        outputs: vec!["trace_rep0.csv".into()],
    }
    .write(&out_dir.join("manifest.json"))?;
    Ok(log)
}

/// Options for a training run beyond the config file.
#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub episodes_override: Option<usize>,
    pub simple_reward: bool,
    pub quiet: bool,
}

/// Trains a policy per the config, streaming the learning curve to CSV and
/// saving the best/final checkpoints.
pub fn run_training(
    config: &WorkbenchConfig,
    config_path: &Path,
    config_bytes: &[u8],
    seed: u64,
    options: &TrainOptions,
    out_dir: &Path,
) -> Result<TrainOutcome, HarnessError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut env = config.env;
    if options.simple_reward {
        env.reward = env.reward.simple();
    }
    let hyper = DdpgHyper { ..config.ddpg };
    let train_config = TrainConfig {
        hyper,
        env,
        ranges: config.training_ranges,
        disturbance: if config.train_with_disturbances {
            config.disturbance
        } else {
            Default::default()
        },
        episodes: options.episodes_override.unwrap_or(config.training_episodes),
        plateau: config.plateau,
        seed,
    };

    let mut curve = CurveWriter::create(&out_dir.join("learning_curve.csv"))?;
    let mut curve_error = None;
    let quiet = options.quiet;
    let outcome = train(&train_config, |stats| {
        if curve_error.is_none() {
            if let Err(e) = curve.append(stats) {
                curve_error = Some(e);
            }
        }
        if !quiet && (stats.episode + 1) % 50 == 0 {
            eprintln!(
                "episode {:>5}: steps {:>3} return {:>9.2} ma50 {:>9.2} ({})",
                stats.episode,
                stats.steps,
                stats.total_return,
                stats.moving_average,
                termination_name(stats.termination),
            );
        }
    })
    .map_err(|e| HarnessError::Runtime(format!("training failed: {e}")))?;
    if let Some(e) = curve_error {
        return Err(e);
    }
    curve.finish()?;

    save_policy(&out_dir.join("policy.ckpt"), &outcome.policy)?;
    save_policy(&out_dir.join("policy_final.ckpt"), &outcome.final_policy)?;

    Manifest {
        tool_version: VERSION.into(),
        command: format!(
            "train{}{}",
            if options.simple_reward { " --simple-reward" } else { "" },
            options
                .episodes_override
                .map(|e| format!(" --episodes {e}"))
                .unwrap_or_default()
        ),
        config_path: config_path.display().to_string(),
        config_sha256: config_hash(config_bytes),
        seed,
        reps: 1,
        rep_seeds: vec![seed],
        outputs: vec![
            "policy.ckpt".into(),
            "policy_final.ckpt".into(),
            "learning_curve.csv".into(),
        ],
    }
    .write(&out_dir.join("manifest.json"))?;

    Ok(outcome)
}
