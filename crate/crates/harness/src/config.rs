//! Experiment configuration: one TOML file drives every subcommand.
//!
//! Model parameters sit at the root as flat keys (`m11 = 12.0`); everything
//! else lives in sections (`[wind]`, `[trajectory]`, `[ddpg]`, ...). Any
//! missing key falls back to the tuned default, and unknown keys are
//! rejected so typos fail loudly at startup.

use std::fs;
use std::path::{Path, PathBuf};

use asv_core::ddpg::{DisturbanceTemplate, ObsConfig, PlateauConfig};
use asv_core::disturbance::{CurrentModel, WaveModel, WindModel};
use asv_core::dynamics::ModelParameters;
use asv_core::episode::{EnvConfig, EpisodeConfig};
use asv_core::guidance::{TrainingRanges, TrajectorySpec};
use asv_core::nmpc::NmpcConfig;
use asv_core::reward::{ActionVariation, RewardParams};
use serde::Deserialize;

use crate::HarnessError;

const KNOT: f64 = 463.0 / 900.0; // m/s

fn deg(d: f64) -> f64 {
    d * core::f64::consts::PI / 180.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    // Vessel model, flat at the root.
    pub m11: Option<f64>,
    pub m22: Option<f64>,
    pub m33: Option<f64>,
    pub d11: Option<f64>,
    pub d22: Option<f64>,
    pub d33: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub f_max: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,

    #[serde(default)]
    pub episode: EpisodeSection,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub los: LosSection,
    pub trajectory: Option<TrajectorySection>,
    pub wind: Option<WindSection>,
    pub wave: Option<WaveSection>,
    pub current: Option<CurrentSection>,
    #[serde(default)]
    pub ddpg: DdpgSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub nmpc: NmpcSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSection {
    pub t_max: Option<f64>,
    pub noise_cov: Option<f64>,
    pub init_pos_radius: Option<f64>,
    pub init_heading_range_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub mu: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub k4: Option<f64>,
    pub k5: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub lambda4: Option<f64>,
    pub lambda5: Option<f64>,
    pub e_bound: Option<f64>,
    pub boundary_penalty: Option<f64>,
    /// Keep the raw signed action-variation sum instead of absolute values.
    pub signed_action_delta: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosSection {
    pub lookahead: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: String,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub speed: Option<f64>,
    pub duration: Option<f64>,
    pub phase: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub rotation_deg: Option<f64>,
    /// Reference rows file for `kind = "csv"`.
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSection {
    pub speed_knots: Option<f64>,
    pub direction_deg: Option<f64>,
    pub rho_a: Option<f64>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub cn: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    #[serde(rename = "cap_N")]
    pub cap_n: Option<f64>,
    pub omega_e: Option<f64>,
    pub lambda: Option<f64>,
    pub direction_deg: Option<f64>,
    pub kw: Option<f64>,
    pub drift_sigma: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSection {
    pub cap_mps: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub direction_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdpgSection {
    pub actor_lr: Option<f64>,
    pub critic_lr: Option<f64>,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    pub batch_size: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub warmup_steps: Option<usize>,
    pub hidden_width: Option<usize>,
    pub ou_theta: Option<f64>,
    pub ou_sigma: Option<f64>,
    pub ou_dt: Option<f64>,
    pub history: Option<usize>,
    pub relative_obs: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub episodes: Option<usize>,
    pub amplitude_range: Option<[f64; 2]>,
    pub period_range: Option<[f64; 2]>,
    pub speed_range: Option<[f64; 2]>,
    pub plateau_window: Option<usize>,
    pub plateau_span: Option<usize>,
    pub plateau_rel_tol: Option<f64>,
    /// Run the configured wind/wave/current during training episodes.
    pub with_disturbances: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmpcSection {
    pub horizon: Option<usize>,
    pub w_pos: Option<f64>,
    pub w_heading: Option<f64>,
    pub w_vel: Option<f64>,
    pub w_ctrl: Option<f64>,
    pub w_rate: Option<f64>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
}

/// How the reference trajectory is specified.
#[derive(Debug, Clone)]
pub enum TrajectoryChoice {
    Analytic(TrajectorySpec),
    Csv(PathBuf),
}

/// Fully resolved configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct WorkbenchConfig {
    pub env: EnvConfig,
    pub seed: u64,
    pub trajectory: Option<TrajectoryChoice>,
    pub disturbance: DisturbanceTemplate,
    pub ddpg: asv_core::ddpg::DdpgHyper,
    pub training_episodes: usize,
    pub training_ranges: TrainingRanges,
    pub plateau: PlateauConfig,
    pub train_with_disturbances: bool,
    pub nmpc: NmpcConfig,
}

impl WorkbenchConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), HarnessError> {
        let bytes = fs::read(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| HarnessError::Config("config is not UTF-8".into()))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("config parse error: {e}")))?;
        let resolved = Self::from_raw(raw, path)?;
        Ok((resolved, bytes))
    }

    pub fn default_config() -> Self {
        Self {
            env: EnvConfig::default(),
            seed: 0,
            trajectory: None,
            disturbance: DisturbanceTemplate::default(),
            ddpg: asv_core::ddpg::DdpgHyper::default(),
            training_episodes: 3000,
            training_ranges: TrainingRanges::default(),
            plateau: PlateauConfig::default(),
            train_with_disturbances: false,
            nmpc: NmpcConfig::default(),
        }
    }

    fn from_raw(raw: RawConfig, config_path: &Path) -> Result<Self, HarnessError> {
        let mut cfg = Self::default_config();
        let model_defaults = ModelParameters::default();
        cfg.env.model = ModelParameters {
            m11: raw.m11.unwrap_or(model_defaults.m11),
            m22: raw.m22.unwrap_or(model_defaults.m22),
            m33: raw.m33.unwrap_or(model_defaults.m33),
            d11: raw.d11.unwrap_or(model_defaults.d11),
            d22: raw.d22.unwrap_or(model_defaults.d22),
            d33: raw.d33.unwrap_or(model_defaults.d33),
            a: raw.a.unwrap_or(model_defaults.a),
            b: raw.b.unwrap_or(model_defaults.b),
            f_max: raw.f_max.unwrap_or(model_defaults.f_max),
        };
        if !cfg.env.model.is_valid() {
            return Err(HarnessError::Config(
                "model parameters must be finite and positive".into(),
            ));
        }
        cfg.seed = raw.seed.unwrap_or(0);

        let ep_defaults = EpisodeConfig::default();
        cfg.env.episode = EpisodeConfig {
            dt: raw.dt.unwrap_or(ep_defaults.dt),
            t_max: raw.episode.t_max.unwrap_or(ep_defaults.t_max),
            noise_cov: raw.episode.noise_cov.unwrap_or(ep_defaults.noise_cov),
            init_pos_radius: raw
                .episode
                .init_pos_radius
                .unwrap_or(ep_defaults.init_pos_radius),
            init_heading_range: raw
                .episode
                .init_heading_range_deg
                .map(deg)
                .unwrap_or(ep_defaults.init_heading_range),
        };
        if cfg.env.episode.dt <= 0.0 || cfg.env.episode.t_max <= 0.0 {
            return Err(HarnessError::Config("dt and t_max must be positive".into()));
        }

        let rw = &raw.reward;
        let rd = RewardParams::default();
        cfg.env.reward = RewardParams {
            mu: rw.mu.unwrap_or(rd.mu),
            k1: rw.k1.unwrap_or(rd.k1),
            k2: rw.k2.unwrap_or(rd.k2),
            k3: rw.k3.unwrap_or(rd.k3),
            k4: rw.k4.unwrap_or(rd.k4),
            k5: rw.k5.unwrap_or(rd.k5),
            lambda1: rw.lambda1.unwrap_or(rd.lambda1),
            lambda2: rw.lambda2.unwrap_or(rd.lambda2),
            lambda3: rw.lambda3.unwrap_or(rd.lambda3),
            lambda4: rw.lambda4.unwrap_or(rd.lambda4),
            lambda5: rw.lambda5.unwrap_or(rd.lambda5),
            e_bound: rw.e_bound.unwrap_or(rd.e_bound),
            boundary_penalty: rw.boundary_penalty.unwrap_or(rd.boundary_penalty),
            action_variation: match rw.signed_action_delta {
                Some(true) => ActionVariation::Signed,
                _ => ActionVariation::Absolute,
            },
        };
        cfg.env.lookahead = raw.los.lookahead.unwrap_or(0.9);

        cfg.trajectory = match raw.trajectory {
            None => None,
            Some(t) => Some(Self::trajectory_from(t, config_path)?),
        };

        cfg.disturbance = DisturbanceTemplate {
            wind: raw.wind.map(|w| {
                let d = WindModel::default();
                WindModel {
                    v_w: w.speed_knots.map(|k| k * KNOT).unwrap_or(d.v_w),
                    beta_wind: w.direction_deg.map(deg).unwrap_or(d.beta_wind),
                    rho_a: w.rho_a.unwrap_or(d.rho_a),
                    cx: w.cx.unwrap_or(d.cx),
                    cy: w.cy.unwrap_or(d.cy),
                    cn: w.cn.unwrap_or(d.cn),
                    ..d
                }
            }),
            wave: raw.wave.map(|w| {
                let d = WaveModel::default();
                let f_cap = w.cap_n.unwrap_or(d.f_cap);
                WaveModel {
                    omega_e: w.omega_e.unwrap_or(d.omega_e),
                    lambda_w: w.lambda.unwrap_or(d.lambda_w),
                    k_w: w.kw.unwrap_or(d.k_w),
                    beta_wave: w.direction_deg.map(deg).unwrap_or(d.beta_wave),
                    f_cap,
                    n_cap: f_cap * 0.45,
                    drift_sigma: w.drift_sigma.unwrap_or(d.drift_sigma),
                    ..d
                }
            }),
            current: raw.current.map(|c| {
                let d = CurrentModel::default();
                CurrentModel {
                    mu_c: c.mu.unwrap_or(d.mu_c),
                    sigma_c: c.sigma.unwrap_or(d.sigma_c),
                    beta_c: c.direction_deg.map(deg).unwrap_or(d.beta_c),
                    v_cap: c.cap_mps.unwrap_or(d.v_cap),
                    v_c: 0.0,
                }
            }),
        };

        let dd = &raw.ddpg;
        let dh = asv_core::ddpg::DdpgHyper::default();
        cfg.ddpg = asv_core::ddpg::DdpgHyper {
            actor_lr: dd.actor_lr.unwrap_or(dh.actor_lr),
            critic_lr: dd.critic_lr.unwrap_or(dh.critic_lr),
            gamma: dd.gamma.unwrap_or(dh.gamma),
            tau: dd.tau.unwrap_or(dh.tau),
            batch_size: dd.batch_size.unwrap_or(dh.batch_size),
            buffer_capacity: dd.buffer_capacity.unwrap_or(dh.buffer_capacity),
            warmup_steps: dd.warmup_steps.unwrap_or(dh.warmup_steps),
            hidden_width: dd.hidden_width.unwrap_or(dh.hidden_width),
            ou_theta: dd.ou_theta.unwrap_or(dh.ou_theta),
            ou_sigma: dd.ou_sigma.unwrap_or(dh.ou_sigma),
            ou_dt: dd.ou_dt.unwrap_or(dh.ou_dt),
            obs: ObsConfig {
                history: dd.history.unwrap_or(dh.obs.history),
                relative: dd.relative_obs.unwrap_or(dh.obs.relative),
            },
        };

        let tr = &raw.training;
        cfg.training_episodes = tr.episodes.unwrap_or(3000);
        let ranges_default = TrainingRanges::default();
        let pair = |v: Option<[f64; 2]>, d: (f64, f64)| v.map(|r| (r[0], r[1])).unwrap_or(d);
        cfg.training_ranges = TrainingRanges {
            amplitude: pair(tr.amplitude_range, ranges_default.amplitude),
            period: pair(tr.period_range, ranges_default.period),
            speed: pair(tr.speed_range, ranges_default.speed),
            duration: cfg.env.episode.t_max,
        };
        let pd = PlateauConfig::default();
        cfg.plateau = PlateauConfig {
            window: tr.plateau_window.unwrap_or(pd.window),
            span: tr.plateau_span.unwrap_or(pd.span),
            rel_tol: tr.plateau_rel_tol.unwrap_or(pd.rel_tol),
        };
        cfg.train_with_disturbances = tr.with_disturbances.unwrap_or(false);

        let nm = &raw.nmpc;
        let nd = NmpcConfig::default();
        cfg.nmpc = NmpcConfig {
            horizon: nm.horizon.unwrap_or(nd.horizon),
            w_pos: nm.w_pos.unwrap_or(nd.w_pos),
            w_heading: nm.w_heading.unwrap_or(nd.w_heading),
            w_vel: nm.w_vel.unwrap_or(nd.w_vel),
            w_ctrl: nm.w_ctrl.unwrap_or(nd.w_ctrl),
            w_rate: nm.w_rate.unwrap_or(nd.w_rate),
            max_iters: nm.max_iters.unwrap_or(nd.max_iters),
            grad_tol: nm.grad_tol.unwrap_or(nd.grad_tol),
        };

        Ok(cfg)
    }

    fn trajectory_from(
        t: TrajectorySection,
        config_path: &Path,
    ) -> Result<TrajectoryChoice, HarnessError> {
        let duration = t.duration.unwrap_or(35.0);
        let speed = t.speed.unwrap_or(0.3);
        let mut spec = match t.kind.as_str() {
            "sinusoid" => TrajectorySpec::sinusoid(
                t.amplitude.unwrap_or(1.0),
                t.period.unwrap_or(8.0),
                speed,
                duration,
            ),
            "line" => TrajectorySpec::line(speed, duration),
            "c_curve" => TrajectorySpec::c_curve(t.amplitude.unwrap_or(3.0), speed, duration),
            "csv" => {
                let rel = t.csv.ok_or_else(|| {
                    HarnessError::Config("trajectory.kind = \"csv\" requires trajectory.csv".into())
                })?;
                let resolved = if rel.is_absolute() {
                    rel
                } else {
                    config_path.parent().unwrap_or(Path::new(".")).join(rel)
                };
                return Ok(TrajectoryChoice::Csv(resolved));
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown trajectory kind `{other}` (sinusoid | line | c_curve | csv)"
                )))
            }
        };
        spec.phase = t.phase.unwrap_or(0.0);
        spec.x0 = t.x0.unwrap_or(0.0);
        spec.y0 = t.y0.unwrap_or(0.0);
        spec.rotation = t.rotation_deg.map(deg).unwrap_or(0.0);
        if !spec.is_valid() {
            return Err(HarnessError::Config("invalid trajectory parameters".into()));
        }
        Ok(TrajectoryChoice::Analytic(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_str(text: &str) -> Result<WorkbenchConfig, HarnessError> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        WorkbenchConfig::load(f.path()).map(|(c, _)| c)
    }

    #[test]
    fn empty_config_gives_identified_defaults() {
        let cfg = load_str("").unwrap();
        assert_eq!(cfg.env.model.m11, 12.0);
        assert_eq!(cfg.env.model.d33, 1.35);
        assert_eq!(cfg.env.episode.dt, 0.1);
        assert_eq!(cfg.env.reward.k4, 0.033);
        assert_eq!(cfg.ddpg.hidden_width, 300);
        assert!(cfg.disturbance.wind.is_none());
    }

    #[test]
    fn flat_model_keys_override() {
        let cfg = load_str("m11 = 10.0\nf_max = 2.5\ndt = 0.05\n").unwrap();
        assert_eq!(cfg.env.model.m11, 10.0);
        assert_eq!(cfg.env.model.f_max, 2.5);
        assert_eq!(cfg.env.episode.dt, 0.05);
    }

    #[test]
    fn disturbance_sections_enable_processes() {
        let cfg = load_str(
            "[wind]\nspeed_knots = 4.0\ndirection_deg = 90.0\n\n[wave]\ncap_N = 1.0\n\n[current]\ncap_mps = 0.2\nsigma = 0.03\n",
        )
        .unwrap();
        let wind = cfg.disturbance.wind.unwrap();
        assert!((wind.v_w - 2.0578).abs() < 1e-3);
        assert!((wind.beta_wind - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(cfg.disturbance.wave.unwrap().f_cap, 1.0);
        let current = cfg.disturbance.current.unwrap();
        assert_eq!(current.v_cap, 0.2);
        assert_eq!(current.sigma_c, 0.03);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = load_str("m99 = 4.0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
        let err = load_str("[reward]\nk9 = 1.0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn invalid_model_is_rejected() {
        let err = load_str("m11 = -3.0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn trajectory_kinds_parse() {
        let cfg = load_str(
            "[trajectory]\nkind = \"sinusoid\"\namplitude = 1.0\nperiod = 8.0\nspeed = 0.3\nduration = 35.0\n",
        )
        .unwrap();
        match cfg.trajectory.unwrap() {
            TrajectoryChoice::Analytic(s) => {
                assert_eq!(s.amplitude, 1.0);
                assert_eq!(s.duration, 35.0);
            }
            _ => panic!("expected analytic trajectory"),
        }
        let err = load_str("[trajectory]\nkind = \"zigzag\"\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }
}
