//! Stochastic wind, wave, and current disturbances.
//!
//! The three processes compose into the environmental wrench
//!
//! ```text
//! tau_env = tau_wind + tau_wave + (C(v_c) + D) * v_c
//! ```
//!
//! Wind is quasi-steady and quadratic in the relative wind speed with
//! low-order coefficient curves. Waves combine a second-order shaping filter
//! per channel (zero-mean oscillatory part) with a slowly drifting offset,
//! projected onto the body axes by the wave direction. The current speed is
//! a clamped Gauss-Markov process. Each stochastic process owns a dedicated
//! seeded noise stream, so runs reproduce bit-for-bit and disabling one
//! component never shifts another's realization.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{coriolis, BodyWrench, ModelParameters, VesselState};
use crate::fmath;

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(rand_distr::StandardNormal)
}

/// Quasi-steady wind over the hull.
///
/// Coefficient curves follow the usual low-order shapes
/// `C_X = -cx cos(g)`, `C_Y = cy sin(g)`, `C_N = cn sin(2 g)` over the
/// relative-wind angle `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindModel {
    /// Wind speed [m/s].
    pub v_w: f64,
    /// Direction the wind blows toward [rad, inertial].
    pub beta_wind: f64,
    /// Air density [kg/m^3].
    pub rho_a: f64,
    /// Projected frontal area [m^2].
    pub a_fw: f64,
    /// Projected lateral area [m^2].
    pub a_lw: f64,
    /// Vessel length overall [m].
    pub l_oa: f64,
    pub cx: f64,
    pub cy: f64,
    pub cn: f64,
}

impl Default for WindModel {
    /// A 4-knot breeze over the 0.90 m hull.
    fn default() -> Self {
        Self {
            v_w: 2.058,
            beta_wind: fmath::PI / 4.0,
            rho_a: 1.225,
            a_fw: 0.045,
            a_lw: 0.09,
            l_oa: 0.9,
            cx: 0.7,
            cy: 0.7,
            cn: 0.125,
        }
    }
}

/// Body wrench from the relative wind at the current state.
pub fn wind_wrench(model: &WindModel, state: &VesselState) -> BodyWrench {
    // Wind velocity in the body frame.
    let wx = model.v_w * fmath::cos(model.beta_wind - state.psi);
    let wy = model.v_w * fmath::sin(model.beta_wind - state.psi);
    // Vessel velocity relative to the air mass.
    let u_rw = state.u - wx;
    let v_rw = state.v - wy;
    let v_rel_sq = u_rw * u_rw + v_rw * v_rw;
    if v_rel_sq == 0.0 {
        return Vector3::zeros();
    }
    let gamma = -fmath::atan2(v_rw, u_rw);
    let pressure = 0.5 * model.rho_a * v_rel_sq;
    Vector3::new(
        pressure * (-model.cx * fmath::cos(gamma)) * model.a_fw,
        pressure * (model.cy * fmath::sin(gamma)) * model.a_lw,
        pressure * (model.cn * fmath::sin(2.0 * gamma)) * model.a_lw * model.l_oa,
    )
}

/// First-plus-second-order wave disturbance.
///
/// Each of the force and moment channels runs
/// `x1' = x2`, `x2' = -omega_e^2 x1 - 2 lambda_w omega_e x2 + k_w * noise`
/// plus a drifting offset integrating white noise; the channel output is
/// `x2 + drift`, saturated at `f_cap` (the moment channel at `n_cap`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveModel {
    /// Encounter peak frequency [rad/s].
    pub omega_e: f64,
    /// Relative damping of the shaping filter.
    pub lambda_w: f64,
    /// Noise gain of the shaping filter.
    pub k_w: f64,
    /// Wave propagation direction [rad, inertial].
    pub beta_wave: f64,
    /// Force saturation [N].
    pub f_cap: f64,
    /// Moment saturation [N m]; the force cap over a half-length lever arm.
    pub n_cap: f64,
    /// Intensity of the slow drift components.
    pub drift_sigma: f64,
    // Filter and drift states.
    pub xf1: f64,
    pub xf2: f64,
    pub xn1: f64,
    pub xn2: f64,
    pub d_f: f64,
    pub d_n: f64,
}

impl Default for WaveModel {
    fn default() -> Self {
        Self {
            omega_e: 1.2,
            lambda_w: 0.1,
            k_w: 0.2,
            beta_wave: fmath::PI / 6.0,
            f_cap: 1.0,
            n_cap: 0.45,
            drift_sigma: 0.01,
            xf1: 0.0,
            xf2: 0.0,
            xn1: 0.0,
            xn2: 0.0,
            d_f: 0.0,
            d_n: 0.0,
        }
    }
}

impl WaveModel {
    /// Standard deviation of the stationary oscillatory output,
    /// `k_w / sqrt(4 lambda_w omega_e)`.
    pub fn oscillatory_std(&self) -> f64 {
        self.k_w / fmath::sqrt(4.0 * self.lambda_w * self.omega_e)
    }
}

/// Advances both wave channels by `dt` and returns the body wrench
/// `[F cos(beta - psi), F sin(beta - psi), N]`.
pub fn wave_step<R: Rng>(
    model: &mut WaveModel,
    state: &VesselState,
    dt: f64,
    rng: &mut R,
) -> BodyWrench {
    assert!(dt > 0.0, "time step must be positive");
    let sq = fmath::sqrt(dt);
    let advance = |x1: &mut f64, x2: &mut f64, noise: f64, m: &WaveModel| {
        let dx1 = *x2;
        let dx2 = -m.omega_e * m.omega_e * *x1 - 2.0 * m.lambda_w * m.omega_e * *x2;
        *x1 += dt * dx1;
        *x2 += dt * dx2 + m.k_w * sq * noise;
    };

    let (nf, nf_drift, nn, nn_drift) = (
        standard_normal(rng),
        standard_normal(rng),
        standard_normal(rng),
        standard_normal(rng),
    );
    let snapshot = *model;
    advance(&mut model.xf1, &mut model.xf2, nf, &snapshot);
    model.d_f += snapshot.drift_sigma * sq * nf_drift;
    advance(&mut model.xn1, &mut model.xn2, nn, &snapshot);
    model.d_n += snapshot.drift_sigma * sq * nn_drift;

    let force = fmath::clamp(model.xf2 + model.d_f, -model.f_cap, model.f_cap);
    let moment = fmath::clamp(model.xn2 + model.d_n, -model.n_cap, model.n_cap);
    let rel = model.beta_wave - state.psi;
    Vector3::new(force * fmath::cos(rel), force * fmath::sin(rel), moment)
}

/// Gauss-Markov current speed with direction `beta_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentModel {
    /// Mean-reversion rate [1/s].
    pub mu_c: f64,
    /// White-noise intensity.
    pub sigma_c: f64,
    /// Current set direction [rad, inertial].
    pub beta_c: f64,
    /// Speed saturation [m/s].
    pub v_cap: f64,
    /// Current speed state [m/s].
    pub v_c: f64,
}

impl Default for CurrentModel {
    fn default() -> Self {
        Self {
            mu_c: 0.1,
            sigma_c: 0.045,
            beta_c: fmath::PI / 3.0,
            v_cap: 0.2,
            v_c: 0.0,
        }
    }
}

/// Euler-Maruyama update of the current speed, clamped to `[0, v_cap]`;
/// returns the body-frame current velocity at heading `psi`.
pub fn current_step<R: Rng>(
    model: &mut CurrentModel,
    psi: f64,
    dt: f64,
    rng: &mut R,
) -> Vector3<f64> {
    assert!(dt > 0.0, "time step must be positive");
    let noise = standard_normal(rng);
    model.v_c += -model.mu_c * model.v_c * dt + model.sigma_c * fmath::sqrt(dt) * noise;
    model.v_c = fmath::clamp(model.v_c, 0.0, model.v_cap);
    let rel = model.beta_c - psi;
    Vector3::new(
        model.v_c * fmath::cos(rel),
        model.v_c * fmath::sin(rel),
        0.0,
    )
}

/// Wrench the current exerts through the vessel's own Coriolis and drag
/// operators: `(C(v_c) + D) * v_c`.
pub fn current_wrench(params: &ModelParameters, v_c: &Vector3<f64>) -> BodyWrench {
    (coriolis(params, v_c) + params.drag_matrix()) * v_c
}

/// Bundle of enabled disturbance processes with their private noise streams.
#[derive(Debug, Clone)]
pub struct DisturbanceState {
    pub wind: Option<WindModel>,
    pub wave: Option<WaveModel>,
    pub current: Option<CurrentModel>,
    wave_rng: ChaCha8Rng,
    current_rng: ChaCha8Rng,
}

impl DisturbanceState {
    pub fn new(
        wind: Option<WindModel>,
        wave: Option<WaveModel>,
        current: Option<CurrentModel>,
        seed: u64,
    ) -> Self {
        let mut wave_rng = ChaCha8Rng::seed_from_u64(seed);
        wave_rng.set_stream(1);
        let mut current_rng = ChaCha8Rng::seed_from_u64(seed);
        current_rng.set_stream(2);
        Self {
            wind,
            wave,
            current,
            wave_rng,
            current_rng,
        }
    }

    pub fn none() -> Self {
        Self::new(None, None, None, 0)
    }

    pub fn is_enabled(&self) -> bool {
        self.wind.is_some() || self.wave.is_some() || self.current.is_some()
    }

    /// Advances every enabled process by `dt` and returns the total
    /// environmental wrench at the given state.
    pub fn step(&mut self, params: &ModelParameters, state: &VesselState, dt: f64) -> BodyWrench {
        let mut tau = Vector3::zeros();
        if let Some(wind) = &self.wind {
            tau += wind_wrench(wind, state);
        }
        if let Some(wave) = &mut self.wave {
            tau += wave_step(wave, state, dt, &mut self.wave_rng);
        }
        if let Some(current) = &mut self.current {
            let v_c = current_step(current, state.psi, dt, &mut self.current_rng);
            tau += current_wrench(params, &v_c);
        }
        tau
    }
}
