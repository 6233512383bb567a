//! 3-DOF surface-vessel dynamics: surge, sway, yaw.
//!
//! The plant is
//!
//! ```text
//! eta_dot = T(psi) * v
//! v_dot   = M^-1 * (tau + tau_env) - M^-1 * (C(v) + D) * v
//! ```
//!
//! with `eta = [x, y, psi]`, `v = [u, v, w]`, diagonal added-mass matrix
//! `M = diag(m11, m22, m33)`, linear diagonal drag `D = diag(d11, d22, d33)`,
//! and the skew-symmetric Coriolis matrix `C(v)` derived from `M`. The four
//! thrusters map to a body wrench through the allocation matrix `B`. The same
//! model drives training episodes, NMPC prediction, and evaluation.

use nalgebra::{Matrix3, Vector3, Vector6};

use crate::fmath;

/// Net force/torque on the three body axes: `[tau_u, tau_v, tau_w]`.
pub type BodyWrench = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    /// The integrator produced a non-finite state, usually a sign that the
    /// time step or the applied forces are far outside the model's regime.
    #[error("model explosion: non-finite state while integrating")]
    ModelExplosion,
}

/// Full vessel state `q = [x, y, psi, u, v, w]`.
///
/// Pose is in the inertial frame, velocities in the body frame. The heading
/// is kept wrapped to `(-pi, pi]` by every constructor and integrator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselState {
    /// East position [m].
    pub x: f64,
    /// North position [m].
    pub y: f64,
    /// Heading [rad], wrapped to (-pi, pi].
    pub psi: f64,
    /// Surge velocity [m/s].
    pub u: f64,
    /// Sway velocity [m/s].
    pub v: f64,
    /// Yaw rate [rad/s].
    pub w: f64,
}

impl VesselState {
    pub fn new(x: f64, y: f64, psi: f64, u: f64, v: f64, w: f64) -> Self {
        Self {
            x,
            y,
            psi: fmath::wrap_angle(psi),
            u,
            v,
            w,
        }
    }

    pub fn zeros() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn body_velocity(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.w)
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x, self.y, self.psi, self.u, self.v, self.w)
    }

    /// Rebuilds a state from a raw 6-vector, wrapping the heading.
    pub fn from_vector(q: &Vector6<f64>) -> Self {
        Self::new(q[0], q[1], q[2], q[3], q[4], q[5])
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|c| c.is_finite())
    }
}

/// Four thruster forces `[f1, f2, f3, f4]` in newtons: left, right,
/// anterior, rear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThrustCommand {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl ThrustCommand {
    pub fn new(f1: f64, f2: f64, f3: f64, f4: f64) -> Self {
        Self { f1, f2, f3, f4 }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }

    pub fn from_array(f: [f64; 4]) -> Self {
        Self::new(f[0], f[1], f[2], f[3])
    }

    /// Saturates every thruster to `[-f_max, f_max]`.
    pub fn clamped(&self, f_max: f64) -> Self {
        Self::new(
            fmath::clamp(self.f1, -f_max, f_max),
            fmath::clamp(self.f2, -f_max, f_max),
            fmath::clamp(self.f3, -f_max, f_max),
            fmath::clamp(self.f4, -f_max, f_max),
        )
    }

    pub fn within(&self, f_max: f64) -> bool {
        self.as_array().iter().all(|f| fmath::abs(*f) <= f_max)
    }
}

/// Identified model parameters plus thruster geometry and saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    /// Added mass / inertia diagonal [kg, kg, kg m^2].
    pub m11: f64,
    pub m22: f64,
    pub m33: f64,
    /// Linear drag diagonal [kg/s, kg/s, kg m^2/s].
    pub d11: f64,
    pub d22: f64,
    pub d33: f64,
    /// Transverse thruster separation [m].
    pub a: f64,
    /// Longitudinal thruster separation [m].
    pub b: f64,
    /// Per-thruster saturation bound [N].
    pub f_max: f64,
}

impl Default for ModelParameters {
    /// Identified values for the 0.90 x 0.45 m hull, with the thruster
    /// separations taken from the hull dimensions and a 4 N saturation.
    fn default() -> Self {
        Self {
            m11: 12.0,
            m22: 24.0,
            m33: 1.5,
            d11: 6.0,
            d22: 8.0,
            d33: 1.35,
            a: 0.45,
            b: 0.90,
            f_max: 4.0,
        }
    }
}

impl ModelParameters {
    pub fn is_valid(&self) -> bool {
        let positives = [
            self.m11, self.m22, self.m33, self.d11, self.d22, self.d33, self.a, self.b,
            self.f_max,
        ];
        positives.iter().all(|p| p.is_finite() && *p > 0.0)
    }

    pub fn mass_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.m11, self.m22, self.m33))
    }

    pub fn drag_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.d11, self.d22, self.d33))
    }
}

/// Rotation taking body-frame vectors to the inertial frame at heading `psi`.
pub fn rotation_to_inertial(psi: f64) -> Matrix3<f64> {
    let (s, c) = (fmath::sin(psi), fmath::cos(psi));
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Coriolis/centripetal matrix for the diagonal-mass model; skew-symmetric
/// for every velocity.
pub fn coriolis(params: &ModelParameters, vel: &Vector3<f64>) -> Matrix3<f64> {
    let (u, v) = (vel[0], vel[1]);
    let m11u = params.m11 * u;
    let m22v = params.m22 * v;
    Matrix3::new(0.0, 0.0, -m22v, 0.0, 0.0, m11u, m22v, -m11u, 0.0)
}

/// Maps the four thruster forces onto the body wrench:
/// `tau = [f1+f2, f3+f4, (a/2)(f1-f2) + (b/2)(f3-f4)]`.
pub fn allocate(params: &ModelParameters, cmd: &ThrustCommand) -> BodyWrench {
    Vector3::new(
        cmd.f1 + cmd.f2,
        cmd.f3 + cmd.f4,
        0.5 * params.a * (cmd.f1 - cmd.f2) + 0.5 * params.b * (cmd.f3 - cmd.f4),
    )
}

/// Time derivative of the full state under thrust `cmd` and environmental
/// wrench `tau_env`.
pub fn state_derivative(
    params: &ModelParameters,
    state: &VesselState,
    cmd: &ThrustCommand,
    tau_env: &BodyWrench,
) -> Result<Vector6<f64>, DynamicsError> {
    let vel = state.body_velocity();
    let tau = allocate(params, cmd) + tau_env;
    let eta_dot = rotation_to_inertial(state.psi) * vel;
    let damping = (coriolis(params, &vel) + params.drag_matrix()) * vel;
    let accel = Vector3::new(
        (tau[0] - damping[0]) / params.m11,
        (tau[1] - damping[1]) / params.m22,
        (tau[2] - damping[2]) / params.m33,
    );

    let deriv = Vector6::new(eta_dot[0], eta_dot[1], eta_dot[2], accel[0], accel[1], accel[2]);
    if deriv.iter().all(|c| c.is_finite()) {
        Ok(deriv)
    } else {
        Err(DynamicsError::ModelExplosion)
    }
}

/// Classical RK4 step with zero-order hold on `cmd` and `tau_env`; the
/// heading is re-wrapped afterward.
pub fn step_rk4(
    params: &ModelParameters,
    state: &VesselState,
    cmd: &ThrustCommand,
    tau_env: &BodyWrench,
    dt: f64,
) -> Result<VesselState, DynamicsError> {
    assert!(dt > 0.0, "time step must be positive");
    let q = state.to_vector();
    let eval = |q: &Vector6<f64>| {
        state_derivative(params, &VesselState::from_vector_unwrapped(q), cmd, tau_env)
    };

    let k1 = eval(&q)?;
    let k2 = eval(&(q + 0.5 * dt * k1))?;
    let k3 = eval(&(q + 0.5 * dt * k2))?;
    let k4 = eval(&(q + dt * k3))?;
    let next = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    let next = VesselState::from_vector(&next);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(DynamicsError::ModelExplosion)
    }
}

impl VesselState {
    /// Internal constructor for integrator stages: keeps the raw heading so
    /// intermediate RK stages stay on a continuous branch.
    fn from_vector_unwrapped(q: &Vector6<f64>) -> Self {
        Self {
            x: q[0],
            y: q[1],
            psi: q[2],
            u: q[3],
            v: q[4],
            w: q[5],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> ModelParameters {
        ModelParameters::default()
    }

    #[test]
    fn rotation_at_zero_heading_is_identity() {
        let t = rotation_to_inertial(0.0);
        assert_eq!(t, Matrix3::identity());
    }

    #[test]
    fn rotation_quarter_turn_maps_surge_to_north() {
        let t = rotation_to_inertial(fmath::PI / 2.0);
        let inertial = t * Vector3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(inertial[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(inertial[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let t = rotation_to_inertial(0.3);
        let should_be_identity = t * t.transpose();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(fmath::abs(should_be_identity[(i, j)] - expect) < 1e-12);
            }
        }
        assert_relative_eq!(t.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coriolis_at_rest_is_zero() {
        let c = coriolis(&params(), &Vector3::zeros());
        assert_eq!(c, Matrix3::zeros());
    }

    #[test]
    fn coriolis_matches_adopted_form() {
        let c = coriolis(&params(), &Vector3::new(1.0, 0.5, 0.0));
        assert_eq!(c[(0, 2)], -12.0);
        assert_eq!(c[(1, 2)], 12.0);
    }

    #[test]
    fn allocate_symmetric_pair_cancels_moment() {
        let tau = allocate(&params(), &ThrustCommand::new(1.0, 1.0, 0.0, 0.0));
        assert_eq!(tau, Vector3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn allocate_null_input() {
        let tau = allocate(&params(), &ThrustCommand::zeros());
        assert_eq!(tau, Vector3::zeros());
    }

    #[test]
    fn allocate_single_left_thruster() {
        let tau = allocate(&params(), &ThrustCommand::new(1.0, 0.0, 0.0, 0.0));
        assert_relative_eq!(tau[0], 1.0);
        assert_relative_eq!(tau[1], 0.0);
        assert_relative_eq!(tau[2], 0.225, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_has_zero_derivative() {
        let d = state_derivative(
            &params(),
            &VesselState::zeros(),
            &ThrustCommand::zeros(),
            &Vector3::zeros(),
        )
        .unwrap();
        assert_eq!(d, Vector6::zeros());
    }

    #[test]
    fn thrust_from_rest_accelerates_surge() {
        let d = state_derivative(
            &params(),
            &VesselState::zeros(),
            &ThrustCommand::new(1.0, 1.0, 0.0, 0.0),
            &Vector3::zeros(),
        )
        .unwrap();
        assert_relative_eq!(d[3], 2.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn pure_drag_decay_rate() {
        let state = VesselState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let d = state_derivative(&params(), &state, &ThrustCommand::zeros(), &Vector3::zeros())
            .unwrap();
        assert_relative_eq!(d[3], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn rest_is_a_fixed_point_of_rk4() {
        let next = step_rk4(
            &params(),
            &VesselState::zeros(),
            &ThrustCommand::zeros(),
            &Vector3::zeros(),
            0.1,
        )
        .unwrap();
        assert_eq!(next, VesselState::zeros());
    }

    #[test]
    fn surge_decay_matches_analytic_exponential_at_order_four() {
        // u' = -(d11/m11) u has the exact solution u0 * exp(-t/2).
        let p = params();
        let u0 = 1.0;
        let horizon = 1.0;
        let mut errors = [0.0_f64; 2];
        for (idx, steps) in [10_usize, 20].iter().enumerate() {
            let dt = horizon / *steps as f64;
            let mut state = VesselState::new(0.0, 0.0, 0.0, u0, 0.0, 0.0);
            for _ in 0..*steps {
                state =
                    step_rk4(&p, &state, &ThrustCommand::zeros(), &Vector3::zeros(), dt).unwrap();
            }
            errors[idx] = fmath::abs(state.u - u0 * fmath::exp(-0.5 * horizon));
        }
        let order = fmath::ln(errors[0] / errors[1]) / fmath::ln(2.0);
        assert!(
            (3.8..=4.2).contains(&order),
            "observed order {order}, errors {errors:?}"
        );
    }

    #[test]
    fn rk4_matches_fine_step_euler_oracle() {
        // Independent integrator: forward Euler with 1000 substeps per step.
        let p = params();
        let state = VesselState::new(0.2, -0.1, 0.4, 0.3, -0.05, 0.05);
        let cmd = ThrustCommand::new(0.6, 0.3, 0.1, 0.1);
        let tau_env = Vector3::new(0.05, -0.02, 0.005);
        let dt = 0.1;

        let rk4 = step_rk4(&p, &state, &cmd, &tau_env, dt).unwrap();

        let sub = dt / 1000.0;
        let mut q = state.to_vector();
        for _ in 0..1000 {
            let d = state_derivative(&p, &VesselState::from_vector_unwrapped(&q), &cmd, &tau_env)
                .unwrap();
            q += sub * d;
        }
        let euler = VesselState::from_vector(&q);

        for (a, b) in rk4.to_vector().iter().zip(euler.to_vector().iter()) {
            assert!(fmath::abs(a - b) < 1e-6, "rk4 {a} vs euler {b}");
        }
    }

    #[test]
    fn unforced_kinetic_energy_is_non_increasing() {
        let p = params();
        let ke = |s: &VesselState| {
            0.5 * (p.m11 * s.u * s.u + p.m22 * s.v * s.v + p.m33 * s.w * s.w)
        };
        let mut state = VesselState::new(0.0, 0.0, 1.0, 0.8, -0.4, 0.6);
        let mut prev = ke(&state);
        for _ in 0..500 {
            state = step_rk4(&p, &state, &ThrustCommand::zeros(), &Vector3::zeros(), 0.1).unwrap();
            let now = ke(&state);
            assert!(now <= prev + 1e-12, "energy rose from {prev} to {now}");
            prev = now;
        }
    }

    #[test]
    fn heading_stays_wrapped_across_steps() {
        let p = params();
        let mut state = VesselState::new(0.0, 0.0, 3.0, 0.0, 0.0, 1.5);
        for _ in 0..200 {
            state = step_rk4(&p, &state, &ThrustCommand::zeros(), &Vector3::zeros(), 0.1).unwrap();
            assert!(state.psi > -fmath::PI && state.psi <= fmath::PI);
        }
    }

    #[test]
    fn clamp_respects_saturation() {
        let cmd = ThrustCommand::new(5.0, -7.0, 1.0, 3.9).clamped(4.0);
        assert_eq!(cmd, ThrustCommand::new(4.0, -4.0, 1.0, 3.9));
        assert!(cmd.within(4.0));
    }

    proptest! {
        #[test]
        fn coriolis_is_skew_symmetric(u in -2.0f64..2.0, v in -2.0f64..2.0, w in -2.0f64..2.0) {
            let c = coriolis(&params(), &Vector3::new(u, v, w));
            let sum = c + c.transpose();
            prop_assert!(sum.iter().all(|e| *e == 0.0));
        }

        #[test]
        fn coriolis_does_no_work(u in -2.0f64..2.0, v in -2.0f64..2.0, w in -2.0f64..2.0) {
            let vel = Vector3::new(u, v, w);
            let c = coriolis(&params(), &vel);
            prop_assert!(fmath::abs(vel.dot(&(c * vel))) < 1e-12);
        }

        #[test]
        fn rotation_orthonormal_everywhere(psi in -10.0f64..10.0) {
            let t = rotation_to_inertial(psi);
            let id = t * t.transpose();
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!(fmath::abs(id[(i, j)] - expect) < 1e-12);
                }
            }
        }

        #[test]
        fn allocation_is_linear(
            f in proptest::array::uniform4(-4.0f64..4.0),
            g in proptest::array::uniform4(-4.0f64..4.0),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let p = params();
            let fa = ThrustCommand::from_array(f);
            let ga = ThrustCommand::from_array(g);
            let mixed = ThrustCommand::new(
                alpha * f[0] + beta * g[0],
                alpha * f[1] + beta * g[1],
                alpha * f[2] + beta * g[2],
                alpha * f[3] + beta * g[3],
            );
            let lhs = allocate(&p, &mixed);
            let rhs = alpha * allocate(&p, &fa) + beta * allocate(&p, &ga);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
