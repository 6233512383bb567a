//! Reference trajectories and line-of-sight guidance.
//!
//! A trajectory provides the full desired state `q_d(t) = [x_d, y_d, psi_d,
//! u_d, v_d, w_d]` with analytic time derivatives, so the desired heading is
//! the path tangent, `u_d` the instantaneous path speed, `v_d = 0` and `w_d`
//! the tangent-angle rate. The sight heading `psi_s` points from the vessel
//! to a lookahead point `L` metres forward along the tangent and replaces the
//! reference heading inside the reward.

use alloc::vec::Vec;

use crate::fmath;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GuidanceError {
    #[error("sample time {t} outside [0, {duration}]")]
    OutOfRange { t: f64, duration: f64 },
    #[error("sampled trajectory has no rows")]
    Empty,
}

/// Desired state at one instant, plus the path-tangent direction used by the
/// LOS geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub x_d: f64,
    pub y_d: f64,
    /// Desired heading [rad], wrapped; equals the path tangent.
    pub psi_d: f64,
    pub u_d: f64,
    pub v_d: f64,
    pub w_d: f64,
    /// Path tangent direction [rad], wrapped.
    pub tangent: f64,
}

/// Anything that can be tracked: analytic trajectory specs and trajectories
/// resampled from logged rows.
pub trait ReferencePath {
    fn duration(&self) -> f64;
    fn sample(&self, t: f64) -> Result<ReferenceSample, GuidanceError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Sinusoid,
    Line,
    CCurve,
}

/// Analytic reference trajectory.
///
/// All kinds are parameterized by horizontal progress at the nominal speed,
/// which keeps every derivative closed-form:
///
/// * `Sinusoid`: `y = amplitude * sin(2*pi*x / period + phase)` with
///   `x = speed * t`; the path speed `u_d` varies along the wave.
/// * `Line`: straight run along local +x at constant speed.
/// * `CCurve`: constant-curvature arc of radius `amplitude`, traversed at
///   constant speed (`phase` is ignored).
///
/// The local path is rotated by `rotation` and shifted by `(x0, y0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Wave amplitude, or arc radius for `CCurve` [m].
    pub amplitude: f64,
    /// Spatial period of the sinusoid [m].
    pub period: f64,
    /// Nominal speed [m/s].
    pub speed: f64,
    pub duration: f64,
    /// Phase offset of the sinusoid [rad].
    pub phase: f64,
    /// World position of the path start.
    pub x0: f64,
    pub y0: f64,
    /// World rotation of the whole path [rad].
    pub rotation: f64,
}

impl TrajectorySpec {
    pub fn sinusoid(amplitude: f64, period: f64, speed: f64, duration: f64) -> Self {
        Self {
            kind: TrajectoryKind::Sinusoid,
            amplitude,
            period,
            speed,
            duration,
            phase: 0.0,
            x0: 0.0,
            y0: 0.0,
            rotation: 0.0,
        }
    }

    pub fn line(speed: f64, duration: f64) -> Self {
        Self {
            kind: TrajectoryKind::Line,
            amplitude: 0.0,
            period: 1.0,
            speed,
            duration,
            phase: 0.0,
            x0: 0.0,
            y0: 0.0,
            rotation: 0.0,
        }
    }

    pub fn c_curve(radius: f64, speed: f64, duration: f64) -> Self {
        Self {
            kind: TrajectoryKind::CCurve,
            amplitude: radius,
            period: 1.0,
            speed,
            duration,
            phase: 0.0,
            x0: 0.0,
            y0: 0.0,
            rotation: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.duration > 0.0
            && self.speed > 0.0
            && self.amplitude >= 0.0
            && (self.kind != TrajectoryKind::Sinusoid || self.period > 0.0)
            && (self.kind != TrajectoryKind::CCurve || self.amplitude > 0.0)
    }

    /// Local-frame position, velocity and tangent rate at time `t`.
    fn local(&self, t: f64) -> ([f64; 2], [f64; 2], f64) {
        match self.kind {
            TrajectoryKind::Line => ([self.speed * t, 0.0], [self.speed, 0.0], 0.0),
            TrajectoryKind::Sinusoid => {
                let k = fmath::TWO_PI / self.period;
                let x = self.speed * t;
                let arg = k * x + self.phase;
                let pos = [x, self.amplitude * fmath::sin(arg)];
                let vel = [self.speed, self.amplitude * k * self.speed * fmath::cos(arg)];
                // Tangent-angle rate: d/dt atan(g) with g = A k cos(arg).
                let g = self.amplitude * k * fmath::cos(arg);
                let g_dot = -self.amplitude * k * k * self.speed * fmath::sin(arg);
                let w = g_dot / (1.0 + g * g);
                (pos, vel, w)
            }
            TrajectoryKind::CCurve => {
                let rate = self.speed / self.amplitude;
                let alpha = rate * t;
                let pos = [
                    self.amplitude * fmath::sin(alpha),
                    self.amplitude * (1.0 - fmath::cos(alpha)),
                ];
                let vel = [self.speed * fmath::cos(alpha), self.speed * fmath::sin(alpha)];
                (pos, vel, rate)
            }
        }
    }
}

impl ReferencePath for TrajectorySpec {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn sample(&self, t: f64) -> Result<ReferenceSample, GuidanceError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(GuidanceError::OutOfRange {
                t,
                duration: self.duration,
            });
        }
        let (pos, vel, w_d) = self.local(t);
        let (sr, cr) = (fmath::sin(self.rotation), fmath::cos(self.rotation));
        let x_d = self.x0 + cr * pos[0] - sr * pos[1];
        let y_d = self.y0 + sr * pos[0] + cr * pos[1];
        let vx = cr * vel[0] - sr * vel[1];
        let vy = sr * vel[0] + cr * vel[1];
        let tangent = fmath::wrap_angle(fmath::atan2(vy, vx));
        Ok(ReferenceSample {
            x_d,
            y_d,
            psi_d: tangent,
            u_d: fmath::hypot(vel[0], vel[1]),
            v_d: 0.0,
            w_d,
            tangent,
        })
    }
}

/// One row of a resampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub t: f64,
    pub x_d: f64,
    pub y_d: f64,
    pub psi_d: f64,
    pub u_d: f64,
    pub v_d: f64,
    pub w_d: f64,
}

/// Trajectory built from timestamped rows, linearly interpolated (headings
/// interpolate along the shortest wrapped arc).
#[derive(Debug, Clone)]
pub struct SampledTrajectory {
    rows: Vec<ReferenceRow>,
}

impl SampledTrajectory {
    /// Rows must be sorted by strictly increasing `t`, starting at `t = 0`.
    pub fn new(rows: Vec<ReferenceRow>) -> Result<Self, GuidanceError> {
        if rows.is_empty() {
            return Err(GuidanceError::Empty);
        }
        Ok(Self { rows })
    }

    fn interpolated(&self, t: f64) -> ReferenceSample {
        let rows = &self.rows;
        let idx = rows.partition_point(|r| r.t <= t);
        let sample_of = |r: &ReferenceRow| ReferenceSample {
            x_d: r.x_d,
            y_d: r.y_d,
            psi_d: fmath::wrap_angle(r.psi_d),
            u_d: r.u_d,
            v_d: r.v_d,
            w_d: r.w_d,
            tangent: tangent_of(r.psi_d, r.u_d, r.v_d),
        };
        if idx == 0 {
            return sample_of(&rows[0]);
        }
        if idx >= rows.len() {
            return sample_of(&rows[rows.len() - 1]);
        }
        let (a, b) = (&rows[idx - 1], &rows[idx]);
        let f = (t - a.t) / (b.t - a.t);
        let lerp = |p: f64, q: f64| p + f * (q - p);
        let psi_d = fmath::wrap_angle(a.psi_d + f * fmath::wrap_angle_diff(b.psi_d, a.psi_d));
        let (u_d, v_d) = (lerp(a.u_d, b.u_d), lerp(a.v_d, b.v_d));
        ReferenceSample {
            x_d: lerp(a.x_d, b.x_d),
            y_d: lerp(a.y_d, b.y_d),
            psi_d,
            u_d,
            v_d,
            w_d: lerp(a.w_d, b.w_d),
            tangent: tangent_of(psi_d, u_d, v_d),
        }
    }
}

/// Direction of the inertial desired velocity; falls back to the desired
/// heading when the reference is nearly stationary.
fn tangent_of(psi_d: f64, u_d: f64, v_d: f64) -> f64 {
    if fmath::hypot(u_d, v_d) < 1e-9 {
        fmath::wrap_angle(psi_d)
    } else {
        let vx = fmath::cos(psi_d) * u_d - fmath::sin(psi_d) * v_d;
        let vy = fmath::sin(psi_d) * u_d + fmath::cos(psi_d) * v_d;
        fmath::wrap_angle(fmath::atan2(vy, vx))
    }
}

impl ReferencePath for SampledTrajectory {
    fn duration(&self) -> f64 {
        self.rows.last().map(|r| r.t).unwrap_or(0.0)
    }

    fn sample(&self, t: f64) -> Result<ReferenceSample, GuidanceError> {
        let duration = self.duration();
        if !(0.0..=duration).contains(&t) {
            return Err(GuidanceError::OutOfRange { t, duration });
        }
        Ok(self.interpolated(t))
    }
}

/// Sight heading: bearing from the vessel at `current_pos` to the point `L`
/// metres forward along the tangent at the reference position.
///
/// If the vessel sits exactly on the sight point the bearing is undefined and
/// the path tangent is returned instead.
pub fn sight_heading(
    path: &dyn ReferencePath,
    t: f64,
    current_pos: (f64, f64),
    lookahead: f64,
) -> Result<f64, GuidanceError> {
    assert!(lookahead > 0.0, "lookahead must be positive");
    let r = path.sample(t)?;
    let xs = r.x_d + lookahead * fmath::cos(r.tangent);
    let ys = r.y_d + lookahead * fmath::sin(r.tangent);
    let (dx, dy) = (xs - current_pos.0, ys - current_pos.1);
    if fmath::hypot(dx, dy) < 1e-12 {
        Ok(r.tangent)
    } else {
        Ok(fmath::wrap_angle(fmath::atan2(dy, dx)))
    }
}

/// Uniform ranges for the randomized training trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRanges {
    pub amplitude: (f64, f64),
    pub period: (f64, f64),
    pub speed: (f64, f64),
    pub duration: f64,
}

impl Default for TrainingRanges {
    fn default() -> Self {
        Self {
            amplitude: (0.5, 2.0),
            period: (4.0, 12.0),
            speed: (0.2, 0.5),
            duration: 30.0,
        }
    }
}

/// Draws a random training sinusoid; deterministic under a seeded `rng`.
pub fn training_sampler<R: rand::Rng>(rng: &mut R, ranges: &TrainingRanges) -> TrajectorySpec {
    let amplitude = rng.random_range(ranges.amplitude.0..=ranges.amplitude.1);
    let period = rng.random_range(ranges.period.0..=ranges.period.1);
    let speed = rng.random_range(ranges.speed.0..=ranges.speed.1);
    TrajectorySpec::sinusoid(amplitude, period, speed, ranges.duration)
}
