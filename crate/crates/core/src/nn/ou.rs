//! Ornstein-Uhlenbeck exploration noise: temporally correlated, mean-zero.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

/// One mean-reverting state per action dimension:
/// `x <- x + theta * (0 - x) * dt + sigma * sqrt(dt) * gaussian`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub theta: f64,
    pub sigma: f64,
    pub dt: f64,
    state: Vec<f64>,
}

impl OuNoise {
    pub fn new(dims: usize, theta: f64, sigma: f64, dt: f64) -> Self {
        assert!(theta > 0.0 && sigma >= 0.0 && dt > 0.0);
        Self {
            theta,
            sigma,
            dt,
            state: vec![0.0; dims],
        }
    }

    pub fn reset(&mut self) {
        self.state.fill(0.0);
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// Advances every dimension one step and returns the noise vector.
    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> &[f64] {
        let k = self.sigma * libm::sqrt(self.dt);
        for x in &mut self.state {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            *x += self.theta * (0.0 - *x) * self.dt + k * g;
        }
        &self.state
    }

    /// Stationary standard deviation `sigma / sqrt(2 theta)` of the
    /// continuous process.
    pub fn stationary_std(&self) -> f64 {
        self.sigma / libm::sqrt(2.0 * self.theta)
    }
}
