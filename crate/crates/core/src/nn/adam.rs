//! Bias-corrected adaptive moment optimizer.

use alloc::vec;
use alloc::vec::Vec;

use super::mlp::{Grads, Mlp};
use crate::fmath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamParams {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Optimizer state: first/second moment per parameter plus the step count.
#[derive(Debug, Clone)]
pub struct Adam {
    pub params: AdamParams,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    pub fn new(net: &Mlp, params: AdamParams) -> Self {
        let sizes: Vec<usize> = net
            .layers
            .iter()
            .flat_map(|l| [l.w.rows() * l.w.cols(), l.b.len()])
            .collect();
        Self {
            params,
            m: sizes.iter().map(|s| vec![0.0; *s]).collect(),
            v: sizes.iter().map(|s| vec![0.0; *s]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update of every weight and bias from the matching gradients.
    pub fn step(&mut self, net: &mut Mlp, grads: &Grads) {
        assert_eq!(grads.layers.len(), net.layers.len());
        self.t += 1;
        let t = self.t as i32;
        let AdamParams {
            lr,
            beta1,
            beta2,
            eps,
        } = self.params;
        let bc1 = 1.0 - libm::pow(beta1, t as f64);
        let bc2 = 1.0 - libm::pow(beta2, t as f64);

        let mut slot = 0;
        for (layer, (gw, gb)) in net.layers.iter_mut().zip(&grads.layers) {
            let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    p[i] -= lr * m_hat / (fmath::sqrt(v_hat) + eps);
                }
            };
            update(
                layer.w.as_mut_slice(),
                gw.as_slice(),
                &mut self.m[slot],
                &mut self.v[slot],
            );
            update(&mut layer.b, gb, &mut self.m[slot + 1], &mut self.v[slot + 1]);
            slot += 2;
        }
    }
}
