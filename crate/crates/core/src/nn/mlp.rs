//! Multilayer perceptron with hand-written forward/backward passes.
//!
//! Shapes follow the batched convention: inputs are `N x in`, weights
//! `in x out`, so a layer is `A_next = act(A * W + b)`. The backward pass
//! only needs post-activations (ReLU and tanh derivatives are recoverable
//! from their outputs), which keeps the cache small.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::linalg::{add_row_broadcast, column_sums, matmul, Mat, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(&self, m: &mut Mat) {
        match self {
            Activation::Relu => {
                for v in m.as_mut_slice() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for v in m.as_mut_slice() {
                    *v = libm::tanh(*v);
                }
            }
            Activation::Identity => {}
        }
    }

    /// Multiplies `delta` elementwise by the activation derivative, written
    /// in terms of the post-activation value `a`.
    fn backprop(&self, delta: &mut Mat, post: &Mat) {
        match self {
            Activation::Relu => {
                for (d, a) in delta.as_mut_slice().iter_mut().zip(post.as_slice()) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for (d, a) in delta.as_mut_slice().iter_mut().zip(post.as_slice()) {
                    *d *= 1.0 - a * a;
                }
            }
            Activation::Identity => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `in x out` weight matrix.
    pub w: Mat,
    pub b: Vec<f64>,
}

/// Per-layer gradients, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct Grads {
    pub layers: Vec<(Mat, Vec<f64>)>,
}

impl Grads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| (Mat::zeros(l.w.rows(), l.w.cols()), vec![0.0; l.b.len()]))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|(w, b)| w.is_finite() && b.iter().all(|v| v.is_finite()))
    }
}

/// Activations captured by a batched forward pass; `acts[0]` is the input,
/// `acts[i]` the post-activation output of layer `i - 1`.
#[derive(Debug, Clone)]
pub struct BatchCache {
    pub acts: Vec<Mat>,
}

impl BatchCache {
    pub fn output(&self) -> &Mat {
        self.acts.last().expect("cache always holds the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: Activation,
}

impl Mlp {
    /// Builds a network with uniform fan-in initialization on hidden layers
    /// and a small-uniform final layer so initial outputs sit near zero.
    pub fn new<R: Rng>(dims: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let bound = if i == last {
                    3e-3
                } else {
                    1.0 / libm::sqrt(fan_in as f64)
                };
                let w = Mat::from_fn(fan_in, fan_out, |_, _| rng.random_range(-bound..=bound));
                let b = (0..fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                Layer { w, b }
            })
            .collect();
        Self {
            layers,
            hidden,
            output,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().expect("non-empty").w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").w.cols()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.w.cols()));
        dims
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.w.rows() * l.w.cols() + l.b.len())
            .sum()
    }

    fn activation_for(&self, layer_idx: usize) -> Activation {
        if layer_idx + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    /// Batched forward pass keeping every post-activation for backprop.
    pub fn forward_batch(&self, input: &Mat) -> BatchCache {
        assert_eq!(
            input.cols(),
            self.input_dim(),
            "input width {} does not match network input {}",
            input.cols(),
            self.input_dim()
        );
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = matmul(acts.last().unwrap(), Op::None, &layer.w, Op::None);
            add_row_broadcast(&mut z, &layer.b);
            self.activation_for(i).apply(&mut z);
            acts.push(z);
        }
        BatchCache { acts }
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let x = Mat::from_vec(1, input.len(), input.to_vec());
        let cache = self.forward_batch(&x);
        cache.output().row(0).to_vec()
    }

    /// Backpropagates `d_out = dLoss/dOutput` through the cached pass.
    ///
    /// Returns parameter gradients (unless skipped) and the loss gradient
    /// with respect to the input, which the policy-gradient chain needs.
    pub fn backward_batch(
        &self,
        cache: &BatchCache,
        d_out: &Mat,
        want_param_grads: bool,
    ) -> (Option<Grads>, Mat) {
        assert_eq!(cache.acts.len(), self.layers.len() + 1);
        let out = cache.output();
        assert_eq!(d_out.rows(), out.rows());
        assert_eq!(d_out.cols(), out.cols());

        let mut grads = want_param_grads.then(|| Grads {
            layers: Vec::with_capacity(self.layers.len()),
        });

        let mut delta = d_out.clone();
        self.output.backprop(&mut delta, out);

        for (i, layer) in self.layers.iter().enumerate().rev() {
            if let Some(g) = grads.as_mut() {
                let dw = matmul(&cache.acts[i], Op::Transpose, &delta, Op::None);
                let db = column_sums(&delta);
                g.layers.push((dw, db));
            }
            let mut d_prev = matmul(&delta, Op::None, &layer.w, Op::Transpose);
            if i > 0 {
                self.activation_for(i - 1).backprop(&mut d_prev, &cache.acts[i]);
            }
            delta = d_prev;
        }

        if let Some(g) = grads.as_mut() {
            g.layers.reverse();
        }
        (grads, delta)
    }

    /// Soft update `theta' <- tau * theta + (1 - tau) * theta'`.
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) {
        assert_eq!(self.layers.len(), online.layers.len());
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            for (tv, ov) in t.w.as_mut_slice().iter_mut().zip(o.w.as_slice()) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
            for (tv, ov) in t.b.iter_mut().zip(&o.b) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.is_finite() && l.b.iter().all(|v| v.is_finite()))
    }

    /// Distance between parameter vectors, for contraction checks.
    pub fn param_distance(&self, other: &Mlp) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.layers.iter().zip(&other.layers) {
            for (x, y) in a.w.as_slice().iter().zip(b.w.as_slice()) {
                acc += (x - y) * (x - y);
            }
            for (x, y) in a.b.iter().zip(&b.b) {
                acc += (x - y) * (x - y);
            }
        }
        libm::sqrt(acc)
    }
}
