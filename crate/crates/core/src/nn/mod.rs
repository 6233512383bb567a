//! Minimal feed-forward network machinery: MLPs with analytic gradients, a
//! bias-corrected adaptive optimizer, a ring replay buffer, exploration
//! noise, and a text checkpoint format.

mod adam;
mod checkpoint;
mod mlp;
mod ou;
mod replay;

pub use adam::{Adam, AdamParams};
pub use checkpoint::{decode_mlp, encode_mlp, CheckpointError};
pub use mlp::{Activation, BatchCache, Grads, Layer, Mlp};
pub use ou::OuNoise;
pub use replay::{ReplayBuffer, Transition};
