//! Core library for an autonomous-surface-vessel trajectory-tracking workbench.
//!
//! Everything numerical lives here: the 3-DOF vessel plant, stochastic
//! wind/wave/current disturbances, reference-trajectory guidance, the shaped
//! tracking reward, a small hand-rolled neural-network stack, the DDPG
//! training loop, and a shooting-based NMPC baseline. File formats, configs,
//! and the CLI live in the companion `asv-harness` crate.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! enables the fast matrix kernels and `parallel` adds rayon-backed batched
//! linear algebra. All float math goes through `libm` so results do not
//! depend on the feature set, and every source of randomness is an injected
//! seeded generator: a fixed seed reproduces a run bit-for-bit.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
pub mod ddpg;
pub mod disturbance;
pub mod dynamics;
pub mod episode;
pub mod fmath;
pub mod guidance;
pub mod linalg;
pub mod nmpc;
pub mod nn;
pub mod reward;

pub use dynamics::{ModelParameters, ThrustCommand, VesselState};
pub use guidance::{ReferencePath, ReferenceSample, TrajectorySpec};
pub use reward::{RewardBreakdown, RewardParams};
