//! Deterministic-policy-gradient actor-critic on the vessel simulator.

mod agent;
mod observation;
mod train;

pub use agent::{DdpgAgent, DdpgHyper, Losses, PolicyController, TrainError};
pub use observation::{ObsConfig, ObservationBuilder, RECORD_WIDTH};
pub use train::{train, DisturbanceTemplate, EpisodeStats, PlateauConfig, TrainConfig, TrainOutcome};
