//! IO, file formats, experiment orchestration, and the CLI for the vessel
//! trajectory-tracking workbench. All numerics live in `asv-core`.

pub mod config;
pub mod experiment;
pub mod manifest;
pub mod metrics;
pub mod plots;
pub mod trace;

/// Errors split by exit class: configuration problems exit 1, runtime
/// failures exit 2.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
        }
    }
}
