//! Configuration, presets and the subcommands behind the `hdsgd` binary.

pub mod commands;
pub mod config;
pub mod csv;
pub mod presets;

pub use commands::*;
pub use config::{AlgorithmConfig, ExperimentConfig, LimitConfig, LimitRegime, ModelConfig, OutputConfig, RunConfig, SpikeConvention, SweepConfig};
pub use presets::{preset, to_full_scale, DESK_N, FULL_N, PRESET_NAMES};
