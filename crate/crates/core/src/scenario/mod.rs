//! Scenario configuration, figure presets, sweeps and table output.

pub mod config;
pub mod emit;
pub mod presets;
pub mod sweep;

pub use config::{Axis, Mode, Output, ScenarioConfig};
pub use emit::{emit_table, to_json, write_csv, write_json, Format};
pub use presets::{preset, PRESET_NAMES};
pub use sweep::{run_sweep, SweepResult};
