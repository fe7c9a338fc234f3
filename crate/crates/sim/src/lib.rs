//! Monte Carlo harness around [`mimo_cnc`]: scenario files, sweep runners
//! and CSV output. The `mimo-cnc` binary is a thin CLI over this crate.

pub mod config;
pub mod engine;
pub mod error;
pub mod record;
pub mod sweeps;

pub use config::ScenarioConfig;
pub use error::SimError;
pub use record::{write_records, SweepRecord};
