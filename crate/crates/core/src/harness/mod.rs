//! Sweep engine, configuration, CSV and plot output.

pub mod analysis;
pub mod analytic;
pub mod config;
pub mod csvio;
pub mod link;
pub mod plots;
pub mod sweep;

pub use analysis::{analyze, write_analysis, Analysis};
pub use config::{CsiMode, SimConfig, SnrGrid, StopRule};
pub use csvio::{emit_csv, parse_csv, read_csv, write_csv, SweepMeta};
pub use link::{LinkSimulator, TrialOutcome};
pub use plots::emit_plots;
pub use sweep::{point_seed, run_point, run_sweep, run_sweep_with, Execution, SweepReport};
