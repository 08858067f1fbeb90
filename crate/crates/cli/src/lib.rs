//! Benchmark harness around `hasso-core`: experiment configuration,
//! seeded parallel repetitions, CSV and SVG emission, sensitivity sweeps,
//! and timing comparisons. The `hasso` binary is a thin wrapper over
//! this library.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod sweep;

pub use config::{parse_config, ExperimentSpec};
pub use experiment::{run_experiment, ConvergenceTable, ExperimentOutcome, PolicySeries, WallClock};
pub use plot::render_convergence;
pub use sweep::{run_sweep, SweepRequest, SweepValue};
