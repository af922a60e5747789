//! Experiment configuration, orchestration over seeds and ε grids, and CSV/JSON output.

mod cli;
mod config;
mod experiment;
mod output;
mod sweep;

pub use cli::{cli_main, exit_code};
pub use config::{AlgorithmSection, ExperimentConfig, OutputFormat, OutputSection, ProblemSection, RunSection, StartPolicy, SweepSection};
pub use experiment::{run_experiment, Aggregate, ExperimentResult, SeedRun, SeedSummary, RunSummary, DiagnosticsDigest};
pub use output::{write_experiment, CSV_HEADER};
pub use sweep::{fit_rate, sweep_epsilon, write_sweep, RateFit, SweepResult, SweepRow};
