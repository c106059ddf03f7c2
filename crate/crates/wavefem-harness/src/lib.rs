//! Experiment driver for `wavefem`: configured runs on the benchmark
//! problems, mesh sweeps with empirical convergence orders, and lossless CSV
//! output.

pub mod alpha;
pub mod config;
pub mod error;
pub mod experiment;
pub mod rates;
pub mod records;
pub mod selftest;

pub use config::{Benchmark, RunConfig, TimeMode};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, sweep, RunRecord, Sweep};
pub use rates::RateTable;
pub use records::{emit_csv, read_csv};
