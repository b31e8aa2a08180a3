//! Experiment runner for backflow computations: configuration files, output
//! formats, parallel drivers and scan analysis on top of `backflow-core`.

pub mod analysis;
pub mod check;
pub mod config;
pub mod formats;
pub mod runner;
pub mod solve;

pub use config::{ExperimentConfig, ModelSpec};
pub use runner::{run, RunReport, ScanRow};
pub use solve::{solve_point, PointSolution, SolveOptions};
