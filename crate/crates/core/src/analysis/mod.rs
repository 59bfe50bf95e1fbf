//! Experiment orchestration: configs, exponent fits and crossover
//! classification, CSV and plot-script output.

pub mod config;
pub mod experiment;
pub mod fit;

pub use config::ExperimentConfig;
pub use experiment::{output_root, run_experiment, run_experiment_file, RunSummary, OUTPUT_ROOT_VAR};
pub use fit::{classify_crossover, fit_dynamic_exponent, fit_structure, spreading, widths_from_csv, Bands, Class, CrossoverRow, ExponentFit};
