//! End-to-end strategy comparisons driven by a flat `key = value` config:
//! build the scene, run every strategy over paired replications, and write
//! convergence and summary CSVs, an SVG plot and a run manifest.

mod compare;
mod config;
mod output;

use crate::error::Result;

pub use compare::{
    compare_on, compute_comparison, derive_seed, environment_seed, ComparisonResult, ReplicableEnv,
    RunRecord, StrategySummary,
};
pub use config::{parse_experiment_config, ExperimentConfig};
pub use output::{
    best_so_far_curves, convergence_csv, convergence_svg, emit_convergence_csv,
    emit_convergence_svg, manifest, oracle_csv, read_convergence_csv, summary_csv, write_atomic,
    write_outputs, ConvergenceRow, CONVERGENCE_CSV, CONVERGENCE_HEADER, CONVERGENCE_SVG, MANIFEST,
    ORACLE_CSV, SUMMARY_CSV, SUMMARY_HEADER,
};

/// Computes the comparison described by `config` and writes its outputs into
/// `config.out_dir`.
pub fn run_comparison(config: &ExperimentConfig) -> Result<ComparisonResult> {
    let result = compute_comparison(config)?;
    write_outputs(&result, &config.out_dir)?;
    Ok(result)
}
