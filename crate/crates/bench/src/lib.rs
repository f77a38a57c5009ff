//! Shared fixtures for the benchmarks.

use fiberlink::sweep::{Format, Problem, SweepSpec};
use fiberlink::LinkConfig;

/// α = 0.05/km, L = 225 km, K = 2, n = 1e7.
pub fn record_config() -> LinkConfig {
    LinkConfig::new(0.05, 225.0, 2, 1e7).expect("valid config")
}

/// A small grid: three lengths, K ∈ {2, 4, 6}, one photon number.
pub fn small_sweep() -> SweepSpec {
    SweepSpec {
        alpha: 0.05,
        lengths: vec![100.0, 250.0, 400.0],
        segments: vec![2, 4, 6],
        n_values: vec![1e7],
        problems: vec![Problem::Egs, Problem::Regs],
        output_path: None,
        format: Format::Csv,
    }
}
