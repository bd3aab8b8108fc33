//! Filesystem, command-line and HTTP front ends for `folkrec-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod memory;
pub mod service;

pub use error::{Error, Result};
pub use folkrec_core as core;

use std::time::Instant;

use folkrec_core::dataset::SplitSample;
use folkrec_core::eval::{evaluate_with_clock, Clock};
use folkrec_core::{Algorithm, AlgorithmConfig, EvalConfig, EvalReport};

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_nanos(&mut self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

/// Evaluates with wall-clock timing and, where available, peak RSS.
pub fn evaluate(
    split: &SplitSample,
    algorithm: Algorithm,
    config: &AlgorithmConfig,
    eval: &EvalConfig,
) -> Result<EvalReport> {
    let mut clock = WallClock(Instant::now());
    let mut report = evaluate_with_clock(split, algorithm, config, eval, &mut clock)?;
    report.rss_peak_bytes = memory::peak_rss_bytes();
    Ok(report)
}
