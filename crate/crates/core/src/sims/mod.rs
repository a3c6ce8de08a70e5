//! Monte Carlo experiments that run the proof constructions: typical-set
//! coverage, random coding over a channel, lossy source coding, their
//! composition, and the Lipschitz perturbation bound.
//!
//! Trial `t` at block length `n` and rate index `r` draws from streams keyed
//! by `(seed, n, r, t)` and results are folded in trial order, so reports do
//! not depend on the number of worker threads.

mod config;
mod lipschitz;
mod report;
mod source_coverage;
mod channel_coding;
mod lossy_coding;
mod separation;

pub use config::{
    codebook_size, default_epsilon, ChannelSpec, DistortionSpec, ExperimentConfig, LinearMapsSpec, LipschitzSpec,
    SourceSpec, Theorem, DEFAULT_RATE_MULTIPLIERS,
};
pub use lipschitz::{lipschitz_bound, run_lipschitz};
pub use report::{
    mean_interval, wilson_interval, CaseCount, ExperimentReport, Interval, LipschitzEmpirical, LipschitzOutcome,
    RateRecord, Sandwich,
};
pub use source_coverage::run_source_coverage;
pub use channel_coding::run_channel_coding;
pub use lossy_coding::run_lossy_coding;
pub use separation::run_separation;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, tag};

pub(crate) fn trial_seed(master: u64, n: usize, rate_index: usize, trial: u64) -> u64 {
    derive_seed(derive_seed(master, n as u64, rate_index as u64), tag::TRIAL, trial)
}

/// Runs the configured experiment on a pool of `workers` threads.
pub fn simulate(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| match config.theorem {
        Theorem::Thm3 => run_source_coverage(config),
        Theorem::Thm4 => run_channel_coding(config),
        Theorem::Thm5 => run_lossy_coding(config),
        Theorem::Thm6 => run_separation(config),
        Theorem::Thm7 => run_lipschitz(config),
    })
}
