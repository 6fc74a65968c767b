//! Corpus diagnostics, threshold tuning and timing benchmarks.

pub mod bench;
pub mod stats;
pub mod tune;

pub use bench::{bench, efficiency, ResolverSpec, TimingReport};
pub use stats::{compute_stats, CorpusStats, LexsimMode};
pub use tune::{theta_grid, tune_theta, tune_theta_with, write_curve_csv, TunePoint, TuneResult};
