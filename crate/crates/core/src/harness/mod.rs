//! Seeded Monte Carlo orchestration and figure-data emission.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(master_seed)` with its
//! stream set to `i`. Every sweep point reuses the same streams, so points
//! differ only through their parameters. Rows are merged by index, so the
//! worker count never changes the output.

mod config;
mod experiments;
mod output;

pub use config::{parse_config_text, parse_int_list, parse_quantity, Dimension, ExperimentKind, RunConfig, DEFAULT_GAMMA, DEFAULT_T1, DEFAULT_TRIALS, DEFAULT_T_PHI};
pub use experiments::{monte_carlo, monte_carlo_with_workers, run_trials, trial_rng, worker_count, WORKERS_ENV};
pub use output::{aggregate, mean_ci95, Aggregate, Cell, Provenance, RunResult, RNG_SCHEME};
