//! Scenario runner for the fano-tunnel model: TOML scenarios, figure
//! presets, trajectory/rates/sweep writers and the model-versus-master
//! comparison report.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use runner::{compare, run, RunOptions};
pub use scenario::Scenario;

/// Environment variable capping worker threads; 0 or unset means automatic.
pub const THREADS_ENV: &str = "FANO_TUNNEL_THREADS";

/// Configures the global worker pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<(), CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Err(_) => 0,
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
