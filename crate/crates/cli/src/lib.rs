//! Command-line front end for the detector-rate library: single-rate
//! queries, parameter sweeps, figure-data generation, and the verification
//! suites. All numeric output is deterministic CSV.

pub mod config;
pub mod figure;
pub mod output;
pub mod sweep;
pub mod verify;

use thiserror::Error;

/// Process exit codes: 0 success, 1 verification failure, 2 invalid
/// parameters, 3 numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    InvalidParams(String),
    #[error("{0}")]
    Numerical(String),
    #[error("verification failed")]
    VerificationFailed,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::InvalidParams(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

/// Rayon pool sized by the `UDW_THREADS` environment variable when set to a
/// positive integer; machine parallelism otherwise.
pub fn sweep_thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("UDW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .expect("thread pool construction cannot fail with a valid size")
}
