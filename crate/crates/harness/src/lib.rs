//! Experiment harness for associative watermarking: seeded simulations,
//! theory sweeps and image BER experiments, all emitted as CSV.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod experiments;
pub mod stats;
pub mod streams;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad or inconsistent user input.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error(transparent)]
    Core(#[from] awm_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

/// Worker pool sized by `AWM_THREADS` (unset or 0 = one per core).
pub fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let threads = match std::env::var("AWM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| HarnessError::Config(format!("AWM_THREADS={v:?} is not a count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Internal(e.to_string()))
}
