//! Std side of the Beltrami lab: FFT backend, configuration, report files,
//! scenario runners and the `blab` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod fft;
pub mod json;
pub mod output;
pub mod scenarios;

pub use error::{BlabError, Result};

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "BLAB_THREADS";

/// Sizes the global rayon pool from `BLAB_THREADS` when set. A pool that was
/// already built is left alone.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| BlabError::Usage(format!("{THREADS_VAR} = `{raw}` is not a positive integer")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
