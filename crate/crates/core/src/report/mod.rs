//! Configuration, scenario pipeline, demos and CSV helpers behind the
//! command-line tool.

pub mod config;
pub mod csv;
pub mod demo;
pub mod scenario;

pub use config::ScenarioConfig;
pub use scenario::{run_scenario, run_stages, ExitStatus, ScenarioOutcome, Stages, Summary};

/// Cap rayon's global pool at `ENTROFLOW_THREADS` when set.
pub fn init_thread_pool() -> crate::error::Result<()> {
    let Ok(raw) = std::env::var("ENTROFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| crate::error::Error::Config(format!("ENTROFLOW_THREADS must be a positive integer, got `{raw}`")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
