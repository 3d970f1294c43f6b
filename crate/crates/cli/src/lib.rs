//! Library side of the `wgqed` command-line tool: scenario configuration,
//! the simulate → detect → correlate pipeline, and the command
//! implementations shared between the binary and the acceptance tests.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use thiserror::Error;

use wgqed_core::hbt::{
    add_background, correlate, derive_seed, hbt_detect, simulate_stream, CorrelationHistogram,
    PhotonStream,
};

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 1 numerical failure, 2 input error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) | CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// In-memory results of one simulated HBT run.
pub struct SimulationArtifacts {
    pub stream: PhotonStream,
    pub clicks_a: Vec<f64>,
    pub clicks_b: Vec<f64>,
    pub histogram: CorrelationHistogram,
}

/// Run the full pipeline for a scenario: trajectory stream, background
/// merge, detection, coincidence histogram. Deterministic given the
/// config's seed (sub-stages use derived sub-seeds).
pub fn run_simulation(config: &RunConfig) -> Result<SimulationArtifacts, CliError> {
    config.validate()?;
    let system = config.system()?;
    let stream = simulate_stream(&system, &config.excitation, config.duration_ns, config.seed)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let stream = match config.background_kind()? {
        Some(kind) => add_background(&stream, &kind, derive_seed(config.seed, 1))
            .map_err(|e| CliError::Numerical(e.to_string()))?,
        None => stream,
    };
    let (clicks_a, clicks_b) = hbt_detect(
        &stream,
        &config.detector_a,
        &config.detector_b,
        config.split_ratio,
        derive_seed(config.seed, 2),
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let histogram = correlate(
        &clicks_a,
        &clicks_b,
        config.histogram.bin_ns,
        config.histogram.max_delay_ns,
        config.duration_ns,
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(SimulationArtifacts { stream, clicks_a, clicks_b, histogram })
}

/// Default output directory: `WGQED_OUT_DIR` or `./out`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("WGQED_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// FNV-1a hash of a byte stream; used by `--check` artifact comparison.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
