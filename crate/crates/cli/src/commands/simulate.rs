//! `wgqed simulate`: run a scenario end to end and write its artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use wgqed_core::hbt::{HistogramMeta, StreamMeta};

use crate::{fnv1a, run_simulation, write_file, CliError, RunConfig, SimulationArtifacts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StreamFormat {
    Csv,
    Binary,
    /// Skip the (possibly large) stream file; keep histogram artifacts only.
    None,
}

/// Stream sidecar carrying the full scenario for archival reproduction.
#[derive(Serialize)]
struct StreamSidecar<'a> {
    meta: StreamMeta,
    config: &'a RunConfig,
}

pub struct SimulateOutput {
    pub files: Vec<PathBuf>,
    pub histogram_total: f64,
    pub singles_rate_a_per_ns: f64,
    pub singles_rate_b_per_ns: f64,
}

fn render_artifacts(
    config: &RunConfig,
    artifacts: &SimulationArtifacts,
    format: StreamFormat,
) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let io = |e: wgqed_core::hbt::HbtError| CliError::Io(e.to_string());

    match format {
        StreamFormat::Csv => {
            let mut buf = Vec::new();
            artifacts.stream.write_csv(&mut buf).map_err(io)?;
            files.push(("stream.csv".into(), buf));
        }
        StreamFormat::Binary => {
            let mut buf = Vec::new();
            artifacts.stream.write_binary(&mut buf).map_err(io)?;
            files.push(("stream.bin".into(), buf));
        }
        StreamFormat::None => {}
    }
    if format != StreamFormat::None {
        let sidecar = StreamSidecar { meta: artifacts.stream.meta(), config };
        files.push((
            "stream.meta.json".into(),
            serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes"),
        ));
    }

    let mut hist_csv = Vec::new();
    artifacts.histogram.write_csv(&mut hist_csv).map_err(io)?;
    files.push(("histogram.csv".into(), hist_csv));
    let meta: HistogramMeta = artifacts.histogram.meta();
    files.push((
        "histogram.meta.json".into(),
        serde_json::to_vec_pretty(&meta).expect("meta serializes"),
    ));
    Ok(files)
}

pub fn cmd_simulate(
    config_path: &Path,
    out_dir: &Path,
    format: StreamFormat,
    check: bool,
) -> Result<SimulateOutput, CliError> {
    let config = RunConfig::load(config_path)?;
    let artifacts = run_simulation(&config)?;
    let rendered = render_artifacts(&config, &artifacts, format)?;

    if check {
        // Re-run the whole pipeline and compare artifact hashes.
        let artifacts2 = run_simulation(&config)?;
        let rendered2 = render_artifacts(&config, &artifacts2, format)?;
        for ((name, bytes), (_, bytes2)) in rendered.iter().zip(&rendered2) {
            let (h1, h2) = (fnv1a(bytes), fnv1a(bytes2));
            println!("check {name}: {h1:016x} {}", if h1 == h2 { "ok" } else { "MISMATCH" });
            if h1 != h2 {
                return Err(CliError::Numerical(format!(
                    "artifact {name} not reproducible under fixed seed"
                )));
            }
        }
    }

    let mut files = Vec::new();
    for (name, bytes) in &rendered {
        let path = out_dir.join(name);
        write_file(&path, bytes)?;
        files.push(path);
    }

    Ok(SimulateOutput {
        files,
        histogram_total: artifacts.histogram.total_counts(),
        singles_rate_a_per_ns: artifacts.histogram.singles_rate_a_per_ns,
        singles_rate_b_per_ns: artifacts.histogram.singles_rate_b_per_ns,
    })
}
