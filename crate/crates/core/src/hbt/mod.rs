//! Photon-stream Monte Carlo and the HBT detection chain.
//!
//! [`simulate_stream`] unravels the two-emitter master equation into quantum
//! trajectories and emits a timestamp for every waveguide (and non-guided)
//! photon. [`hbt_detect`] pushes the waveguide photons through a beamsplitter
//! and two jittery, lossy, dark-counting detectors; [`correlate`] histograms
//! all coincidences. Every stage is deterministic given its seed.

mod correlate;
mod detect;
mod trajectory;

pub use correlate::correlate;
pub use detect::hbt_detect;
pub use trajectory::{add_background, simulate_stream, BackgroundKind};

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HbtError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("excitation probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("efficiency must lie in [0, 1], got {0}")]
    BadEfficiency(f64),
    #[error("split ratio must lie strictly inside (0, 1), got {0}")]
    BadSplitRatio(f64),
    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("photon stream timestamps must be sorted and within [0, duration]")]
    UnsortedStream,
    #[error("malformed stream record: {0}")]
    MalformedRecord(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/* Excitation and detector parameters ****************************************/

/// How the emitters are driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ExcitationSchedule {
    /// Above-band pulse train: at each pulse every emitter is independently
    /// reset to |e⟩ with its probability, after an exponential capture delay
    /// modelling carrier diffusion into the dot.
    Pulsed {
        period_ns: f64,
        p_excite_a: f64,
        p_excite_b: f64,
        capture_tau_ns: f64,
    },
    /// Continuous weak incoherent repumping at a fixed rate per emitter.
    Cw { repump_per_ns: f64 },
}

impl ExcitationSchedule {
    pub fn validate(&self) -> Result<(), HbtError> {
        match *self {
            ExcitationSchedule::Pulsed { period_ns, p_excite_a, p_excite_b, capture_tau_ns } => {
                if !(period_ns > 0.0) {
                    return Err(HbtError::NonPositive { name: "period_ns", value: period_ns });
                }
                for p in [p_excite_a, p_excite_b] {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(HbtError::BadProbability(p));
                    }
                }
                if capture_tau_ns < 0.0 {
                    return Err(HbtError::Negative { name: "capture_tau_ns", value: capture_tau_ns });
                }
            }
            ExcitationSchedule::Cw { repump_per_ns } => {
                if repump_per_ns < 0.0 {
                    return Err(HbtError::Negative { name: "repump_per_ns", value: repump_per_ns });
                }
            }
        }
        Ok(())
    }
}

/// Single-photon detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Quantum efficiency in [0, 1].
    pub efficiency: f64,
    /// Timing-response FWHM (ns); σ = FWHM/2.3548.
    pub jitter_fwhm_ns: f64,
    /// Dark-count rate (1/ns).
    pub dark_rate_per_ns: f64,
    /// Dead time after an accepted click (ns); 0 disables.
    pub dead_time_ns: f64,
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), HbtError> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(HbtError::BadEfficiency(self.efficiency));
        }
        for (name, value) in [
            ("jitter_fwhm_ns", self.jitter_fwhm_ns),
            ("dark_rate_per_ns", self.dark_rate_per_ns),
            ("dead_time_ns", self.dead_time_ns),
        ] {
            if value < 0.0 {
                return Err(HbtError::Negative { name, value });
            }
        }
        Ok(())
    }
}

/* Photon streams *************************************************************/

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Waveguide,
    Nonguided,
}

impl Channel {
    fn tag(&self) -> &'static str {
        match self {
            Channel::Waveguide => "waveguide",
            Channel::Nonguided => "nonguided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonEvent {
    pub t_ns: f64,
    pub channel: Channel,
}

/// Time-ordered emission timestamps with channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    pub events: Vec<PhotonEvent>,
    pub duration_ns: f64,
    /// RNG seed that produced the stream.
    pub seed: u64,
}

/// JSON sidecar for serialized streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub seed: u64,
    pub duration_ns: f64,
    pub n_waveguide: usize,
    pub n_nonguided: usize,
}

impl PhotonStream {
    pub fn validate(&self) -> Result<(), HbtError> {
        let sorted = self.events.windows(2).all(|w| w[0].t_ns <= w[1].t_ns);
        let in_range = self
            .events
            .iter()
            .all(|e| e.t_ns >= 0.0 && e.t_ns <= self.duration_ns);
        if !sorted || !in_range {
            return Err(HbtError::UnsortedStream);
        }
        Ok(())
    }

    pub fn count(&self, channel: Channel) -> usize {
        self.events.iter().filter(|e| e.channel == channel).count()
    }

    /// Waveguide timestamps only (the detectable output).
    pub fn waveguide_times(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.channel == Channel::Waveguide)
            .map(|e| e.t_ns)
            .collect()
    }

    pub fn meta(&self) -> StreamMeta {
        StreamMeta {
            seed: self.seed,
            duration_ns: self.duration_ns,
            n_waveguide: self.count(Channel::Waveguide),
            n_nonguided: self.count(Channel::Nonguided),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), HbtError> {
        let io = |e: std::io::Error| HbtError::Io(e.to_string());
        writeln!(w, "t_ns,channel").map_err(io)?;
        for e in &self.events {
            writeln!(w, "{},{}", e.t_ns, e.channel.tag()).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, meta: &StreamMeta) -> Result<Self, HbtError> {
        let mut events = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| HbtError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("t_ns") {
                continue;
            }
            let (t, ch) = line
                .split_once(',')
                .ok_or_else(|| HbtError::MalformedRecord(line.to_string()))?;
            let t_ns = t
                .trim()
                .parse::<f64>()
                .map_err(|_| HbtError::MalformedRecord(line.to_string()))?;
            let channel = match ch.trim() {
                "waveguide" => Channel::Waveguide,
                "nonguided" => Channel::Nonguided,
                other => return Err(HbtError::MalformedRecord(other.to_string())),
            };
            events.push(PhotonEvent { t_ns, channel });
        }
        let stream = Self { events, duration_ns: meta.duration_ns, seed: meta.seed };
        stream.validate()?;
        Ok(stream)
    }

    /// Packed little-endian binary: f64 timestamp + u8 channel per record.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), HbtError> {
        let io = |e: std::io::Error| HbtError::Io(e.to_string());
        for e in &self.events {
            w.write_all(&e.t_ns.to_le_bytes()).map_err(io)?;
            w.write_all(&[match e.channel {
                Channel::Waveguide => 0u8,
                Channel::Nonguided => 1u8,
            }])
            .map_err(io)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, meta: &StreamMeta) -> Result<Self, HbtError> {
        let mut events = Vec::new();
        let mut rec = [0u8; 9];
        loop {
            match r.read_exact(&mut rec) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(HbtError::Io(e.to_string())),
            }
            let t_ns = f64::from_le_bytes(rec[0..8].try_into().expect("8 bytes"));
            let channel = match rec[8] {
                0 => Channel::Waveguide,
                1 => Channel::Nonguided,
                other => return Err(HbtError::MalformedRecord(format!("channel byte {other}"))),
            };
            events.push(PhotonEvent { t_ns, channel });
        }
        let stream = Self { events, duration_ns: meta.duration_ns, seed: meta.seed };
        stream.validate()?;
        Ok(stream)
    }
}

/* Coincidence histograms *****************************************************/

/// Binned coincidence counts over delay τ = t_B − t_A with acquisition
/// metadata. Bin edges are generated from `tau_min_ns` and `bin_width_ns`,
/// so the grid is uniform by construction. Raw histograms from
/// [`correlate`] hold integral counts; dark-count subtraction produces
/// fractional values and records the level it removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub bin_width_ns: f64,
    /// Left edge of the first bin.
    pub tau_min_ns: f64,
    pub counts: Vec<f64>,
    pub acquisition_ns: f64,
    pub singles_rate_a_per_ns: f64,
    pub singles_rate_b_per_ns: f64,
    /// Accidental floor removed per bin, when dark subtraction was applied.
    pub subtracted_floor_per_bin: Option<f64>,
}

/// JSON sidecar for serialized histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramMeta {
    pub bin_width_ns: f64,
    pub tau_min_ns: f64,
    pub acquisition_ns: f64,
    pub singles_rate_a_per_ns: f64,
    pub singles_rate_b_per_ns: f64,
    pub total_coincidences: f64,
    pub subtracted_floor_per_bin: Option<f64>,
}

impl CorrelationHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin centers (ns).
    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len())
            .map(|i| self.tau_min_ns + (i as f64 + 0.5) * self.bin_width_ns)
            .collect()
    }

    /// Bin edges (ns), `n_bins + 1` values.
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|i| self.tau_min_ns + i as f64 * self.bin_width_ns)
            .collect()
    }

    pub fn total_counts(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Expected uncorrelated coincidences per bin, r_A·r_B·w·T.
    pub fn accidental_level(&self) -> f64 {
        self.singles_rate_a_per_ns
            * self.singles_rate_b_per_ns
            * self.bin_width_ns
            * self.acquisition_ns
    }

    /// Counts normalized by the accidental level: an estimate of g²(τ).
    pub fn normalized(&self) -> Vec<f64> {
        let level = self.accidental_level();
        self.counts.iter().map(|&x| x / level).collect()
    }

    pub fn meta(&self) -> HistogramMeta {
        HistogramMeta {
            bin_width_ns: self.bin_width_ns,
            tau_min_ns: self.tau_min_ns,
            acquisition_ns: self.acquisition_ns,
            singles_rate_a_per_ns: self.singles_rate_a_per_ns,
            singles_rate_b_per_ns: self.singles_rate_b_per_ns,
            total_coincidences: self.total_counts(),
            subtracted_floor_per_bin: self.subtracted_floor_per_bin,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), HbtError> {
        let io = |e: std::io::Error| HbtError::Io(e.to_string());
        writeln!(w, "tau_ns,counts").map_err(io)?;
        for (t, v) in self.centers().iter().zip(&self.counts) {
            writeln!(w, "{t},{v}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, meta: &HistogramMeta) -> Result<Self, HbtError> {
        let mut counts = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| HbtError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("tau_ns") {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| HbtError::MalformedRecord(line.to_string()))?;
            counts.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| HbtError::MalformedRecord(line.to_string()))?,
            );
        }
        Ok(Self {
            bin_width_ns: meta.bin_width_ns,
            tau_min_ns: meta.tau_min_ns,
            counts,
            acquisition_ns: meta.acquisition_ns,
            singles_rate_a_per_ns: meta.singles_rate_a_per_ns,
            singles_rate_b_per_ns: meta.singles_rate_b_per_ns,
            subtracted_floor_per_bin: meta.subtracted_floor_per_bin,
        })
    }
}

/// Derive an independent sub-seed for a named pipeline stage
/// (splitmix64 over seed XOR a stage constant).
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_csv_round_trip() {
        let stream = PhotonStream {
            events: vec![
                PhotonEvent { t_ns: 0.5, channel: Channel::Waveguide },
                PhotonEvent { t_ns: 1.25, channel: Channel::Nonguided },
                PhotonEvent { t_ns: 7.0, channel: Channel::Waveguide },
            ],
            duration_ns: 10.0,
            seed: 42,
        };
        let mut buf = Vec::new();
        stream.write_csv(&mut buf).unwrap();
        let back = PhotonStream::read_csv(&buf[..], &stream.meta()).unwrap();
        assert_eq!(back, stream);
    }

    #[test]
    fn stream_binary_round_trip() {
        let stream = PhotonStream {
            events: vec![
                PhotonEvent { t_ns: 0.125, channel: Channel::Waveguide },
                PhotonEvent { t_ns: 3.875, channel: Channel::Nonguided },
            ],
            duration_ns: 4.0,
            seed: 7,
        };
        let mut buf = Vec::new();
        stream.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 18);
        let back = PhotonStream::read_binary(&buf[..], &stream.meta()).unwrap();
        assert_eq!(back, stream);
    }

    #[test]
    fn stream_validation_rejects_unsorted() {
        let stream = PhotonStream {
            events: vec![
                PhotonEvent { t_ns: 2.0, channel: Channel::Waveguide },
                PhotonEvent { t_ns: 1.0, channel: Channel::Waveguide },
            ],
            duration_ns: 10.0,
            seed: 0,
        };
        assert_eq!(stream.validate(), Err(HbtError::UnsortedStream));
    }

    #[test]
    fn histogram_edges_are_uniform() {
        let hist = CorrelationHistogram {
            bin_width_ns: 0.1,
            tau_min_ns: -5.05,
            counts: vec![0.0; 101],
            acquisition_ns: 1e6,
            singles_rate_a_per_ns: 1e-3,
            singles_rate_b_per_ns: 1e-3,
            subtracted_floor_per_bin: None,
        };
        let edges = hist.edges();
        assert_eq!(edges.len(), 102);
        for w in edges.windows(2) {
            assert!(((w[1] - w[0]) - 0.1).abs() < 1e-12);
        }
        // Center bin straddles τ = 0.
        let centers = hist.centers();
        assert!(centers[50].abs() < 1e-12);
    }

    #[test]
    fn histogram_csv_round_trip() {
        let hist = CorrelationHistogram {
            bin_width_ns: 0.5,
            tau_min_ns: -1.25,
            counts: vec![3.0, 10.0, 0.0, 4.0, 5.0],
            acquisition_ns: 100.0,
            singles_rate_a_per_ns: 0.05,
            singles_rate_b_per_ns: 0.04,
            subtracted_floor_per_bin: Some(0.25),
        };
        let mut buf = Vec::new();
        hist.write_csv(&mut buf).unwrap();
        let meta_json = serde_json::to_string(&hist.meta()).unwrap();
        let meta: HistogramMeta = serde_json::from_str(&meta_json).unwrap();
        let back = CorrelationHistogram::read_csv(&buf[..], &meta).unwrap();
        assert_eq!(back, hist);
    }

    #[test]
    fn derived_seeds_differ_by_stage() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(99, 3), derive_seed(99, 3));
    }
}
