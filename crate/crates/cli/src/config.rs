//! Scenario configuration: one self-describing JSON file per run, every
//! physical quantity carrying its unit in the key name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use wgqed_core::hbt::{BackgroundKind, DetectorParams, ExcitationSchedule};
use wgqed_core::units::{energy_to_angular, EmitterParams, TwoEmitterSystem};

use crate::CliError;

/// One emitter; give either `gamma_per_ns` or `lifetime_ns`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub detuning_uev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_per_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_ns: Option<f64>,
    pub gamma_wg_per_ns: f64,
    /// Pure-dephasing time; omit for none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_ns: Option<f64>,
    pub position_um: f64,
}

impl EmitterConfig {
    fn to_params(&self, label: &str) -> Result<EmitterParams, CliError> {
        let gamma = match (self.gamma_per_ns, self.lifetime_ns) {
            (Some(g), None) => g,
            (None, Some(tau)) if tau > 0.0 => 1.0 / tau,
            (None, Some(tau)) => {
                return Err(CliError::Config(format!("{label}.lifetime_ns must be positive, got {tau}")))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(format!(
                    "{label}: give either gamma_per_ns or lifetime_ns, not both"
                )))
            }
            (None, None) => {
                return Err(CliError::Config(format!(
                    "{label}: one of gamma_per_ns or lifetime_ns is required"
                )))
            }
        };
        EmitterParams::new(
            energy_to_angular(self.detuning_uev),
            gamma,
            self.gamma_wg_per_ns,
            self.t2_ns.unwrap_or(f64::INFINITY),
            self.position_um,
        )
        .map_err(|e| CliError::Config(format!("{label}: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    /// Signal fraction ρ of the total field intensity.
    pub field_fraction_rho: f64,
    /// Decay constant of the pulse-synchronized background (pulsed runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulsed_decay_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bin_ns: f64,
    pub max_delay_ns: f64,
}

/// A complete, reproducible simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub emitter_a: EmitterConfig,
    pub emitter_b: EmitterConfig,
    pub k_per_um: f64,
    pub excitation: ExcitationSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<BackgroundConfig>,
    pub detector_a: DetectorParams,
    pub detector_b: DetectorParams,
    #[serde(default = "default_split")]
    pub split_ratio: f64,
    pub histogram: HistogramConfig,
    pub duration_ns: f64,
    pub seed: u64,
}

fn default_split() -> f64 {
    0.5
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.system()?;
        self.excitation
            .validate()
            .map_err(|e| CliError::Config(format!("excitation: {e}")))?;
        self.detector_a
            .validate()
            .map_err(|e| CliError::Config(format!("detector_a: {e}")))?;
        self.detector_b
            .validate()
            .map_err(|e| CliError::Config(format!("detector_b: {e}")))?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(CliError::Config(format!(
                "split_ratio must lie strictly inside (0, 1), got {}",
                self.split_ratio
            )));
        }
        if let Some(bg) = &self.background {
            if !(0.0..=1.0).contains(&bg.field_fraction_rho) {
                return Err(CliError::Config(format!(
                    "background.field_fraction_rho must lie in [0, 1], got {}",
                    bg.field_fraction_rho
                )));
            }
        }
        if !(self.histogram.bin_ns > 0.0) {
            return Err(CliError::Config("histogram.bin_ns must be positive".into()));
        }
        if self.histogram.max_delay_ns < self.histogram.bin_ns {
            return Err(CliError::Config(
                "histogram.max_delay_ns must be at least one bin wide".into(),
            ));
        }
        if !(self.duration_ns > 0.0) {
            return Err(CliError::Config(format!(
                "duration_ns must be positive, got {}",
                self.duration_ns
            )));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<TwoEmitterSystem, CliError> {
        TwoEmitterSystem::new(
            self.emitter_a.to_params("emitter_a")?,
            self.emitter_b.to_params("emitter_b")?,
            self.k_per_um,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Mean signal photon rate into the waveguide (1/ns).
    pub fn expected_signal_rate(&self) -> Result<f64, CliError> {
        let sys = self.system()?;
        let emitters = [sys.emitter_a, sys.emitter_b];
        Ok(match self.excitation {
            ExcitationSchedule::Cw { repump_per_ns } => emitters
                .iter()
                .map(|e| e.gamma_wg * repump_per_ns / (repump_per_ns + e.gamma))
                .sum(),
            ExcitationSchedule::Pulsed { period_ns, p_excite_a, p_excite_b, .. } => {
                (p_excite_a * emitters[0].gamma_wg / emitters[0].gamma
                    + p_excite_b * emitters[1].gamma_wg / emitters[1].gamma)
                    / period_ns
            }
        })
    }

    /// The background process realizing the configured field fraction ρ.
    pub fn background_kind(&self) -> Result<Option<BackgroundKind>, CliError> {
        let Some(bg) = &self.background else {
            return Ok(None);
        };
        let rho = bg.field_fraction_rho;
        if rho >= 1.0 {
            return Ok(None);
        }
        if rho <= 0.0 {
            return Err(CliError::Config(
                "background.field_fraction_rho = 0 means no signal at all".into(),
            ));
        }
        let signal = self.expected_signal_rate()?;
        let scale = (1.0 - rho) / rho;
        Ok(Some(match self.excitation {
            ExcitationSchedule::Cw { .. } => {
                BackgroundKind::Cw { rate_per_ns: signal * scale }
            }
            ExcitationSchedule::Pulsed { period_ns, .. } => BackgroundKind::Pulsed {
                period_ns,
                mean_per_pulse: signal * period_ns * scale,
                decay_ns: bg.pulsed_decay_ns.unwrap_or(1.4),
            },
        }))
    }

    /// Jitter FWHM of the coincidence delay axis: the two detector
    /// responses add in quadrature.
    pub fn pair_jitter_fwhm_ns(&self) -> f64 {
        (self.detector_a.jitter_fwhm_ns.powi(2) + self.detector_b.jitter_fwhm_ns.powi(2)).sqrt()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
