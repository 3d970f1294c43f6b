//! Parameter extraction: dark-count subtraction, pulsed and CW correlation
//! fits, Lorentzian spectral fits, lifetime fits, and the Purcell/β-factor
//! arithmetic.

mod fits;
mod lm;

pub use fits::{
    fit_cw_g2, fit_lifetime, fit_lorentzian, fit_pulsed_g2, CwFreeMask, CwG2Model, DecayCurve,
};
pub use lm::{minimize, FitOptions, Minimum};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hbt::CorrelationHistogram;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("need at least {needed} side peaks in the window, found {found}")]
    TooFewPeaks { found: usize, needed: usize },
    #[error("no decay detected in the curve")]
    NoDecay,
    #[error("rate `{name}` invalid: {value}")]
    BadRate { name: &'static str, value: f64 },
    #[error("uncoupled rate {guc} exceeds coupled rate {gc}")]
    UncoupledExceedsCoupled { guc: f64, gc: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/* Fit results ****************************************************************/

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    /// 1σ uncertainty; 0 for fixed parameters.
    pub sigma: f64,
}

/// Estimated parameters with uncertainties and convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<FittedParam>,
    /// Residual sum of squares (weighted).
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.sigma)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("FitResult serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, FitError> {
        serde_json::from_str(s).map_err(|e| FitError::Io(e.to_string()))
    }
}

/* Spectra ********************************************************************/

/// A wavelength-resolved intensity trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub wavelength_nm: Vec<f64>,
    pub counts: Vec<f64>,
    /// Optional per-point noise (1σ).
    pub noise: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.wavelength_nm.len() != self.counts.len() {
            return Err(FitError::BadInput("wavelength/counts length mismatch".into()));
        }
        if self.wavelength_nm.len() < 3 {
            return Err(FitError::BadInput("spectrum too short".into()));
        }
        if self.wavelength_nm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FitError::BadInput("wavelength grid must be strictly increasing".into()));
        }
        if let Some(n) = &self.noise {
            if n.len() != self.counts.len() {
                return Err(FitError::BadInput("noise length mismatch".into()));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), FitError> {
        let io = |e: std::io::Error| FitError::Io(e.to_string());
        writeln!(w, "wavelength_nm,counts").map_err(io)?;
        for (l, v) in self.wavelength_nm.iter().zip(&self.counts) {
            writeln!(w, "{l},{v}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, FitError> {
        let mut wavelength_nm = Vec::new();
        let mut counts = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| FitError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("wavelength_nm") {
                continue;
            }
            let (l, v) = line
                .split_once(',')
                .ok_or_else(|| FitError::BadInput(format!("malformed spectrum row `{line}`")))?;
            wavelength_nm.push(
                l.trim().parse::<f64>().map_err(|_| FitError::BadInput(line.to_string()))?,
            );
            counts.push(v.trim().parse::<f64>().map_err(|_| FitError::BadInput(line.to_string()))?);
        }
        let spec = Self { wavelength_nm, counts, noise: None };
        spec.validate()?;
        Ok(spec)
    }
}

/* Dark-count subtraction *****************************************************/

/// Remove the expected accidental floor caused by detector dark counts.
///
/// With signal rates r_i = (measured singles)_i − d_i the floor per bin is
/// (r₁d₂ + r₂d₁ + d₁d₂)·w·T. Counts are clamped at zero and the removed
/// level is recorded. The singles-rate metadata is left at the measured
/// values so that normalization commutes with the subtraction.
pub fn subtract_dark(
    hist: &CorrelationHistogram,
    dark_rate_a_per_ns: f64,
    dark_rate_b_per_ns: f64,
) -> Result<CorrelationHistogram, FitError> {
    for (name, value) in [("dark_rate_a", dark_rate_a_per_ns), ("dark_rate_b", dark_rate_b_per_ns)] {
        if value < 0.0 || !value.is_finite() {
            return Err(FitError::BadRate { name, value });
        }
    }
    if !(hist.acquisition_ns > 0.0) {
        return Err(FitError::BadInput("histogram lacks acquisition metadata".into()));
    }
    let r_a = (hist.singles_rate_a_per_ns - dark_rate_a_per_ns).max(0.0);
    let r_b = (hist.singles_rate_b_per_ns - dark_rate_b_per_ns).max(0.0);
    let floor = (r_a * dark_rate_b_per_ns
        + r_b * dark_rate_a_per_ns
        + dark_rate_a_per_ns * dark_rate_b_per_ns)
        * hist.bin_width_ns
        * hist.acquisition_ns;
    let mut out = hist.clone();
    out.counts = hist.counts.iter().map(|&x| (x - floor).max(0.0)).collect();
    out.subtracted_floor_per_bin = Some(floor + hist.subtracted_floor_per_bin.unwrap_or(0.0));
    Ok(out)
}

/* Purcell and coupling efficiency ********************************************/

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurcellBeta {
    /// Purcell enhancement F = Γc/Γbulk.
    pub purcell: f64,
    /// Coupling efficiency β = (Γc − Γuc)/Γc.
    pub beta_factor: f64,
}

/// Purcell enhancement and coupling efficiency from the coupled, bulk and
/// uncoupled decay rates (1/ns).
pub fn purcell_beta(gamma_c: f64, gamma_bulk: f64, gamma_uc: f64) -> Result<PurcellBeta, FitError> {
    for (name, value) in [("gamma_c", gamma_c), ("gamma_bulk", gamma_bulk)] {
        if !(value > 0.0) {
            return Err(FitError::BadRate { name, value });
        }
    }
    if gamma_uc < 0.0 {
        return Err(FitError::BadRate { name: "gamma_uc", value: gamma_uc });
    }
    if gamma_uc > gamma_c {
        return Err(FitError::UncoupledExceedsCoupled { guc: gamma_uc, gc: gamma_c });
    }
    Ok(PurcellBeta {
        purcell: gamma_c / gamma_bulk,
        beta_factor: (gamma_c - gamma_uc) / gamma_c,
    })
}
