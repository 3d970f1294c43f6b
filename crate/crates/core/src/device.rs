//! Waveguide and device formulas: Fabry–Perot group-index extraction,
//! Purcell-factor evaluation, the efficiency-chain budget, and the lumped
//! empirical thermal-tuning model with its resonance-matching solver.
//!
//! The thermal model is deliberately simple: a quadratic wavelength shift in
//! stage temperature, `ΔE(T) = a·(T − T₀)²`, calibrated on a single anchor
//! point, and a linear heater-power-to-temperature map `T(P) = T₀ + s·P`.
//! Both calibrations are exposed and overridable; the defaults reproduce the
//! measured anchors (610 μeV at 26 K, 15 K local temperature at 200 μW).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::Spectrum;
use crate::units::HC_EV_NM;

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("argument `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("field ratio must lie in [0, 1], got {0}")]
    FieldRatioOutOfRange(f64),
    #[error("temperature {t} K outside model validity [{t0}, {t_max}] K")]
    TemperatureOutOfRange { t: f64, t0: f64, t_max: f64 },
    #[error("target shift {0} μeV unreachable below the validity ceiling")]
    UnreachableShift(f64),
    #[error("efficiency chain is empty")]
    EmptyChain,
    #[error("stage `{name}` efficiency {value} outside (0, 1]")]
    BadStageEfficiency { name: String, value: f64 },
    #[error("need at least 3 fringe maxima, found {0}")]
    TooFewFringes(usize),
    #[error("spectrum has no oscillation to measure")]
    NoFringes,
}

/* Group index ****************************************************************/

/// Waveguide geometry used by the Fabry–Perot analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    /// Cavity length between the reflecting ends (μm).
    pub length_um: f64,
    /// Material refractive index.
    pub refractive_index: f64,
    /// Band-edge wavelength (nm).
    pub band_edge_nm: f64,
}

impl WaveguideGeometry {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.length_um > 0.0) {
            return Err(DeviceError::NonPositive { name: "length_um", value: self.length_um });
        }
        if !(self.refractive_index > 1.0) {
            return Err(DeviceError::NonPositive {
                name: "refractive_index - 1",
                value: self.refractive_index - 1.0,
            });
        }
        Ok(())
    }
}

/// Group index from the Fabry–Perot fringe spacing, n_g = λ²/(2·l·Δλ).
pub fn group_index(lambda_nm: f64, length_um: f64, dlambda_nm: f64) -> Result<f64, DeviceError> {
    for (name, value) in [("lambda_nm", lambda_nm), ("length_um", length_um), ("dlambda_nm", dlambda_nm)] {
        if !(value > 0.0) {
            return Err(DeviceError::NonPositive { name, value });
        }
    }
    Ok(lambda_nm * lambda_nm / (2.0 * (length_um * 1.0e3) * dlambda_nm))
}

/// Fringe spacing expected for a given group index (inverse of
/// [`group_index`] in Δλ).
pub fn fringe_spacing_for(lambda_nm: f64, length_um: f64, n_g: f64) -> Result<f64, DeviceError> {
    for (name, value) in [("lambda_nm", lambda_nm), ("length_um", length_um), ("n_g", n_g)] {
        if !(value > 0.0) {
            return Err(DeviceError::NonPositive { name, value });
        }
    }
    Ok(lambda_nm * lambda_nm / (2.0 * (length_um * 1.0e3) * n_g))
}

/// Result of scanning a spectrum for Fabry–Perot fringes.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeSpacing {
    /// Spacing at the window center (nm).
    pub spacing_nm: f64,
    /// Standard deviation of individual spacings (nm).
    pub uncertainty_nm: f64,
    /// Number of maxima found.
    pub n_maxima: usize,
    /// Set when the spacing trends across the window (chirped fringe).
    pub chirp_warning: bool,
}

/// Mean oscillation period of a fringed spectrum.
///
/// The intensity is smoothed with a 5-sample moving average, strict local
/// maxima are scanned, and the spacing is evaluated at the window center
/// from a linear trend fit of the successive peak gaps. A trend larger than
/// 10% of the mean spacing across the window raises `chirp_warning`.
pub fn fringe_spacing(spectrum: &Spectrum) -> Result<FringeSpacing, DeviceError> {
    let n = spectrum.wavelength_nm.len();
    if n < 7 {
        return Err(DeviceError::NoFringes);
    }
    // 5-point moving average.
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            spectrum.counts[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();

    let mut maxima = Vec::new();
    for i in 1..n - 1 {
        if smooth[i] > smooth[i - 1] && smooth[i] > smooth[i + 1] {
            maxima.push(spectrum.wavelength_nm[i]);
        }
    }
    if maxima.len() < 3 {
        return Err(DeviceError::TooFewFringes(maxima.len()));
    }

    let gaps: Vec<(f64, f64)> = maxima
        .windows(2)
        .map(|w| ((w[0] + w[1]) / 2.0, w[1] - w[0]))
        .collect();
    let mean_gap = gaps.iter().map(|g| g.1).sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g.1 - mean_gap).powi(2)).sum::<f64>() / gaps.len() as f64;

    // Linear trend of gap vs position, evaluated at the window center.
    let mean_x = gaps.iter().map(|g| g.0).sum::<f64>() / gaps.len() as f64;
    let sxx: f64 = gaps.iter().map(|g| (g.0 - mean_x).powi(2)).sum();
    let sxy: f64 = gaps.iter().map(|g| (g.0 - mean_x) * (g.1 - mean_gap)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let center = (spectrum.wavelength_nm[0] + spectrum.wavelength_nm[n - 1]) / 2.0;
    let spacing_center = mean_gap + slope * (center - mean_x);

    let span = spectrum.wavelength_nm[n - 1] - spectrum.wavelength_nm[0];
    let chirp_warning = (slope * span).abs() > 0.1 * mean_gap;

    Ok(FringeSpacing {
        spacing_nm: spacing_center,
        uncertainty_nm: var.sqrt(),
        n_maxima: maxima.len(),
        chirp_warning,
    })
}

/* Purcell formula ************************************************************/

/// Purcell factor `F_P = 3/(4π²) · Q/V′ · (field ratio)²` with the mode
/// volume `V′` expressed in units of (λ/n)³.
///
/// `lambda_nm` and `refractive_index` document the normalization and are
/// validated but do not enter the value, precisely because V′ is given in
/// (λ/n)³ units. The field ratio |E(r)|/|E_max| enters as intensity.
pub fn purcell_formula(
    lambda_nm: f64,
    refractive_index: f64,
    q_factor: f64,
    mode_volume_norm: f64,
    field_ratio: f64,
) -> Result<f64, DeviceError> {
    for (name, value) in [
        ("lambda_nm", lambda_nm),
        ("refractive_index", refractive_index),
        ("q_factor", q_factor),
        ("mode_volume_norm", mode_volume_norm),
    ] {
        if !(value > 0.0) {
            return Err(DeviceError::NonPositive { name, value });
        }
    }
    if !(0.0..=1.0).contains(&field_ratio) {
        return Err(DeviceError::FieldRatioOutOfRange(field_ratio));
    }
    let prefactor = 3.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    Ok(prefactor * q_factor / mode_volume_norm * field_ratio * field_ratio)
}

/* Thermal tuning *************************************************************/

/// Lumped thermal model: quadratic emission-energy shift in temperature and
/// linear heater-power-to-temperature map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalModel {
    /// Base temperature (K).
    pub base_temperature_k: f64,
    /// Temperature anchor for the quadratic shift (K).
    pub anchor_temperature_k: f64,
    /// Shift at the anchor temperature (μeV).
    pub anchor_shift_uev: f64,
    /// Heater slope (K/μW).
    pub power_slope_k_per_uw: f64,
    /// Validity ceiling (K): linewidth and intensity degrade above it.
    pub t_max_k: f64,
    /// Fraction of the shift leaking to the far waveguide segment.
    pub cross_talk: f64,
}

impl Default for ThermalModel {
    /// Calibration anchors: 610 μeV at 26 K from 4 K base; 15 K local
    /// temperature at 200 μW heating, hence 0.055 K/μW.
    fn default() -> Self {
        Self {
            base_temperature_k: 4.0,
            anchor_temperature_k: 26.0,
            anchor_shift_uev: 610.0,
            power_slope_k_per_uw: 0.055,
            t_max_k: 26.0,
            cross_talk: 0.0,
        }
    }
}

impl ThermalModel {
    /// Quadratic coefficient a (μeV/K²).
    pub fn quadratic_coefficient(&self) -> f64 {
        self.anchor_shift_uev / (self.anchor_temperature_k - self.base_temperature_k).powi(2)
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, value) in [
            ("anchor_shift_uev", self.anchor_shift_uev),
            ("power_slope_k_per_uw", self.power_slope_k_per_uw),
            (
                "anchor_temperature_k - base",
                self.anchor_temperature_k - self.base_temperature_k,
            ),
        ] {
            if !(value > 0.0) {
                return Err(DeviceError::NonPositive { name, value });
            }
        }
        if self.base_temperature_k < 0.0 {
            return Err(DeviceError::NonPositive {
                name: "base_temperature_k",
                value: self.base_temperature_k,
            });
        }
        Ok(())
    }
}

/// Red shift of the emission energy at stage temperature `t_k`:
/// `ΔE = a·(T − T₀)²` (μeV), valid on [T₀, T_max].
pub fn thermal_shift(t_k: f64, model: &ThermalModel) -> Result<f64, DeviceError> {
    if t_k < model.base_temperature_k || t_k > model.t_max_k {
        return Err(DeviceError::TemperatureOutOfRange {
            t: t_k,
            t0: model.base_temperature_k,
            t_max: model.t_max_k,
        });
    }
    let x = (t_k - model.base_temperature_k) / (model.anchor_temperature_k - model.base_temperature_k);
    Ok(model.anchor_shift_uev * x * x)
}

/// Local temperature under heating power `p_uw` (μW): `T = T₀ + s·P`.
pub fn power_to_temperature(p_uw: f64, model: &ThermalModel) -> Result<f64, DeviceError> {
    if p_uw < 0.0 {
        return Err(DeviceError::NonPositive { name: "p_uw", value: p_uw });
    }
    Ok(model.base_temperature_k + model.power_slope_k_per_uw * p_uw)
}

/// Heater power that shifts the emission by `target_uev`, by bisection on
/// the monotone `thermal_shift ∘ power_to_temperature` chain, to 0.01 μW.
pub fn match_resonance(target_uev: f64, model: &ThermalModel) -> Result<f64, DeviceError> {
    if target_uev < 0.0 {
        return Err(DeviceError::NonPositive { name: "target_uev", value: target_uev });
    }
    if target_uev == 0.0 {
        return Ok(0.0);
    }
    let p_max = (model.t_max_k - model.base_temperature_k) / model.power_slope_k_per_uw;
    let shift_at = |p: f64| -> Result<f64, DeviceError> {
        thermal_shift(power_to_temperature(p, model)?, model)
    };
    if shift_at(p_max)? < target_uev {
        return Err(DeviceError::UnreachableShift(target_uev));
    }
    let (mut lo, mut hi) = (0.0, p_max);
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if shift_at(mid)? < target_uev {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of a thermal crossing sweep: wavelengths of the fixed and heated
/// dots versus heating power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalSweepPoint {
    pub power_uw: f64,
    pub lambda_a_nm: f64,
    pub lambda_b_nm: f64,
}

/// Sweep the heater power and track both emission wavelengths. The heated
/// dot red-shifts as Δλ = λ²·ΔE/(hc); the far dot sees only the cross-talk
/// fraction.
pub fn thermal_sweep(
    lambda_a_nm: f64,
    lambda_b_nm: f64,
    p_max_uw: f64,
    p_step_uw: f64,
    model: &ThermalModel,
) -> Result<Vec<ThermalSweepPoint>, DeviceError> {
    for (name, value) in [("p_max_uw", p_max_uw), ("p_step_uw", p_step_uw)] {
        if !(value > 0.0) {
            return Err(DeviceError::NonPositive { name, value });
        }
    }
    let shift_to_dlambda = |lambda_nm: f64, de_uev: f64| {
        lambda_nm * lambda_nm * (de_uev * 1.0e-6) / HC_EV_NM
    };
    let mut points = Vec::new();
    let mut p = 0.0;
    while p <= p_max_uw + 1e-9 {
        let t = power_to_temperature(p, model)?;
        let de = thermal_shift(t.min(model.t_max_k), model)?;
        points.push(ThermalSweepPoint {
            power_uw: p,
            lambda_a_nm: lambda_a_nm + shift_to_dlambda(lambda_a_nm, model.cross_talk * de),
            lambda_b_nm: lambda_b_nm + shift_to_dlambda(lambda_b_nm, de),
        });
        p += p_step_uw;
    }
    Ok(points)
}

/* Efficiency chain ***********************************************************/

/// Ordered multiplicative efficiency budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain {
    pub stages: Vec<(String, f64)>,
}

impl EfficiencyChain {
    pub fn new(stages: Vec<(String, f64)>) -> Result<Self, DeviceError> {
        let chain = Self { stages };
        chain.validate()?;
        Ok(chain)
    }

    pub fn from_values(values: &[f64]) -> Result<Self, DeviceError> {
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (format!("stage_{i}"), v))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.stages.is_empty() {
            return Err(DeviceError::EmptyChain);
        }
        for (name, value) in &self.stages {
            if !(*value > 0.0 && *value <= 1.0) {
                return Err(DeviceError::BadStageEfficiency { name: name.clone(), value: *value });
            }
        }
        Ok(())
    }
}

/// Product of all stage efficiencies.
pub fn chain_efficiency(chain: &EfficiencyChain) -> Result<f64, DeviceError> {
    chain.validate()?;
    Ok(chain.stages.iter().map(|(_, v)| v).product())
}

/// Detected count rate for a pulsed source: pulse rate × per-pulse
/// collection probability × system efficiency (counts per second).
pub fn count_rate_budget(
    pulse_rate_hz: f64,
    collection_probability: f64,
    system_efficiency: f64,
) -> f64 {
    pulse_rate_hz * collection_probability * system_efficiency
}
