//! Shared domain types and unit conventions.
//!
//! Canonical units used throughout the toolkit:
//!
//! | quantity          | unit    |
//! |-------------------|---------|
//! | time              | ns      |
//! | rate              | 1/ns    |
//! | angular frequency | rad/ns  |
//! | energy            | μeV     |
//! | length            | μm      |
//! | wavelength        | nm      |
//!
//! Detunings are stored relative to a rotating frame at the mean emitter
//! frequency; only the difference `Δ = Δ_a − Δ_b` enters any correlation
//! formula, so the choice of frame is free.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1/ħ in rad·ns⁻¹ per μeV (ħ = 0.6582119569 μeV·ns).
pub const INV_HBAR: f64 = 1.519_267_447_9;

/// hc in eV·nm.
pub const HC_EV_NM: f64 = 1239.841_98;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("radiative rate must be positive, got {0} ns⁻¹")]
    NonPositiveGamma(f64),
    #[error("waveguide rate {gamma_wg} ns⁻¹ outside [0, γ = {gamma}]")]
    WaveguideRateOutOfRange { gamma_wg: f64, gamma: f64 },
    #[error("dephasing time must be positive, got {0} ns")]
    NonPositiveT2(f64),
    #[error("wavelength must be positive, got {0} nm")]
    NonPositiveWavelength(f64),
    #[error("value must be finite")]
    NonFinite,
}

/// Convert an energy splitting in μeV to an angular frequency in rad/ns.
pub fn energy_to_angular(energy_uev: f64) -> f64 {
    energy_uev * INV_HBAR
}

/// Inverse of [`energy_to_angular`].
pub fn angular_to_energy(omega_per_ns: f64) -> f64 {
    omega_per_ns / INV_HBAR
}

/// Photon energy in meV for a vacuum wavelength in nm.
pub fn wavelength_to_energy(lambda_nm: f64) -> Result<f64, UnitsError> {
    if !(lambda_nm > 0.0) {
        return Err(UnitsError::NonPositiveWavelength(lambda_nm));
    }
    Ok(1.0e3 * HC_EV_NM / lambda_nm)
}

/// Energy shift in μeV corresponding to a small wavelength shift `dlambda_nm`
/// around `lambda_nm`, |dE| = E·Δλ/λ.
pub fn wavelength_shift_to_energy(lambda_nm: f64, dlambda_nm: f64) -> Result<f64, UnitsError> {
    let e_mev = wavelength_to_energy(lambda_nm)?;
    Ok((e_mev * 1.0e3) * (dlambda_nm / lambda_nm).abs())
}

/// One two-level emitter coupled to the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    /// Detuning from the rotating frame (rad/ns).
    pub detuning: f64,
    /// Total radiative decay rate γ (1/ns).
    pub gamma: f64,
    /// Decay rate into the waveguide mode, 0 ≤ γ_wg ≤ γ (1/ns).
    pub gamma_wg: f64,
    /// Pure-dephasing time T₂ (ns); `f64::INFINITY` for none.
    pub t2: f64,
    /// Position along the waveguide (μm).
    pub position: f64,
}

impl EmitterParams {
    pub fn new(detuning: f64, gamma: f64, gamma_wg: f64, t2: f64, position: f64) -> Result<Self, UnitsError> {
        let p = Self { detuning, gamma, gamma_wg, t2, position };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), UnitsError> {
        if !self.detuning.is_finite() || !self.position.is_finite() {
            return Err(UnitsError::NonFinite);
        }
        if !(self.gamma > 0.0) {
            return Err(UnitsError::NonPositiveGamma(self.gamma));
        }
        if !(self.gamma_wg >= 0.0 && self.gamma_wg <= self.gamma) {
            return Err(UnitsError::WaveguideRateOutOfRange {
                gamma_wg: self.gamma_wg,
                gamma: self.gamma,
            });
        }
        if !(self.t2 > 0.0) {
            return Err(UnitsError::NonPositiveT2(self.t2));
        }
        Ok(())
    }

    /// Pure-dephasing rate 1/T₂ (1/ns); zero when T₂ is infinite.
    pub fn dephasing_rate(&self) -> f64 {
        if self.t2.is_infinite() {
            0.0
        } else {
            1.0 / self.t2
        }
    }

    /// Dipole coherence decay rate β = γ/2 + 1/T₂ (1/ns).
    pub fn beta(&self) -> f64 {
        self.gamma / 2.0 + self.dephasing_rate()
    }

    /// Rate into non-guided modes, γ − γ_wg (1/ns).
    pub fn gamma_nonguided(&self) -> f64 {
        self.gamma - self.gamma_wg
    }
}

/// A pair of emitters sharing one guided mode.
///
/// The analytic correlation forms assume the two emitters have identical
/// decay rates and dephasing times (they may differ for the numeric engines);
/// derived quantities [`Self::beta`] and [`Self::gamma`] are taken from
/// emitter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoEmitterSystem {
    pub emitter_a: EmitterParams,
    pub emitter_b: EmitterParams,
    /// Waveguide propagation constant (rad/μm).
    pub k: f64,
}

impl TwoEmitterSystem {
    pub fn new(emitter_a: EmitterParams, emitter_b: EmitterParams, k: f64) -> Result<Self, UnitsError> {
        emitter_a.validate()?;
        emitter_b.validate()?;
        if !k.is_finite() {
            return Err(UnitsError::NonFinite);
        }
        Ok(Self { emitter_a, emitter_b, k })
    }

    /// Propagation phase φ = k·(x_b − x_a), reduced to [0, 2π).
    pub fn phase(&self) -> f64 {
        waveguide_phase(self)
    }

    /// Emitter detuning difference Δ = Δ_a − Δ_b (rad/ns).
    pub fn delta(&self) -> f64 {
        self.emitter_a.detuning - self.emitter_b.detuning
    }

    /// Shared radiative decay rate (1/ns), from emitter a.
    pub fn gamma(&self) -> f64 {
        self.emitter_a.gamma
    }

    /// Shared coherence decay rate β = γ/2 + 1/T₂ (1/ns), from emitter a.
    pub fn beta(&self) -> f64 {
        self.emitter_a.beta()
    }

    /// System with the emitter labels exchanged.
    pub fn swapped(&self) -> Self {
        Self { emitter_a: self.emitter_b, emitter_b: self.emitter_a, k: self.k }
    }
}

/// Propagation phase k·(x_b − x_a) reduced to [0, 2π).
pub fn waveguide_phase(system: &TwoEmitterSystem) -> f64 {
    let raw = system.k * (system.emitter_b.position - system.emitter_a.position);
    let p = raw.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn emitter(detuning: f64) -> EmitterParams {
        EmitterParams::new(detuning, 0.8333, 0.6667, 0.317, 0.0).unwrap()
    }

    #[test]
    fn energy_to_angular_zero() {
        assert_eq!(energy_to_angular(0.0), 0.0);
    }

    #[test]
    fn energy_to_angular_paper_detunings() {
        // Independent route: ω = ΔE/ħ with ħ = 0.6582119569 μeV·ns.
        let hbar = 0.658_211_956_9;
        assert_relative_eq!(energy_to_angular(145.0), 145.0 / hbar, max_relative = 1e-9);
        assert_abs_diff_eq!(energy_to_angular(145.0), 220.29, epsilon = 5e-3);
        assert_abs_diff_eq!(energy_to_angular(10.0), 15.19, epsilon = 5e-3);
    }

    #[test]
    fn angular_energy_round_trip() {
        for &e in &[1e-6, 0.3, 10.0, 145.0, 610.0, 2.4e5] {
            let back = angular_to_energy(energy_to_angular(e));
            assert_relative_eq!(back, e, max_relative = 1e-12);
        }
    }

    #[test]
    fn wavelength_to_energy_definition_of_hc() {
        assert_relative_eq!(wavelength_to_energy(1239.841_98).unwrap(), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn wavelength_to_energy_emission_line() {
        assert_abs_diff_eq!(wavelength_to_energy(1314.5).unwrap(), 943.20, epsilon = 5e-3);
    }

    #[test]
    fn wavelength_shift_matches_spectral_mismatch() {
        // 0.2 nm at 1314.3 nm ≈ 143.5 μeV, close to the 145 μeV line mismatch.
        let de = wavelength_shift_to_energy(1314.3, 0.2).unwrap();
        assert_abs_diff_eq!(de, 143.5, epsilon = 0.1);
    }

    #[test]
    fn wavelength_rejects_nonpositive() {
        assert!(wavelength_to_energy(0.0).is_err());
        assert!(wavelength_to_energy(-1.0).is_err());
    }

    #[test]
    fn phase_wraps_full_period_to_zero() {
        let mut b = emitter(0.0);
        b.position = 2.0;
        let sys = TwoEmitterSystem::new(emitter(0.0), b, PI).unwrap();
        assert_eq!(sys.phase(), 0.0);
    }

    #[test]
    fn phase_half_period() {
        let mut b = emitter(0.0);
        b.position = 1.0;
        let sys = TwoEmitterSystem::new(emitter(0.0), b, PI).unwrap();
        assert_relative_eq!(sys.phase(), PI, max_relative = 1e-15);
    }

    #[test]
    fn phase_reduces_modulo_tau() {
        let mut b = emitter(0.0);
        b.position = 3.0;
        let sys = TwoEmitterSystem::new(emitter(0.0), b, 2.5).unwrap();
        assert_abs_diff_eq!(sys.phase(), 7.5 - TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.phase(), 1.2168, epsilon = 1e-4);
    }

    #[test]
    fn emitter_invariants_enforced() {
        assert!(EmitterParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(EmitterParams::new(0.0, 1.0, 1.1, 1.0, 0.0).is_err());
        assert!(EmitterParams::new(0.0, 1.0, 0.5, 0.0, 0.0).is_err());
        assert!(EmitterParams::new(0.0, 1.0, 0.5, f64::INFINITY, 0.0).is_ok());
    }

    #[test]
    fn beta_with_infinite_t2_is_half_gamma() {
        let e = EmitterParams::new(0.0, 1.0, 0.5, f64::INFINITY, 0.0).unwrap();
        assert_eq!(e.beta(), 0.5);
    }

    proptest! {
        #[test]
        fn energy_to_angular_is_linear(a in -1e4f64..1e4, b in -1e4f64..1e4) {
            let lhs = energy_to_angular(a + b);
            let rhs = energy_to_angular(a) + energy_to_angular(b);
            let scale = lhs.abs().max(rhs.abs()).max(1e-30);
            prop_assert!((lhs - rhs).abs() / scale < 1e-12);
        }

        #[test]
        fn delta_is_antisymmetric_under_swap(da in -300f64..300.0, db in -300f64..300.0) {
            let sys = TwoEmitterSystem::new(emitter(da), emitter(db), 1.0).unwrap();
            prop_assert_eq!(sys.delta(), -sys.swapped().delta());
        }

        #[test]
        fn phase_always_in_principal_range(k in -50f64..50.0, xa in -10f64..10.0, xb in -10f64..10.0) {
            let mut a = emitter(0.0);
            a.position = xa;
            let mut b = emitter(0.0);
            b.position = xb;
            let sys = TwoEmitterSystem::new(a, b, k).unwrap();
            let p = sys.phase();
            prop_assert!((0.0..TAU).contains(&p));
        }
    }
}
