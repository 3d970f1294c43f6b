//! `wgqed device`: waveguide and thermal-tuning formula evaluations.

use std::path::Path;

use wgqed_core::device::{
    chain_efficiency, group_index, match_resonance, purcell_formula, thermal_sweep,
    EfficiencyChain, ThermalModel,
};

use crate::{write_file, CliError};

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

pub fn cmd_group_index(lambda_nm: f64, length_um: f64, dlambda_nm: f64) -> Result<String, CliError> {
    let ng = group_index(lambda_nm, length_um, dlambda_nm).map_err(input_err)?;
    Ok(format!("n_g = {ng:.4} (λ = {lambda_nm} nm, l = {length_um} μm, Δλ = {dlambda_nm} nm)"))
}

pub fn cmd_purcell(
    lambda_nm: f64,
    refractive_index: f64,
    q: f64,
    v_mode: f64,
    field_ratio: f64,
) -> Result<String, CliError> {
    let f = purcell_formula(lambda_nm, refractive_index, q, v_mode, field_ratio).map_err(input_err)?;
    Ok(format!("F_P = {f:.4} (Q = {q}, V = {v_mode} (λ/n)³, field ratio {field_ratio})"))
}

pub fn cmd_match(delta_uev: f64, model: &ThermalModel) -> Result<String, CliError> {
    model.validate().map_err(input_err)?;
    let p = match_resonance(delta_uev, model).map_err(input_err)?;
    Ok(format!("heating power for ΔE = {delta_uev} μeV: {p:.2} μW"))
}

pub fn cmd_efficiency(stages: &[f64]) -> Result<String, CliError> {
    let chain = EfficiencyChain::from_values(stages).map_err(input_err)?;
    let eff = chain_efficiency(&chain).map_err(input_err)?;
    Ok(format!("chain efficiency = {:.4}% ({} stages)", eff * 100.0, stages.len()))
}

pub fn cmd_thermal_sweep(
    lambda_a_nm: f64,
    lambda_b_nm: f64,
    p_max_uw: f64,
    p_step_uw: f64,
    model: &ThermalModel,
    out: Option<&Path>,
) -> Result<String, CliError> {
    model.validate().map_err(input_err)?;
    let points =
        thermal_sweep(lambda_a_nm, lambda_b_nm, p_max_uw, p_step_uw, model).map_err(input_err)?;
    let mut csv = String::from("power_uW,lambdaA_nm,lambdaB_nm\n");
    for p in &points {
        csv.push_str(&format!("{},{},{}\n", p.power_uw, p.lambda_a_nm, p.lambda_b_nm));
    }
    // Report the crossing if the sweep reaches it.
    let crossing = points
        .windows(2)
        .find(|w| {
            (w[0].lambda_b_nm - w[0].lambda_a_nm) * (w[1].lambda_b_nm - w[1].lambda_a_nm) <= 0.0
        })
        .map(|w| 0.5 * (w[0].power_uw + w[1].power_uw));
    let note = match crossing {
        Some(p) => format!("wavelength crossing near {p:.1} μW"),
        None => "no crossing within the sweep range".into(),
    };
    match out {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            Ok(format!("wrote {} ({} points); {note}", path.display(), points.len()))
        }
        None => Ok(format!("{csv}{note}")),
    }
}
