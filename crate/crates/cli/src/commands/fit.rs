//! `wgqed fit`: dispatch input files to the estimation pipelines.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use wgqed_core::analytic::ExponentForm;
use wgqed_core::estimation::{
    fit_cw_g2, fit_lifetime, fit_lorentzian, fit_pulsed_g2, subtract_dark, CwFreeMask, CwG2Model,
    DecayCurve, FitOptions, FitResult, Spectrum,
};
use wgqed_core::hbt::{CorrelationHistogram, HistogramMeta};

use crate::{write_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    PulsedG2,
    CwG2,
    Lorentzian,
    Lifetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExponentArg {
    Derived,
    Paper,
}

impl ExponentArg {
    pub fn to_form(self) -> ExponentForm {
        match self {
            ExponentArg::Derived => ExponentForm::Derived,
            ExponentArg::Paper => ExponentForm::Paper,
        }
    }
}

pub struct FitArgs {
    pub input: PathBuf,
    pub model: FitModel,
    /// Histogram metadata sidecar; defaults to `<input stem>.meta.json`.
    pub meta: Option<PathBuf>,
    pub rep_period_ns: f64,
    pub n_peaks: usize,
    pub exponent: ExponentArg,
    /// Dark rates to subtract before pulsed fitting.
    pub dark_rate_a_per_ns: f64,
    pub dark_rate_b_per_ns: f64,
    pub init: CwG2Model,
    pub free: CwFreeMask,
    pub out: Option<PathBuf>,
    pub overlay: Option<PathBuf>,
}

fn open(path: &Path) -> Result<BufReader<std::fs::File>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

fn load_histogram(args: &FitArgs) -> Result<CorrelationHistogram, CliError> {
    let meta_path = match &args.meta {
        Some(p) => p.clone(),
        None => {
            let mut p = args.input.clone();
            p.set_extension("meta.json");
            p
        }
    };
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| {
        CliError::Input(format!(
            "cannot read histogram metadata {}: {e}",
            meta_path.display()
        ))
    })?;
    let meta: HistogramMeta = serde_json::from_str(&meta_text)
        .map_err(|e| CliError::Input(format!("{}: {e}", meta_path.display())))?;
    let hist = CorrelationHistogram::read_csv(open(&args.input)?, &meta)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if hist.counts.is_empty() {
        return Err(CliError::Input(format!("{}: no histogram rows", args.input.display())));
    }
    Ok(hist)
}

/// Two-column overlay of the data and the fitted model.
fn overlay_csv(x: &[f64], data: &[f64], model: &[f64]) -> String {
    let mut out = String::from("x,data,model\n");
    for ((xi, di), mi) in x.iter().zip(data).zip(model) {
        out.push_str(&format!("{xi},{di},{mi}\n"));
    }
    out
}

pub fn cmd_fit(args: &FitArgs) -> Result<(FitResult, String), CliError> {
    let numerical = |e: wgqed_core::estimation::FitError| CliError::Numerical(e.to_string());
    let (result, overlay) = match args.model {
        FitModel::PulsedG2 => {
            let hist = load_histogram(args)?;
            let hist = subtract_dark(&hist, args.dark_rate_a_per_ns, args.dark_rate_b_per_ns)
                .map_err(numerical)?;
            let fit = fit_pulsed_g2(&hist, args.rep_period_ns).map_err(numerical)?;
            // Overlay on the normalized-counts axis.
            let overlay = overlay_from_pulsed(&hist, &fit, args.rep_period_ns);
            (fit, overlay)
        }
        FitModel::CwG2 => {
            let hist = load_histogram(args)?;
            let fit = fit_cw_g2(
                &hist,
                args.exponent.to_form(),
                &args.init,
                &args.free,
                &FitOptions::default(),
            )
            .map_err(numerical)?;
            let fitted = CwG2Model {
                gamma: fit.value("gamma_per_ns").unwrap_or(args.init.gamma),
                beta: fit.value("beta_per_ns").unwrap_or(args.init.beta),
                delta: fit.value("delta_per_ns").unwrap_or(args.init.delta),
                rho: fit.value("rho").unwrap_or(args.init.rho),
                jitter_fwhm_ns: fit.value("jitter_fwhm_ns").unwrap_or(args.init.jitter_fwhm_ns),
                norm: fit.value("norm").unwrap_or(args.init.norm),
            };
            let model = fitted.predict_binned(
                hist.tau_min_ns,
                hist.bin_width_ns,
                hist.n_bins(),
                args.exponent.to_form(),
            );
            let overlay = overlay_csv(&hist.centers(), &hist.normalized(), &model);
            (fit, overlay)
        }
        FitModel::Lorentzian => {
            let spectrum = Spectrum::read_csv(open(&args.input)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let fit = fit_lorentzian(&spectrum, args.n_peaks).map_err(numerical)?;
            let model = lorentzian_model_of(&fit, args.n_peaks, &spectrum.wavelength_nm);
            let overlay = overlay_csv(&spectrum.wavelength_nm, &spectrum.counts, &model);
            (fit, overlay)
        }
        FitModel::Lifetime => {
            let curve = DecayCurve::read_csv(open(&args.input)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let fit = fit_lifetime(&curve).map_err(numerical)?;
            let model = lifetime_model_of(&fit, &curve);
            let overlay = overlay_csv(&curve.t_ns, &curve.counts, &model);
            (fit, overlay)
        }
    };

    if !result.converged {
        return Err(CliError::Numerical(format!(
            "fit did not converge after {} iterations (rss {})",
            result.iterations, result.rss
        )));
    }

    let json = result.to_json();
    if let Some(path) = &args.out {
        write_file(path, json.as_bytes())?;
    }
    if let Some(path) = &args.overlay {
        write_file(path, overlay.as_bytes())?;
    }
    Ok((result, json))
}

fn overlay_from_pulsed(hist: &CorrelationHistogram, fit: &FitResult, period: f64) -> String {
    let (a, a0, tau_d) = (
        fit.value("a_side").unwrap_or(0.0),
        fit.value("a_center").unwrap_or(0.0),
        fit.value("tau_decay_ns").unwrap_or(1.0),
    );
    let centers = hist.centers();
    let model: Vec<f64> = centers
        .iter()
        .map(|&t| {
            let mut v = 0.0;
            let n_lo = ((t - 10.0 * tau_d) / period).floor() as i64;
            let n_hi = ((t + 10.0 * tau_d) / period).ceil() as i64;
            for n in n_lo..=n_hi {
                let amp = if n == 0 { a0 } else { a };
                v += amp * (-(t - n as f64 * period).abs() / tau_d).exp();
            }
            v
        })
        .collect();
    overlay_csv(&centers, &hist.counts, &model)
}

fn lorentzian_model_of(fit: &FitResult, n_peaks: usize, lambda: &[f64]) -> Vec<f64> {
    let baseline = fit.value("baseline").unwrap_or(0.0);
    lambda
        .iter()
        .map(|&l| {
            let mut v = baseline;
            for k in 1..=n_peaks {
                let c = fit.value(&format!("center_{k}_nm")).unwrap_or(0.0);
                let w = fit.value(&format!("fwhm_{k}_nm")).unwrap_or(1.0);
                let a = fit.value(&format!("amplitude_{k}")).unwrap_or(0.0);
                let x = 2.0 * (l - c) / w;
                v += a / (1.0 + x * x);
            }
            v
        })
        .collect()
}

fn lifetime_model_of(fit: &FitResult, curve: &DecayCurve) -> Vec<f64> {
    let amp = fit.value("amplitude").unwrap_or(0.0);
    let gamma = fit.value("gamma_per_ns").unwrap_or(1.0);
    let bg = fit.value("background").unwrap_or(0.0);
    let peak_idx = curve
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let t_peak = curve.t_ns[peak_idx];
    curve
        .t_ns
        .iter()
        .map(|&t| if t < t_peak { bg } else { amp * (-gamma * (t - t_peak)).exp() + bg })
        .collect()
}
