//! The concrete fit models: pulsed correlation trains, CW two-emitter
//! correlations, Lorentzian spectra and exponential lifetimes.

use std::io::BufRead;

use super::lm::{minimize, FitOptions};
use super::{FitError, FitResult, FittedParam, Spectrum};
use crate::analytic::{ExponentForm, FWHM_TO_SIGMA};
use crate::hbt::CorrelationHistogram;
use crate::units::wavelength_to_energy;

fn smooth5(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

/* Pulsed correlation fit *****************************************************/

/// Exponential-train model value integrated over one bin:
/// Σ_n A_n·⟨e^{−|τ−nT|/τ_d}⟩_bin with A_0 free and all side peaks sharing A.
fn pulsed_model_bin(
    lo: f64,
    hi: f64,
    a_side: f64,
    a_center: f64,
    tau_d: f64,
    period: f64,
) -> f64 {
    let tau_d = tau_d.abs().max(1e-9);
    let antider = |y: f64| -> f64 { y.signum() * tau_d * (1.0 - (-y.abs() / tau_d).exp()) };
    let center = 0.5 * (lo + hi);
    let mut value = 0.0;
    // Nearest-neighbor truncation for well-separated peaks; the full train
    // otherwise.
    let (n_lo, n_hi) = if tau_d < period / 5.0 {
        let n = (center / period).round() as i64;
        (n, n)
    } else {
        (
            ((lo - 10.0 * tau_d) / period).floor() as i64,
            ((hi + 10.0 * tau_d) / period).ceil() as i64,
        )
    };
    for n in n_lo..=n_hi {
        let c = n as f64 * period;
        let amp = if n == 0 { a_center } else { a_side };
        value += amp * (antider(hi - c) - antider(lo - c)) / (hi - lo);
    }
    value
}

/// Fit a pulsed correlation histogram to a two-sided-exponential peak train.
///
/// Reports the shared side-peak amplitude, the center amplitude, the decay
/// time, the normalized center ratio `g2_zero = A₀/A`, and (when enough
/// maxima are visible) the measured peak spacing.
pub fn fit_pulsed_g2(
    hist: &CorrelationHistogram,
    rep_period_ns: f64,
) -> Result<FitResult, FitError> {
    if !(rep_period_ns > 0.0) {
        return Err(FitError::BadInput("repetition period must be positive".into()));
    }
    let half_span = -hist.tau_min_ns;
    let n_side = 2 * ((half_span - rep_period_ns / 4.0) / rep_period_ns).floor() as usize;
    if n_side < 5 {
        return Err(FitError::TooFewPeaks { found: n_side, needed: 5 });
    }

    let centers = hist.centers();
    let counts = &hist.counts;
    let in_window = |c: f64, target: f64| (c - target).abs() <= rep_period_ns / 4.0;

    // Initial guesses from the raw peak heights.
    let mut side_heights = Vec::new();
    let n_max = (half_span / rep_period_ns).floor() as i64;
    for n in -n_max..=n_max {
        if n == 0 {
            continue;
        }
        let target = n as f64 * rep_period_ns;
        let h = centers
            .iter()
            .zip(counts)
            .filter(|(c, _)| in_window(**c, target))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        if h > 0.0 {
            side_heights.push(h);
        }
    }
    if side_heights.is_empty() {
        return Err(FitError::NoDecay);
    }
    side_heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let a_init = side_heights[side_heights.len() / 2];
    let a0_init = centers
        .iter()
        .zip(counts)
        .filter(|(c, _)| in_window(**c, 0.0))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);

    let edges = hist.edges();
    let residuals = |p: &[f64]| -> Vec<f64> {
        (0..counts.len())
            .map(|i| {
                let model =
                    pulsed_model_bin(edges[i], edges[i + 1], p[0], p[1], p[2], rep_period_ns);
                (model - counts[i]) / counts[i].max(1.0).sqrt()
            })
            .collect()
    };

    let init = [a_init, a0_init.max(1e-6), rep_period_ns / 10.0];
    let min = minimize(&init, &[true, true, true], residuals, &FitOptions::default())?;

    let (a, a0, tau_d) = (min.params[0], min.params[1], min.params[2].abs());
    let g2_zero = a0 / a;
    // Ratio variance by first-order propagation from the (a, a0) covariance.
    let da = -a0 / (a * a);
    let d0 = 1.0 / a;
    let var_g = da * da * min.covariance[0][0]
        + d0 * d0 * min.covariance[1][1]
        + 2.0 * da * d0 * min.covariance[0][1];

    let mut params = vec![
        FittedParam { name: "a_side".into(), value: a, sigma: min.covariance[0][0].sqrt() },
        FittedParam { name: "a_center".into(), value: a0, sigma: min.covariance[1][1].sqrt() },
        FittedParam { name: "tau_decay_ns".into(), value: tau_d, sigma: min.covariance[2][2].sqrt() },
        FittedParam { name: "g2_zero".into(), value: g2_zero, sigma: var_g.max(0.0).sqrt() },
    ];
    let mut warnings = Vec::new();

    // Peak-spacing estimate straight from the smoothed histogram.
    let smooth = smooth5(counts);
    let peak_positions: Vec<f64> = local_maxima(&smooth)
        .into_iter()
        .filter(|&i| smooth[i] > 0.3 * a)
        .map(|i| centers[i])
        .collect();
    let gaps: Vec<f64> = peak_positions
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.5 * rep_period_ns && g < 1.5 * rep_period_ns)
        .collect();
    if gaps.len() >= 2 {
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
        params.push(FittedParam { name: "peak_spacing_ns".into(), value: mean, sigma: var.sqrt() });
    } else {
        warnings.push("too few resolved maxima for a peak-spacing estimate".into());
    }

    Ok(FitResult { params, rss: min.rss, iterations: min.iterations, converged: min.converged, warnings })
}

/* CW correlation fit *********************************************************/

/// Forward model for the CW two-emitter correlation: the closed-form curve,
/// Gaussian detector response, Poissonian background and an overall
/// normalization scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwG2Model {
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub rho: f64,
    pub jitter_fwhm_ns: f64,
    pub norm: f64,
}

/// Which parameters [`fit_cw_g2`] is allowed to vary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwFreeMask {
    pub gamma: bool,
    pub beta: bool,
    pub delta: bool,
    pub rho: bool,
    pub jitter: bool,
    pub norm: bool,
}

impl CwFreeMask {
    pub fn all_fixed() -> Self {
        Self { gamma: false, beta: false, delta: false, rho: false, jitter: false, norm: false }
    }

    fn to_array(self) -> [bool; 6] {
        [self.gamma, self.beta, self.delta, self.rho, self.jitter, self.norm]
    }
}

impl CwG2Model {
    fn to_vec(self) -> [f64; 6] {
        [self.gamma, self.beta, self.delta, self.rho, self.jitter_fwhm_ns, self.norm]
    }

    fn from_slice(p: &[f64]) -> Self {
        Self {
            gamma: p[0].abs(),
            beta: p[1].abs(),
            delta: p[2],
            rho: p[3].clamp(0.0, 1.0),
            jitter_fwhm_ns: p[4].abs(),
            norm: p[5],
        }
    }

    /// Zero-delay value of the background-corrected model with beats faster
    /// than the detector response averaged out: the interference amplitude
    /// is weighted by exp(−(Δσ)²/2), so a resolved peak keeps its full
    /// height while an unresolved beat collapses to the distinguishable
    /// value.
    pub fn g2_zero(&self) -> f64 {
        let sigma = self.jitter_fwhm_ns / FWHM_TO_SIGMA;
        let suppression = (-(self.delta * sigma).powi(2) / 2.0).exp();
        self.norm * (1.0 - self.rho * self.rho * (1.0 - suppression) / 2.0)
    }

    /// Model averaged over each histogram bin: fine sampling, Gaussian
    /// convolution, background, normalization, then bin means.
    pub fn predict_binned(
        &self,
        tau_min: f64,
        bin_width: f64,
        n_bins: usize,
        form: ExponentForm,
    ) -> Vec<f64> {
        let sigma = self.jitter_fwhm_ns / FWHM_TO_SIGMA;
        let mut h_target = bin_width / 4.0;
        if sigma > 0.0 {
            h_target = h_target.min(sigma / 3.0);
        }
        if self.delta.abs() > 0.0 {
            h_target = h_target.min(std::f64::consts::TAU / self.delta.abs() / 12.0);
        }
        let mut m = (bin_width / h_target).ceil() as usize;
        // Bound the work for absurd trial parameters.
        let cap = (4_000_000 / n_bins.max(1)).max(4);
        m = m.clamp(1, cap);
        let h = bin_width / m as f64;
        let k_half = if sigma > 0.0 { (5.0 * sigma / h).ceil() as usize } else { 0 };

        let decay = match form {
            ExponentForm::Derived => 2.0 * self.beta,
            ExponentForm::Paper => self.beta,
        };
        let raw_at = |t: f64| -> f64 {
            let at = t.abs();
            0.5 * (2.0 + (self.delta * at).cos() * (-decay * at).exp() - (-self.gamma * at).exp())
        };

        let n_central = n_bins * m;
        let n_fine = n_central + 2 * k_half;
        let raw: Vec<f64> = (0..n_fine)
            .map(|j| raw_at(tau_min + ((j as f64 - k_half as f64) + 0.5) * h))
            .collect();

        let convolved: Vec<f64> = if k_half == 0 {
            raw[..n_central].to_vec()
        } else {
            let kernel: Vec<f64> = (0..=2 * k_half)
                .map(|d| {
                    let x = (d as f64 - k_half as f64) * h;
                    (-x * x / (2.0 * sigma * sigma)).exp()
                })
                .collect();
            let ksum: f64 = kernel.iter().sum();
            (0..n_central)
                .map(|i| {
                    kernel.iter().enumerate().map(|(d, kd)| kd * raw[i + d]).sum::<f64>() / ksum
                })
                .collect()
        };

        let rho2 = self.rho * self.rho;
        (0..n_bins)
            .map(|i| {
                let mean: f64 =
                    convolved[i * m..(i + 1) * m].iter().sum::<f64>() / m as f64;
                self.norm * (1.0 + rho2 * (mean - 1.0))
            })
            .collect()
    }
}

/// Fit a normalized CW correlation histogram to the two-emitter model.
///
/// Free parameters are selected by `free`; fixed ones keep their `init`
/// value. The derived entries report the zero-delay value of the fitted
/// model ([`CwG2Model::g2_zero`]) and the coherence time under both
/// exponent readings, 1/β and 1/(2β).
pub fn fit_cw_g2(
    hist: &CorrelationHistogram,
    form: ExponentForm,
    init: &CwG2Model,
    free: &CwFreeMask,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    let data = hist.normalized();
    let level = hist.accidental_level();
    if !(level > 0.0) {
        return Err(FitError::BadInput("histogram lacks singles-rate metadata".into()));
    }
    let n = data.len();
    if n < 10 {
        return Err(FitError::BadInput("histogram too short for a CW fit".into()));
    }

    let mut warnings = Vec::new();
    let wing = (n / 10).max(1);
    let wing_mean = (data[..wing].iter().sum::<f64>() + data[n - wing..].iter().sum::<f64>())
        / (2 * wing) as f64;
    if !(0.8..=1.2).contains(&wing_mean) {
        warnings.push(format!(
            "far wings average {wing_mean:.3}; expected ≈ 1 for a normalized histogram"
        ));
    }

    let sigmas: Vec<f64> = hist.counts.iter().map(|&c| c.max(1.0).sqrt() / level).collect();
    let (tau_min, w) = (hist.tau_min_ns, hist.bin_width_ns);
    let residuals = |p: &[f64]| -> Vec<f64> {
        let model = CwG2Model::from_slice(p).predict_binned(tau_min, w, n, form);
        model
            .iter()
            .zip(&data)
            .zip(&sigmas)
            .map(|((m, d), s)| (m - d) / s)
            .collect()
    };

    let min = minimize(&init.to_vec(), &free.to_array(), residuals, opts)?;
    let fitted = CwG2Model::from_slice(&min.params);

    let sigma_jit = fitted.jitter_fwhm_ns / FWHM_TO_SIGMA;
    if (fitted.delta * sigma_jit).abs() > 3.0 {
        warnings.push(
            "detuning beat is far below the detector resolution (Δ·σ ≫ 1); \
             delta is not identifiable from this histogram"
                .into(),
        );
    }

    let names = ["gamma_per_ns", "beta_per_ns", "delta_per_ns", "rho", "jitter_fwhm_ns", "norm"];
    let mut params: Vec<FittedParam> = names
        .iter()
        .enumerate()
        .map(|(i, name)| FittedParam {
            name: (*name).into(),
            value: fitted.to_vec()[i],
            sigma: min.covariance[i][i].max(0.0).sqrt(),
        })
        .collect();

    // g2(0) of the fitted model with gradient-propagated uncertainty.
    let suppression = (-(fitted.delta * sigma_jit).powi(2) / 2.0).exp();
    let g2_zero = fitted.g2_zero();
    let dw_ddelta = -fitted.delta * sigma_jit * sigma_jit * suppression;
    let dw_djit = -fitted.delta * fitted.delta * sigma_jit * suppression / FWHM_TO_SIGMA;
    let half_rho2 = fitted.rho * fitted.rho / 2.0;
    let grad = [
        0.0,
        0.0,
        fitted.norm * half_rho2 * dw_ddelta,
        -fitted.norm * fitted.rho * (1.0 - suppression),
        fitted.norm * half_rho2 * dw_djit,
        g2_zero / fitted.norm.max(1e-300),
    ];
    let mut var_g = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            var_g += grad[i] * grad[j] * min.covariance[i][j];
        }
    }
    params.push(FittedParam { name: "g2_zero".into(), value: g2_zero, sigma: var_g.max(0.0).sqrt() });

    let beta_sigma = min.covariance[1][1].max(0.0).sqrt();
    params.push(FittedParam {
        name: "coherence_time_1_over_beta_ns".into(),
        value: 1.0 / fitted.beta,
        sigma: beta_sigma / (fitted.beta * fitted.beta),
    });
    params.push(FittedParam {
        name: "coherence_time_1_over_2beta_ns".into(),
        value: 1.0 / (2.0 * fitted.beta),
        sigma: beta_sigma / (2.0 * fitted.beta * fitted.beta),
    });

    Ok(FitResult { params, rss: min.rss, iterations: min.iterations, converged: min.converged, warnings })
}

/* Lorentzian spectral fit ****************************************************/

/// Fit a spectrum to `n_peaks` Lorentzians plus a constant baseline.
///
/// Parameter layout per peak k (sorted by center): `center_k_nm`,
/// `fwhm_k_nm`, `amplitude_k`; derived entries give the center in μeV (with
/// the uncertainty converted to μeV) and, for two peaks, their energy
/// separation. Peaks closer than half a linewidth raise an overlap warning;
/// separations at or below 10 μeV are classified as overlapped.
pub fn fit_lorentzian(spectrum: &Spectrum, n_peaks: usize) -> Result<FitResult, FitError> {
    spectrum.validate()?;
    if n_peaks == 0 {
        return Err(FitError::BadInput("n_peaks must be at least 1".into()));
    }
    let lambda = &spectrum.wavelength_nm;
    let counts = &spectrum.counts;
    let n = lambda.len();
    if n < 3 * n_peaks + 2 {
        return Err(FitError::BadInput("spectrum too short for the requested peak count".into()));
    }
    let span = lambda[n - 1] - lambda[0];

    // Initial peaks: tallest smoothed local maxima, padded with quantile
    // positions when detection finds fewer than requested.
    let smooth = smooth5(counts);
    let mut maxima = local_maxima(&smooth);
    maxima.sort_by(|&a, &b| smooth[b].partial_cmp(&smooth[a]).unwrap());
    let mut centers_init: Vec<f64> = Vec::new();
    for &i in &maxima {
        if centers_init.iter().all(|&c: &f64| (c - lambda[i]).abs() > span / 50.0) {
            centers_init.push(lambda[i]);
        }
        if centers_init.len() == n_peaks {
            break;
        }
    }
    let mut fill = 1;
    while centers_init.len() < n_peaks {
        let base = *centers_init.first().unwrap_or(&(lambda[0] + span / 2.0));
        centers_init.push(base + fill as f64 * span / 40.0);
        fill += 1;
    }

    let baseline_init = counts.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp_init = counts.iter().cloned().fold(0.0, f64::max) - baseline_init;
    let width_init = span / 30.0;

    let mut init = vec![baseline_init];
    for c in &centers_init {
        init.extend_from_slice(&[*c, width_init, amp_init]);
    }
    let free = vec![true; init.len()];

    let noise: Vec<f64> = match &spectrum.noise {
        Some(v) => v.clone(),
        None => counts.iter().map(|&c| c.max(1.0).sqrt()).collect(),
    };
    let residuals = |p: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut v = p[0];
                for k in 0..n_peaks {
                    let (c, wdt, a) = (p[1 + 3 * k], p[2 + 3 * k].abs().max(1e-9), p[3 + 3 * k]);
                    let x = 2.0 * (lambda[i] - c) / wdt;
                    v += a / (1.0 + x * x);
                }
                (v - counts[i]) / noise[i]
            })
            .collect()
    };

    let min = minimize(&init, &free, residuals, &FitOptions::default())?;

    // Sort fitted peaks by center for stable naming.
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| min.params[1 + 3 * a].partial_cmp(&min.params[1 + 3 * b]).unwrap());

    let mut params = vec![FittedParam {
        name: "baseline".into(),
        value: min.params[0],
        sigma: min.covariance[0][0].max(0.0).sqrt(),
    }];
    let mut warnings = Vec::new();
    let mut centers_uev: Vec<(f64, f64)> = Vec::new();
    let mut fwhms = Vec::new();
    for (slot, &k) in order.iter().enumerate() {
        let (ci, wi, ai) = (1 + 3 * k, 2 + 3 * k, 3 + 3 * k);
        let c = min.params[ci];
        let w = min.params[wi].abs();
        let c_sigma = min.covariance[ci][ci].max(0.0).sqrt();
        let idx = slot + 1;
        params.push(FittedParam { name: format!("center_{idx}_nm"), value: c, sigma: c_sigma });
        params.push(FittedParam {
            name: format!("fwhm_{idx}_nm"),
            value: w,
            sigma: min.covariance[wi][wi].max(0.0).sqrt(),
        });
        params.push(FittedParam {
            name: format!("amplitude_{idx}"),
            value: min.params[ai],
            sigma: min.covariance[ai][ai].max(0.0).sqrt(),
        });
        // Center in energy units, with the uncertainty converted too.
        let e_uev = wavelength_to_energy(c).map_err(|e| FitError::BadInput(e.to_string()))? * 1.0e3;
        let e_sigma = e_uev * c_sigma / c;
        params.push(FittedParam { name: format!("center_{idx}_uev"), value: e_uev, sigma: e_sigma });
        centers_uev.push((e_uev, e_sigma));
        fwhms.push(w);
    }

    if n_peaks == 2 {
        let sep = (centers_uev[0].0 - centers_uev[1].0).abs();
        let sep_sigma = (centers_uev[0].1.powi(2) + centers_uev[1].1.powi(2)).sqrt();
        params.push(FittedParam { name: "separation_uev".into(), value: sep, sigma: sep_sigma });
        if sep <= 10.0 {
            warnings.push("peaks overlapped: separation within 10 μeV".into());
        }
        let c1 = params.iter().find(|p| p.name == "center_1_nm").unwrap().value;
        let c2 = params.iter().find(|p| p.name == "center_2_nm").unwrap().value;
        let mean_fwhm = (fwhms[0] + fwhms[1]) / 2.0;
        if (c2 - c1).abs() < mean_fwhm / 2.0 {
            warnings.push("peak separation below half the linewidth; centers may trade off".into());
        }
    }

    Ok(FitResult { params, rss: min.rss, iterations: min.iterations, converged: min.converged, warnings })
}

/* Lifetime fit ***************************************************************/

/// A time-resolved decay trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub t_ns: Vec<f64>,
    pub counts: Vec<f64>,
}

impl DecayCurve {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.t_ns.len() != self.counts.len() || self.t_ns.len() < 8 {
            return Err(FitError::BadInput("decay curve too short".into()));
        }
        if self.t_ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FitError::BadInput("time axis must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, FitError> {
        let mut t_ns = Vec::new();
        let mut counts = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| FitError::Io(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("t_ns") {
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| FitError::BadInput(format!("malformed decay row `{line}`")))?;
            t_ns.push(t.trim().parse::<f64>().map_err(|_| FitError::BadInput(line.into()))?);
            counts.push(v.trim().parse::<f64>().map_err(|_| FitError::BadInput(line.into()))?);
        }
        let curve = Self { t_ns, counts };
        curve.validate()?;
        Ok(curve)
    }
}

/// Single-exponential lifetime fit with a flat background taken from the
/// pre-pulse region (fitted when no such region exists).
pub fn fit_lifetime(curve: &DecayCurve) -> Result<FitResult, FitError> {
    curve.validate()?;
    let counts = &curve.counts;
    let max = counts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_c = counts.iter().cloned().fold(f64::INFINITY, f64::min);
    if max - min_c <= 1e-9 * max.abs().max(1.0) {
        return Err(FitError::NoDecay);
    }

    let peak = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .expect("nonempty");

    // Flat background from the pre-pulse bins when available.
    let (bg_init, bg_free) = if peak >= 3 {
        (counts[..peak - 1].iter().sum::<f64>() / (peak - 1) as f64, false)
    } else {
        (min_c, true)
    };

    let t_peak = curve.t_ns[peak];
    let tail_t: Vec<f64> = curve.t_ns[peak..].to_vec();
    let tail_c: Vec<f64> = counts[peak..].to_vec();
    if tail_t.len() < 4 {
        return Err(FitError::NoDecay);
    }

    // Crude rate guess from the 1/e crossing.
    let amp_init = (max - bg_init).max(1e-12);
    let target = bg_init + amp_init / std::f64::consts::E;
    let gamma_init = tail_t
        .iter()
        .zip(&tail_c)
        .find(|(_, &c)| c < target)
        .map(|(&t, _)| 1.0 / (t - t_peak).max(1e-6))
        .unwrap_or(1.0);

    let residuals = |p: &[f64]| -> Vec<f64> {
        tail_t
            .iter()
            .zip(&tail_c)
            .map(|(&t, &c)| {
                let model = p[0] * (-p[1] * (t - t_peak)).exp() + p[2];
                (model - c) / c.max(1.0).sqrt()
            })
            .collect()
    };

    let min = minimize(
        &[amp_init, gamma_init, bg_init],
        &[true, true, bg_free],
        residuals,
        &FitOptions::default(),
    )?;
    let gamma = min.params[1];
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(FitError::NoDecay);
    }

    Ok(FitResult {
        params: vec![
            FittedParam {
                name: "gamma_per_ns".into(),
                value: gamma,
                sigma: min.covariance[1][1].max(0.0).sqrt(),
            },
            FittedParam {
                name: "amplitude".into(),
                value: min.params[0],
                sigma: min.covariance[0][0].max(0.0).sqrt(),
            },
            FittedParam {
                name: "background".into(),
                value: min.params[2],
                sigma: min.covariance[2][2].max(0.0).sqrt(),
            },
        ],
        rss: min.rss,
        iterations: min.iterations,
        converged: min.converged,
        warnings: Vec::new(),
    })
}
