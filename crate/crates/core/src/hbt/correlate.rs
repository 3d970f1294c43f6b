//! Full-coincidence histogrammer (TCSPC-style, all pairs).

use super::{CorrelationHistogram, HbtError};

/// Histogram every click pair with |t_B − t_A| inside the delay window.
///
/// The delay axis is τ = t_B − t_A; the bin count is forced odd so the
/// center bin straddles τ = 0. Inputs must be sorted ascending. The sweep is
/// a two-pointer pass, O(n_A + n_B + pairs).
pub fn correlate(
    clicks_a: &[f64],
    clicks_b: &[f64],
    bin_width_ns: f64,
    max_delay_ns: f64,
    acquisition_ns: f64,
) -> Result<CorrelationHistogram, HbtError> {
    if !(bin_width_ns > 0.0) {
        return Err(HbtError::NonPositive { name: "bin_width_ns", value: bin_width_ns });
    }
    if !(max_delay_ns >= bin_width_ns) {
        return Err(HbtError::NonPositive {
            name: "max_delay_ns - bin_width_ns",
            value: max_delay_ns - bin_width_ns,
        });
    }
    if !(acquisition_ns > 0.0) {
        return Err(HbtError::NonPositive { name: "acquisition_ns", value: acquisition_ns });
    }
    for clicks in [clicks_a, clicks_b] {
        if clicks.windows(2).any(|w| w[1] < w[0]) {
            return Err(HbtError::UnsortedStream);
        }
    }

    let n_bins = 2 * (max_delay_ns / bin_width_ns).floor() as usize + 1;
    let half_span = n_bins as f64 * bin_width_ns / 2.0;
    let mut counts = vec![0.0f64; n_bins];

    let mut j_lo = 0usize;
    for &ta in clicks_a {
        while j_lo < clicks_b.len() && clicks_b[j_lo] < ta - half_span {
            j_lo += 1;
        }
        for &tb in &clicks_b[j_lo..] {
            let tau = tb - ta;
            if tau >= half_span {
                break;
            }
            let idx = ((tau + half_span) / bin_width_ns) as usize;
            counts[idx.min(n_bins - 1)] += 1.0;
        }
    }

    Ok(CorrelationHistogram {
        bin_width_ns,
        tau_min_ns: -half_span,
        counts,
        acquisition_ns,
        singles_rate_a_per_ns: clicks_a.len() as f64 / acquisition_ns,
        singles_rate_b_per_ns: clicks_b.len() as f64 / acquisition_ns,
        subtracted_floor_per_bin: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poisson_clicks(rate: f64, duration: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0.0;
        let mut out = Vec::new();
        loop {
            let u: f64 = rng.gen();
            t += -(1.0 - u).ln() / rate;
            if t >= duration {
                return out;
            }
            out.push(t);
        }
    }

    #[test]
    fn independent_poisson_gives_flat_floor() {
        let duration = 2.0e5;
        let (r1, r2) = (0.02, 0.03);
        let a = poisson_clicks(r1, duration, 1);
        let b = poisson_clicks(r2, duration, 2);
        let hist = correlate(&a, &b, 1.0, 20.0, duration).unwrap();
        let expected = r1 * r2 * 1.0 * duration;
        for &c in &hist.counts {
            assert_abs_diff_eq!(c, expected, epsilon = 3.0 * expected.sqrt());
        }
        assert_abs_diff_eq!(
            hist.accidental_level(),
            (a.len() as f64 / duration) * (b.len() as f64 / duration) * duration,
            epsilon = 1.0
        );
    }

    #[test]
    fn shared_photon_spikes_at_zero() {
        let times: Vec<f64> = (1..100).map(|i| i as f64 * 3.7).collect();
        let hist = correlate(&times, &times, 0.5, 10.0, 400.0).unwrap();
        let centers = hist.centers();
        let center_idx = hist.counts.len() / 2;
        assert!(centers[center_idx].abs() < 1e-9);
        assert_eq!(hist.counts[center_idx], 99.0);
        // Nearest pair spacing is 3.7 ns, within the window: side counts.
        let total: f64 = hist.counts.iter().sum();
        assert!(total > 99.0);
    }

    #[test]
    fn rejects_bad_bins() {
        assert!(correlate(&[1.0], &[1.0], 0.0, 10.0, 100.0).is_err());
        assert!(correlate(&[1.0], &[1.0], 1.0, 0.5, 100.0).is_err());
        assert!(correlate(&[2.0, 1.0], &[1.0], 1.0, 10.0, 100.0).is_err());
    }

    #[test]
    fn histogram_counts_are_integral() {
        let a = poisson_clicks(0.01, 1e4, 7);
        let b = poisson_clicks(0.01, 1e4, 8);
        let hist = correlate(&a, &b, 0.5, 10.0, 1e4).unwrap();
        assert!(hist.counts.iter().all(|c| c.fract() == 0.0 && *c >= 0.0));
    }
}
