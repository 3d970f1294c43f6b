//! Beamsplitter and detector stage of the HBT chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trajectory::{exp_draw, jitter_draw};
use super::{Channel, DetectorParams, HbtError, PhotonStream};
use crate::analytic::FWHM_TO_SIGMA;

/// Route each waveguide photon through a beamsplitter to two detectors.
///
/// Per photon: Bernoulli(`split_ratio`) routing to detector A, thinning by
/// the detector efficiency, then Gaussian timing jitter. Poissonian dark
/// counts are merged in per detector, and an optional dead time removes
/// clicks that follow an accepted click too closely. Returns the two sorted
/// click lists; deterministic given `seed`.
pub fn hbt_detect(
    stream: &PhotonStream,
    det_a: &DetectorParams,
    det_b: &DetectorParams,
    split_ratio: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), HbtError> {
    det_a.validate()?;
    det_b.validate()?;
    if !(split_ratio > 0.0 && split_ratio < 1.0) {
        return Err(HbtError::BadSplitRatio(split_ratio));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma_a = det_a.jitter_fwhm_ns / FWHM_TO_SIGMA;
    let sigma_b = det_b.jitter_fwhm_ns / FWHM_TO_SIGMA;

    let mut clicks_a = Vec::new();
    let mut clicks_b = Vec::new();
    for event in &stream.events {
        if event.channel != Channel::Waveguide {
            continue;
        }
        let (det, sigma, clicks) = if rng.gen::<f64>() < split_ratio {
            (det_a, sigma_a, &mut clicks_a)
        } else {
            (det_b, sigma_b, &mut clicks_b)
        };
        if rng.gen::<f64>() >= det.efficiency {
            continue;
        }
        let t = if sigma > 0.0 { event.t_ns + jitter_draw(&mut rng, sigma) } else { event.t_ns };
        clicks.push(t);
    }

    for (det, clicks) in [(det_a, &mut clicks_a), (det_b, &mut clicks_b)] {
        if det.dark_rate_per_ns > 0.0 {
            let mut t = exp_draw(&mut rng, det.dark_rate_per_ns);
            while t < stream.duration_ns {
                clicks.push(t);
                t += exp_draw(&mut rng, det.dark_rate_per_ns);
            }
        }
        clicks.sort_by(|a, b| a.partial_cmp(b).expect("finite click times"));
        if det.dead_time_ns > 0.0 {
            let mut kept = Vec::with_capacity(clicks.len());
            let mut last = f64::NEG_INFINITY;
            for &t in clicks.iter() {
                if t - last >= det.dead_time_ns {
                    kept.push(t);
                    last = t;
                }
            }
            *clicks = kept;
        }
    }

    Ok((clicks_a, clicks_b))
}
