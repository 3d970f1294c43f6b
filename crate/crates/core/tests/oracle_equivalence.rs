//! The Lindblad regression oracle against the closed-form correlation
//! functions: the derived interference exponent must agree to 1e-3
//! sup-norm, and the as-published exponent must disagree whenever pure
//! dephasing is present.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wgqed_core::analytic::{g2_two_emitter, ExponentForm};
use wgqed_core::dicke::{two_time_g2_oracle, OracleOptions};
use wgqed_core::units::{EmitterParams, TwoEmitterSystem};

fn random_equal_rate_system(rng: &mut ChaCha8Rng) -> TwoEmitterSystem {
    let gamma = 0.5 + 1.5 * rng.gen::<f64>();
    let gamma_wg = gamma * (0.3 + 0.7 * rng.gen::<f64>());
    let inv_t2 = 0.3 + 2.7 * rng.gen::<f64>(); // strictly positive dephasing
    let t2 = 1.0 / inv_t2;
    let delta = 8.0 * (rng.gen::<f64>() - 0.5);
    let phi = std::f64::consts::TAU * rng.gen::<f64>();
    let a = EmitterParams::new(delta / 2.0, gamma, gamma_wg, t2, 0.0).unwrap();
    let b = EmitterParams::new(-delta / 2.0, gamma, gamma_wg, t2, phi).unwrap();
    TwoEmitterSystem::new(a, b, 1.0).unwrap()
}

#[test]
fn oracle_agrees_with_derived_form_and_rejects_published_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c0ffee);
    for trial in 0..5 {
        let sys = random_equal_rate_system(&mut rng);
        let gamma = sys.gamma();
        let taus: Vec<f64> = (0..=48).map(|i| i as f64 * 0.125 / gamma).collect();
        let oracle = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();

        let mut sup_derived = 0.0f64;
        let mut sup_paper = 0.0f64;
        for (t, v) in oracle.delays.iter().zip(&oracle.values) {
            sup_derived = sup_derived.max((v - g2_two_emitter(&sys, *t, ExponentForm::Derived)).abs());
            sup_paper = sup_paper.max((v - g2_two_emitter(&sys, *t, ExponentForm::Paper)).abs());
        }
        assert!(
            sup_derived < 1e-3,
            "trial {trial}: derived-form sup-norm {sup_derived}"
        );
        assert!(
            sup_paper > 1e-3,
            "trial {trial}: published exponent should not match the oracle with 1/T₂ > 0, sup {sup_paper}"
        );
    }
}

#[test]
fn oracle_swap_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sys = random_equal_rate_system(&mut rng);
    let taus: Vec<f64> = (0..=20).map(|i| i as f64 * 0.2).collect();
    let c1 = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
    let c2 = two_time_g2_oracle(&sys.swapped(), &taus, &OracleOptions::default()).unwrap();
    for (a, b) in c1.values.iter().zip(&c2.values) {
        assert!((a - b).abs() < 1e-9);
    }
}
