//! Structural properties of the average-SNR closed forms.

mod common;

use common::{random_divisor, random_scenario};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_energy::channel::ChannelScenario;
use ris_energy::quantization::PhaseResolution;
use ris_energy::snr::{avg_snr_exact_perfect, avg_snr_general, quantization_loss_bound, SnrInputs};
use ris_energy::units::db_to_linear;

fn general(s: ChannelScenario, n: usize, p_pilot: f64, resolution: PhaseResolution) -> f64 {
    avg_snr_general(&SnrInputs {
        scenario: s,
        n,
        p_pilot,
        p_data: 0.1,
        resolution,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quantization_loss_is_bounded(
        rho_db in -130.0f64..-80.0,
        zero_rho in any::<bool>(),
        r in 0u32..=10,
        p_db in -40.0f64..10.0,
        bits in 1u32..=3,
    ) {
        let mut s = ChannelScenario::reference(rho_db);
        if zero_rho {
            s.rho = 0.0;
        }
        let n = 1usize << r;
        let p = db_to_linear(p_db);
        let ratio = general(s, n, p, PhaseResolution::Bits(bits)) / general(s, n, p, PhaseResolution::Infinite);
        prop_assert!(ratio >= quantization_loss_bound(1 << bits).unwrap() * (1.0 - 1e-12));
        prop_assert!(ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn more_pilot_power_never_hurts(rho_db in -130.0f64..-80.0, r in 0u32..=10, p_db in -40.0f64..10.0, bits in 1u32..=3) {
        let s = ChannelScenario::reference(rho_db);
        let n = 1usize << r;
        let p = db_to_linear(p_db);
        let res = PhaseResolution::Bits(bits);
        prop_assert!(general(s, n, 2.0 * p, res) >= general(s, n, p, res) * (1.0 - 1e-12));
    }

    #[test]
    fn finer_phases_never_hurt(rho_db in -130.0f64..-80.0, r in 0u32..=10, p_db in -40.0f64..10.0) {
        let s = ChannelScenario::reference(rho_db);
        let n = 1usize << r;
        let p = db_to_linear(p_db);
        let values: Vec<f64> = [PhaseResolution::Bits(1), PhaseResolution::Bits(2), PhaseResolution::Bits(3), PhaseResolution::Infinite]
            .into_iter()
            .map(|res| general(s, n, p, res))
            .collect();
        prop_assert!(values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)), "{values:?}");
    }
}

#[test]
fn general_form_reaches_perfect_csi_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    for _ in 0..50 {
        let s = random_scenario(&mut rng);
        let n = random_divisor(s.m, &mut rng);
        let exact = avg_snr_exact_perfect(&SnrInputs::perfect(s, n, 0.1)).unwrap();
        let limit = general(s, n, f64::INFINITY, PhaseResolution::Infinite);
        assert!((limit / exact - 1.0).abs() < 1e-12);
        let high = general(s, n, 1e30, PhaseResolution::Infinite);
        assert!((high / exact - 1.0).abs() < 1e-6);
    }
}

#[test]
fn perfect_csi_snr_grows_with_subarray_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(702);
    for _ in 0..50 {
        let s = random_scenario(&mut rng);
        let v: Vec<f64> = ris_energy::divisors(s.m)
            .into_iter()
            .map(|n| avg_snr_exact_perfect(&SnrInputs::perfect(s, n, 0.1)).unwrap())
            .collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn zero_pilot_power_leaves_random_configuration() {
    // no estimate: the average SNR is the incoherent rho + alpha beta M
    let mut rng = ChaCha8Rng::seed_from_u64(703);
    for _ in 0..20 {
        let s = random_scenario(&mut rng);
        let n = random_divisor(s.m, &mut rng);
        let bits = rng.random_range(1..=3);
        let want = 0.1 / s.sigma2 * (s.rho + s.cascaded_gain());
        let got = general(s, n, 0.0, PhaseResolution::Bits(bits));
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
    }
}
