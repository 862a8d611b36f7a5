//! Joint optimizer against an independent dense-grid scan.

mod common;

use common::random_scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_energy::channel::ChannelScenario;
use ris_energy::divisors;
use ris_energy::energy::{energy_relaxed, optimize_joint, JointOptions, TransmissionPlan};
use ris_energy::quantization::PhaseResolution;
use ris_energy::units::db_to_linear;

/// Minimum over `P_pilot` in {0} and a 3000-point log grid on [1e-7, 10] W.
fn grid_min(s: &ChannelScenario, plan: &TransmissionPlan, n: usize) -> f64 {
    let e = |p: f64| energy_relaxed(s, plan, n as f64, p).map(|b| b.total).unwrap_or(f64::INFINITY);
    let (lo, hi) = (1e-7f64.ln(), 10f64.ln());
    (0..3000)
        .map(|i| e((lo + (hi - lo) * i as f64 / 2999.0).exp()))
        .fold(e(0.0), f64::min)
}

fn random_plan<R: Rng>(rng: &mut R) -> TransmissionPlan {
    TransmissionPlan {
        payload: 10f64.powf(rng.random_range(1.0..4.5)),
        gamma_d: db_to_linear(rng.random_range(5.0..30.0)),
        gamma_p: 100.0,
        p_circuit: rng.random_range(0.0..0.05),
        resolution: match rng.random_range(0..4) {
            0 => PhaseResolution::Infinite,
            b => PhaseResolution::Bits(b),
        },
    }
}

#[test]
fn optimum_matches_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    for _ in 0..40 {
        let mut s = random_scenario(&mut rng);
        s.alpha = db_to_linear(-60.0);
        s.beta = db_to_linear(-80.0);
        let plan = random_plan(&mut rng);
        let r = optimize_joint(&s, &plan, &JointOptions::default()).unwrap();
        let scan: Vec<(usize, f64)> = divisors(s.m).into_iter().map(|n| (n, grid_min(&s, &plan, n))).collect();
        let oracle = scan.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let gap = r.energy_star / oracle - 1.0;
        assert!(gap.abs() <= 0.005, "M={} L={:.0}: optimizer {:.6e} vs grid {:.6e}", s.m, plan.payload, r.energy_star, oracle);

        // no better neighbour
        let i = scan.iter().position(|x| x.0 == r.n_star).unwrap();
        for j in [i.wrapping_sub(1), i + 1] {
            if let Some(&(n, e)) = scan.get(j) {
                assert!(r.energy_star <= e * (1.0 + 1e-9), "neighbour N={n} cheaper: {e:.6e} < {:.6e}", r.energy_star);
            }
        }
    }
}

#[test]
fn verification_gap_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    let options = JointOptions {
        verify: true,
        ..JointOptions::default()
    };
    for _ in 0..40 {
        let s = random_scenario(&mut rng);
        let plan = random_plan(&mut rng);
        let v = optimize_joint(&s, &plan, &options).unwrap().verification.unwrap();
        assert!(v.relative_gap.abs() <= 0.005, "{v:?}");
    }
}
