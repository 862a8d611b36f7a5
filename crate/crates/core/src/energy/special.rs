//! Perfect CSI, unquantized phases, no circuit power, Jensen-bound SNR.
//!
//! The pilot power is pinned so each subarray sees a pilot SNR of
//! `gamma_p`, leaving a function of `N` alone:
//!
//! ```text
//! E(N) = sigma2 gamma_p N / (B alpha beta M)
//!      + (sigma2 gamma_d L / B) / ((pi/4) (sqrt(rho) + sqrt(alpha beta M N))^2)
//! ```
//!
//! `E` is strictly convex for `N > 0`, so the real minimizer is the unique
//! root of `E'` and the integer optimum is one of its two neighbouring
//! divisors of `M`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::search::bisect_increasing;
use super::{OptimizationResult, OptimumCase, TransmissionPlan};
use crate::channel::ChannelScenario;
use crate::divisors;
use crate::error::Result;
use crate::estimation::pilot_power_for_snr;

struct Coefficients {
    /// `sigma2 gamma_p / (B alpha beta M)`.
    pilot: f64,
    /// `sigma2 gamma_d L / B`.
    data: f64,
    sqrt_rho: f64,
    sqrt_abm: f64,
}

impl Coefficients {
    fn new(scenario: &ChannelScenario, plan: &TransmissionPlan) -> Self {
        let abm = scenario.cascaded_gain();
        Self {
            pilot: scenario.sigma2 * plan.gamma_p / (scenario.bandwidth * abm),
            data: scenario.sigma2 * plan.gamma_d * plan.payload / scenario.bandwidth,
            sqrt_rho: scenario.rho.sqrt(),
            sqrt_abm: abm.sqrt(),
        }
    }

    fn amplitude(&self, n: f64) -> f64 {
        self.sqrt_rho + self.sqrt_abm * n.sqrt()
    }
}

pub fn energy_perfect_csi(scenario: &ChannelScenario, plan: &TransmissionPlan, n: f64) -> f64 {
    let c = Coefficients::new(scenario, plan);
    let u = c.amplitude(n);
    c.pilot * n + c.data / (PI / 4.0 * u * u)
}

/// `(E'(N), E''(N))`.
pub fn derivative_perfect_csi(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    n: f64,
) -> (f64, f64) {
    let c = Coefficients::new(scenario, plan);
    let u = c.amplitude(n);
    let first = c.pilot - c.data * c.sqrt_abm / (PI / 4.0 * u.powi(3) * n.sqrt());
    let second = c.data * c.sqrt_abm * (c.sqrt_rho + 4.0 * c.sqrt_abm * n.sqrt())
        / (PI / 2.0 * u.powi(4) * n.powf(1.5));
    (first, second)
}

/// Regime of the special case from the closed-form inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: OptimumCase,
    /// `sqrt(rho / (alpha beta M))`.
    pub direct_to_ris_ratio: f64,
    /// `(4 gamma_d L / (pi gamma_p))^(1/3) - 1`; `E'(1) < 0` iff the ratio is below it.
    pub single_threshold: f64,
    /// `(4 gamma_d L / (pi gamma_p sqrt(M)))^(1/3) - sqrt(M)`; `E'(M) > 0` iff
    /// the ratio is above it. May be negative.
    pub all_threshold: f64,
}

pub fn classify_case(scenario: &ChannelScenario, plan: &TransmissionPlan) -> CaseReport {
    let ratio = (scenario.rho / scenario.cascaded_gain()).sqrt();
    let drive = 4.0 * plan.gamma_d * plan.payload / (PI * plan.gamma_p);
    let sqrt_m = (scenario.m as f64).sqrt();
    let single_threshold = drive.cbrt() - 1.0;
    let all_threshold = (drive / sqrt_m).cbrt() - sqrt_m;
    let case = if !(ratio < single_threshold) {
        OptimumCase::SingleSubarray
    } else if !(ratio > all_threshold) {
        OptimumCase::AllIndividual
    } else {
        OptimumCase::Interior
    };
    CaseReport {
        case,
        direct_to_ris_ratio: ratio,
        single_threshold,
        all_threshold,
    }
}

/// Bisection on `E'` over `[1, M]` followed by the neighbouring-divisor
/// comparison. The returned pilot power meets `gamma_p` at `n_star`.
pub fn optimize_special_case(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
) -> Result<OptimizationResult> {
    scenario.validate()?;
    plan.validate()?;
    let m = scenario.m as f64;
    let d1 = derivative_perfect_csi(scenario, plan, 1.0).0;
    let dm = derivative_perfect_csi(scenario, plan, m).0;

    let (case, n_continuous, iterations) = if d1 >= 0.0 {
        (OptimumCase::SingleSubarray, 1.0, 0)
    } else if dm <= 0.0 {
        (OptimumCase::AllIndividual, m, 0)
    } else {
        let b = bisect_increasing(
            |n| derivative_perfect_csi(scenario, plan, n).0,
            1.0,
            m,
            0.5,
            1e-3 * d1.abs(),
            60,
        );
        (OptimumCase::Interior, b.root, b.iterations)
    };

    let n_star = match case {
        OptimumCase::SingleSubarray => 1,
        OptimumCase::AllIndividual => scenario.m,
        OptimumCase::Interior => {
            let divs = divisors(scenario.m);
            let below = divs.iter().rev().find(|&&d| d as f64 <= n_continuous).copied().unwrap_or(1);
            let above = divs.iter().find(|&&d| d as f64 >= n_continuous).copied().unwrap_or(scenario.m);
            let e = |n: usize| energy_perfect_csi(scenario, plan, n as f64);
            if e(above) < e(below) {
                above
            } else {
                below
            }
        }
    };

    Ok(OptimizationResult {
        n_star,
        p_pilot_star: pilot_power_for_snr(scenario, n_star as f64, plan.gamma_p),
        energy_star: energy_perfect_csi(scenario, plan, n_star as f64),
        n_continuous,
        p_pilot_continuous: pilot_power_for_snr(scenario, n_continuous, plan.gamma_p),
        iterations,
        case: Some(case),
        verification: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::PhaseResolution;
    use crate::units::db_to_linear;

    fn plan(payload: f64) -> TransmissionPlan {
        TransmissionPlan {
            payload,
            gamma_d: db_to_linear(20.0),
            gamma_p: db_to_linear(20.0),
            p_circuit: 0.0,
            resolution: PhaseResolution::Infinite,
        }
    }

    #[test]
    fn strong_direct_short_payload_uses_one_subarray() {
        let s = ChannelScenario::reference(-90.0);
        let report = classify_case(&s, &plan(200.0));
        assert!(report.direct_to_ris_ratio >= report.single_threshold);
        assert_eq!(report.case, OptimumCase::SingleSubarray);
        let r = optimize_special_case(&s, &plan(200.0)).unwrap();
        assert_eq!(r.n_star, 1);
        assert_eq!(r.case, Some(OptimumCase::SingleSubarray));
    }

    #[test]
    fn vanishing_payload_prefers_n_one() {
        let s = ChannelScenario::reference(-110.0);
        let r = optimize_special_case(&s, &plan(1e-9)).unwrap();
        assert_eq!(r.n_star, 1);
    }

    #[test]
    fn no_direct_path_threshold() {
        let mut s = ChannelScenario::reference(-110.0);
        s.rho = 0.0;
        let p = plan(200.0);
        let report = classify_case(&s, &p);
        assert_eq!(report.direct_to_ris_ratio, 0.0);
        let holds = 4.0 * p.gamma_d * p.payload > PI * p.gamma_p;
        assert_eq!(report.direct_to_ris_ratio < report.single_threshold, holds);
        // tiny payload: 4 gamma_d L < pi gamma_p
        let small = plan(0.5);
        assert!(!(classify_case(&s, &small).direct_to_ris_ratio < classify_case(&s, &small).single_threshold));
    }

    #[test]
    fn all_threshold_can_be_negative() {
        let s = ChannelScenario::reference(-110.0);
        let report = classify_case(&s, &plan(200.0));
        assert!(report.all_threshold < 0.0);
        assert!(report.direct_to_ris_ratio > report.all_threshold);
    }

    #[test]
    fn interior_root_is_accurate() {
        let s = ChannelScenario::reference(-110.0);
        let p = plan(5000.0);
        let r = optimize_special_case(&s, &p).unwrap();
        assert_eq!(r.case, Some(OptimumCase::Interior));
        let d1 = derivative_perfect_csi(&s, &p, 1.0).0;
        let at_root = derivative_perfect_csi(&s, &p, r.n_continuous).0;
        assert!(at_root.abs() < 1e-3 * d1.abs());
    }
}
