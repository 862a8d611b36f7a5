//! Closed-form average SNRs.
//!
//! Every expression is `(P_data / sigma2) * gain`, where `gain` depends on
//! the channel statistics, the subarray count, the pilot power and the
//! phase resolution. The `*_gain` functions accept a real-valued `N` so the
//! optimizers can work on the continuous relaxation; infinite pilot power
//! and infinite resolution are handled as exact limits.

use std::f64::consts::PI;

use crate::channel::ChannelScenario;
use crate::error::{Error, Result};
use crate::estimation::estimate_variance;
use crate::quantization::PhaseResolution;

/// Operating point for the average-SNR formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrInputs {
    pub scenario: ChannelScenario,
    pub n: usize,
    /// Pilot power in watts; `f64::INFINITY` means perfect CSI.
    pub p_pilot: f64,
    pub p_data: f64,
    pub resolution: PhaseResolution,
}

impl SnrInputs {
    /// Perfect CSI and unquantized phases.
    pub fn perfect(scenario: ChannelScenario, n: usize, p_data: f64) -> Self {
        Self {
            scenario,
            n,
            p_pilot: f64::INFINITY,
            p_data,
            resolution: PhaseResolution::Infinite,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.check_subarrays(self.n)?;
        if !(self.p_pilot >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "p_pilot",
                reason: format!("must be >= 0, got {}", self.p_pilot),
            });
        }
        if !(self.p_data >= 0.0 && self.p_data.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p_data",
                reason: format!("must be finite and >= 0, got {}", self.p_data),
            });
        }
        self.resolution.validate()?;
        Ok(())
    }

    fn transmit_snr(&self) -> f64 {
        self.p_data / self.scenario.sigma2
    }
}

/// Jensen bound gain `(pi/4) (sqrt(rho) + sqrt(alpha beta M N))^2`.
pub fn lower_bound_gain(scenario: &ChannelScenario, n: f64) -> f64 {
    let amp = scenario.rho.sqrt() + (scenario.cascaded_gain() * n).sqrt();
    PI / 4.0 * amp * amp
}

/// Exact perfect-CSI gain: the Jensen bound plus `(1 - pi/4)(rho + alpha beta M)`.
pub fn exact_perfect_gain(scenario: &ChannelScenario, n: f64) -> f64 {
    lower_bound_gain(scenario, n) + (1.0 - PI / 4.0) * (scenario.rho + scenario.cascaded_gain())
}

/// Gain with only `n` individually configured elements (the rest off).
pub fn baseline_elements_off_gain(scenario: &ChannelScenario, n: f64) -> f64 {
    let ab = scenario.alpha * scenario.beta;
    let amp = scenario.rho.sqrt() + n * ab.sqrt();
    PI / 4.0 * amp * amp + (1.0 - PI / 4.0) * (scenario.rho + ab * n)
}

/// Gain under MMSE-estimated CSI and `K`-state quantization.
///
/// Written with `1/q = sigma2 / P_pilot`, so `P_pilot = inf` (`1/q = 0`) and
/// `P_pilot = 0` (`1/q = inf`) both evaluate without special cases.
pub fn general_gain(
    scenario: &ChannelScenario,
    n: f64,
    p_pilot: f64,
    resolution: PhaseResolution,
) -> f64 {
    let rho = scenario.rho;
    let abm = scenario.cascaded_gain();
    let s = resolution.sinc_factor();
    let inv_q = scenario.sigma2 / p_pilot;
    let floor = inv_q / (n + 1.0);

    let cross = if rho == 0.0 || p_pilot == 0.0 {
        0.0
    } else {
        PI / 2.0 * rho * abm * s / ((rho + floor) * (abm / n + floor)).sqrt()
    };
    let coherent = if p_pilot == 0.0 {
        0.0
    } else {
        PI / 4.0 * (1.0 - 1.0 / n) * abm * abm * s * s / (abm / n + floor)
    };
    rho + abm + cross + coherent
}

/// `E{|p_hat|} E{|Z_hat_n|} sinc(1/K)`: the expected cross term between the
/// direct path and one co-phased subarray.
pub fn cross_term(
    scenario: &ChannelScenario,
    n: f64,
    p_pilot: f64,
    resolution: PhaseResolution,
) -> f64 {
    let vp = estimate_variance(scenario.rho, n, p_pilot, scenario.sigma2);
    let vz = estimate_variance(scenario.subarray_variance(n), n, p_pilot, scenario.sigma2);
    PI / 4.0 * (vp * vz).sqrt() * resolution.sinc_factor()
}

/// `E{|Z_hat_n|} E{|Z_hat_m|} sinc^2(1/K)`: the expected term between two
/// distinct co-phased subarrays.
pub fn pair_term(
    scenario: &ChannelScenario,
    n: f64,
    p_pilot: f64,
    resolution: PhaseResolution,
) -> f64 {
    let vz = estimate_variance(scenario.subarray_variance(n), n, p_pilot, scenario.sigma2);
    let s = resolution.sinc_factor();
    PI / 4.0 * vz * s * s
}

/// `rho + 2 N A + alpha beta M + N (N - 1) B`, the expansion of the squared
/// end-to-end channel in terms of [`cross_term`] and [`pair_term`].
pub fn assembled_gain(
    scenario: &ChannelScenario,
    n: f64,
    p_pilot: f64,
    resolution: PhaseResolution,
) -> f64 {
    scenario.rho
        + 2.0 * n * cross_term(scenario, n, p_pilot, resolution)
        + scenario.cascaded_gain()
        + n * (n - 1.0) * pair_term(scenario, n, p_pilot, resolution)
}

/// Perfect CSI, no direct path, `K` states:
/// `alpha beta M (1 + (pi/4)(N - 1) sinc^2(1/K))`.
pub fn quantized_perfect_csi_gain(
    scenario: &ChannelScenario,
    n: f64,
    resolution: PhaseResolution,
) -> f64 {
    let s = resolution.sinc_factor();
    scenario.cascaded_gain() * (1.0 + PI / 4.0 * (n - 1.0) * s * s)
}

pub fn avg_snr_lower_bound(inputs: &SnrInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.transmit_snr() * lower_bound_gain(&inputs.scenario, inputs.n as f64))
}

pub fn avg_snr_exact_perfect(inputs: &SnrInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.transmit_snr() * exact_perfect_gain(&inputs.scenario, inputs.n as f64))
}

pub fn avg_snr_baseline_elements_off(inputs: &SnrInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.transmit_snr() * baseline_elements_off_gain(&inputs.scenario, inputs.n as f64))
}

pub fn avg_snr_general(inputs: &SnrInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.transmit_snr()
        * general_gain(
            &inputs.scenario,
            inputs.n as f64,
            inputs.p_pilot,
            inputs.resolution,
        ))
}

/// Ignores `rho` and the pilot power.
pub fn avg_snr_quantized_perfect_csi(inputs: &SnrInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.transmit_snr()
        * quantized_perfect_csi_gain(&inputs.scenario, inputs.n as f64, inputs.resolution))
}

/// Worst-case relative SNR loss of `K`-state quantization, `sinc^2(1/K)`.
pub fn quantization_loss_bound(states: u64) -> Result<f64> {
    crate::quantization::sinc_factor(states).map(|s| s * s)
}

/// Data power that makes the average SNR equal `gamma_d`.
pub fn required_data_power(
    scenario: &ChannelScenario,
    n: f64,
    p_pilot: f64,
    resolution: PhaseResolution,
    gamma_d: f64,
) -> Result<f64> {
    if !(gamma_d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma_d",
            reason: format!("must be > 0, got {gamma_d}"),
        });
    }
    let gain = general_gain(scenario, n, p_pilot, resolution);
    if !(gain > 0.0) {
        return Err(Error::SignalImpossible);
    }
    Ok(scenario.sigma2 * gamma_d / gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::db_to_linear;

    fn strong_cascade() -> ChannelScenario {
        ChannelScenario {
            rho: db_to_linear(-95.0),
            alpha: db_to_linear(-80.0),
            beta: db_to_linear(-60.0),
            m: 1024,
            sigma2: 1.0,
            bandwidth: 1e8,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lower_bound_examples() {
        let mut s = strong_cascade();
        s.rho = 0.0;
        let inputs = SnrInputs::perfect(s, 1, 2.0);
        let lb = avg_snr_lower_bound(&inputs).unwrap();
        assert!(rel(lb, PI / 4.0 * 2.0 * s.cascaded_gain()) < 1e-14);

        let s = strong_cascade();
        let p = db_to_linear(104.0);
        let mut prev_gap = f64::INFINITY;
        for n in crate::divisors(1024) {
            let i = SnrInputs::perfect(s, n, p);
            let lb = avg_snr_lower_bound(&i).unwrap();
            let ex = avg_snr_exact_perfect(&i).unwrap();
            assert!(lb <= ex);
            let gap = ex / lb;
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn exact_perfect_without_direct_path() {
        let mut s = strong_cascade();
        s.rho = 0.0;
        for n in [1usize, 4, 64, 1024] {
            let i = SnrInputs::perfect(s, n, 3.0);
            let want = 3.0 * s.cascaded_gain() * (1.0 + PI / 4.0 * (n as f64 - 1.0));
            assert!(rel(avg_snr_exact_perfect(&i).unwrap(), want) < 1e-13);
            assert!(rel(avg_snr_quantized_perfect_csi(&i).unwrap(), want) < 1e-13);
        }
    }

    #[test]
    fn general_reduces_to_perfect_in_the_limit() {
        let s = strong_cascade();
        for n in crate::divisors(1024) {
            let i = SnrInputs::perfect(s, n, 1.0);
            assert!(rel(avg_snr_general(&i).unwrap(), avg_snr_exact_perfect(&i).unwrap()) < 1e-13);
            // large finite pilot power approaches the same value
            let big = SnrInputs { p_pilot: 1e25, ..i };
            assert!(rel(avg_snr_general(&big).unwrap(), avg_snr_exact_perfect(&i).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn zero_pilot_power_has_no_beamforming_gain() {
        let s = ChannelScenario::reference(-110.0);
        for n in [1usize, 16, 1024] {
            let i = SnrInputs {
                scenario: s,
                n,
                p_pilot: 0.0,
                p_data: 0.1,
                resolution: PhaseResolution::Bits(1),
            };
            let want = 0.1 / s.sigma2 * (s.rho + s.cascaded_gain());
            assert!(rel(avg_snr_general(&i).unwrap(), want) < 1e-14);
        }
    }

    #[test]
    fn baseline_examples() {
        let s = strong_cascade();
        let full = SnrInputs::perfect(s, 1024, 1.0);
        assert!(
            rel(
                avg_snr_baseline_elements_off(&full).unwrap(),
                avg_snr_exact_perfect(&full).unwrap()
            ) < 1e-13
        );
        for n in crate::divisors(1024).into_iter().filter(|&n| n < 1024) {
            let i = SnrInputs::perfect(s, n, 1.0);
            assert!(avg_snr_baseline_elements_off(&i).unwrap() < avg_snr_exact_perfect(&i).unwrap());
        }
        let mut s0 = s;
        s0.rho = 0.0;
        let i = SnrInputs::perfect(s0, 1, 5.0);
        assert!(rel(avg_snr_baseline_elements_off(&i).unwrap(), 5.0 * s.alpha * s.beta) < 1e-14);
    }

    #[test]
    fn terms_assemble_to_the_closed_form() {
        let s = ChannelScenario::reference(-100.0);
        for &p in &[0.0, 1e-4, 1e-2, 1.0, f64::INFINITY] {
            for n in [1.0, 3.0, 64.0, 1024.0, 403.7] {
                for r in [PhaseResolution::Bits(1), PhaseResolution::Bits(3), PhaseResolution::Infinite] {
                    let a = assembled_gain(&s, n, p, r);
                    let b = general_gain(&s, n, p, r);
                    assert!(rel(a, b) < 1e-12, "p={p} n={n} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn quantized_perfect_csi_examples() {
        let mut s = strong_cascade();
        s.rho = 0.0;
        let one = SnrInputs {
            resolution: PhaseResolution::Bits(1),
            ..SnrInputs::perfect(s, 1, 1.0)
        };
        let inf = SnrInputs::perfect(s, 1, 1.0);
        assert_eq!(
            avg_snr_quantized_perfect_csi(&one).unwrap(),
            avg_snr_quantized_perfect_csi(&inf).unwrap()
        );
        let q = SnrInputs { n: 1024, ..one };
        let f = SnrInputs { n: 1024, ..inf };
        let gap = crate::units::linear_to_db(
            avg_snr_quantized_perfect_csi(&q).unwrap() / avg_snr_quantized_perfect_csi(&f).unwrap(),
        );
        assert!((gap + 3.9).abs() < 0.05, "{gap}");
    }

    #[test]
    fn required_power_round_trip() {
        let s = ChannelScenario::reference(-110.0);
        for &p in &[0.0, 1e-3, 0.019, f64::INFINITY] {
            for n in [1usize, 256, 1024] {
                let r = PhaseResolution::Bits(1);
                let pd = required_data_power(&s, n as f64, p, r, 100.0).unwrap();
                let i = SnrInputs {
                    scenario: s,
                    n,
                    p_pilot: p,
                    p_data: pd,
                    resolution: r,
                };
                assert!(rel(avg_snr_general(&i).unwrap(), 100.0) < 1e-10);
            }
        }
        let mut s0 = s;
        s0.rho = 0.0;
        let pd = required_data_power(&s0, 8.0, f64::INFINITY, PhaseResolution::Infinite, 100.0).unwrap();
        let want = s.sigma2 * 100.0 / (s.cascaded_gain() * (1.0 + PI / 4.0 * 7.0));
        assert!(rel(pd, want) < 1e-13);
        assert!(required_data_power(&s, 8.0, 0.01, PhaseResolution::Bits(1), 0.0).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let s = strong_cascade();
        assert!(avg_snr_general(&SnrInputs::perfect(s, 0, 1.0)).is_err());
        assert!(avg_snr_general(&SnrInputs::perfect(s, 3, 1.0)).is_err());
        assert_eq!(quantization_loss_bound(1), Err(Error::InvalidStates(1)));
    }
}
