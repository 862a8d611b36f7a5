//! Joint minimization over the subarray count and the pilot power.
//!
//! Steepest descent runs on the continuous relaxation in `(ln N, ln P_pilot)`
//! with central-difference gradients, a Barzilai-Borwein trial step and Armijo
//! backtracking, projected onto `1 <= N <= M` and the pilot-power bounds. The
//! continuous minimizer is then rounded to the neighbouring divisors of `M`,
//! the pilot power is re-tuned for each by golden-section search, and the
//! cheaper one wins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::golden_section;
use super::{energy_relaxed, OptimizationResult, TransmissionPlan};
use crate::channel::ChannelScenario;
use crate::divisors;
use crate::error::{Error, Result};
use crate::estimation::pilot_power_for_snr;

/// How the pilot power is chosen for a given subarray count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotRule {
    /// Free optimization variable.
    Optimize,
    /// Pinned so the per-subarray pilot SNR equals the given linear value.
    FixedSnr(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOptions {
    pub max_iterations: usize,
    /// Starting subarray count; `M / 2` when unset.
    pub initial_n: Option<f64>,
    pub initial_p_pilot: f64,
    /// Central-difference step in log coordinates (a relative step).
    pub fd_step: f64,
    pub armijo: f64,
    /// Stop once the projected gradient of the normalized energy is smaller.
    pub gradient_tol: f64,
    /// Also stop after three consecutive steps that lower the normalized
    /// energy by less than this.
    pub stall_tol: f64,
    pub p_pilot_min: f64,
    pub p_pilot_max: f64,
    /// Bracket width, in `ln P_pilot`, for the golden-section re-tuning.
    pub pilot_tol: f64,
    pub pilot_rule: PilotRule,
    /// Also run the exhaustive divisor scan and attach the comparison.
    pub verify: bool,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_n: None,
            initial_p_pilot: 0.01,
            fd_step: 1e-4,
            armijo: 1e-4,
            gradient_tol: 1e-7,
            stall_tol: 1e-13,
            p_pilot_min: 1e-7,
            p_pilot_max: 10.0,
            pilot_tol: 1e-9,
            pilot_rule: PilotRule::Optimize,
            verify: false,
        }
    }
}

/// Optimizer result against the exhaustive divisor scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub oracle_n: usize,
    pub oracle_p_pilot: f64,
    pub oracle_energy: f64,
    /// `energy_star / oracle_energy - 1`.
    pub relative_gap: f64,
}

fn pilot_for(rule: PilotRule, scenario: &ChannelScenario, n: f64, free: f64) -> f64 {
    match rule {
        PilotRule::Optimize => free,
        PilotRule::FixedSnr(gamma_p) => pilot_power_for_snr(scenario, n, gamma_p),
    }
}

/// Best pilot power for a fixed subarray count, with its total energy.
pub fn optimize_pilot_power(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    n: usize,
    options: &JointOptions,
) -> Result<(f64, f64)> {
    scenario.check_subarrays(n)?;
    let nf = n as f64;
    if let PilotRule::FixedSnr(_) = options.pilot_rule {
        let p = pilot_for(options.pilot_rule, scenario, nf, 0.0);
        return Ok((p, energy_relaxed(scenario, plan, nf, p)?.total));
    }
    let silent = energy_relaxed(scenario, plan, nf, 0.0)?.total;
    let (ln_p, e) = golden_section(
        |ln_p| {
            energy_relaxed(scenario, plan, nf, ln_p.exp())
                .map(|b| b.total)
                .unwrap_or(f64::INFINITY)
        },
        options.p_pilot_min.ln(),
        options.p_pilot_max.ln(),
        options.pilot_tol,
        500,
    );
    if silent < e {
        Ok((0.0, silent))
    } else {
        Ok((ln_p.exp(), e))
    }
}

/// Every divisor of `M` with its re-tuned pilot power; returns the cheapest
/// `(n, p_pilot, energy)`.
pub fn oracle_scan(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    options: &JointOptions,
) -> Result<(usize, f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for n in divisors(scenario.m) {
        let (p, e) = optimize_pilot_power(scenario, plan, n, options)?;
        if best.is_none_or(|b| e < b.2) {
            best = Some((n, p, e));
        }
    }
    Ok(best.expect("M has at least one divisor"))
}

struct Descent {
    n: f64,
    p_pilot: f64,
    iterations: usize,
}

fn steepest_descent(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    options: &JointOptions,
) -> Result<Descent> {
    let rule = options.pilot_rule;
    let dims = match rule {
        PilotRule::Optimize => 2,
        PilotRule::FixedSnr(_) => 1,
    };
    let lo = [0.0, options.p_pilot_min.ln()];
    let hi = [(scenario.m as f64).ln(), options.p_pilot_max.ln()];
    let clamp = |x: [f64; 2]| [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])];

    let raw = |x: [f64; 2]| -> Result<f64> {
        let n = x[0].exp();
        energy_relaxed(scenario, plan, n, pilot_for(rule, scenario, n, x[1].exp())).map(|b| b.total)
    };
    let n0 = options.initial_n.unwrap_or(scenario.m as f64 / 2.0).max(1.0);
    let mut x = clamp([n0.ln(), options.initial_p_pilot.ln()]);
    let scale = raw(x)?;
    let f = |x: [f64; 2]| raw(x).map(|e| e / scale).unwrap_or(f64::INFINITY);

    let h = options.fd_step;
    let mut fx = f(x);
    let mut step: f64 = 1.0;
    let mut stalled = 0;
    let mut previous: Option<([f64; 2], [f64; 2])> = None;
    for iteration in 0..options.max_iterations {
        let mut grad = [0.0; 2];
        for i in 0..dims {
            let mut up = x;
            let mut down = x;
            up[i] += h;
            down[i] -= h;
            grad[i] = (f(up) - f(down)) / (2.0 * h);
        }
        // projected steepest-descent direction
        let mut dir = [0.0; 2];
        for i in 0..dims {
            let d = -grad[i];
            let blocked = (x[i] <= lo[i] && d < 0.0) || (x[i] >= hi[i] && d > 0.0);
            dir[i] = if blocked { 0.0 } else { d };
        }
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm <= options.gradient_tol {
            return Ok(Descent {
                n: x[0].exp(),
                p_pilot: x[1].exp(),
                iterations: iteration,
            });
        }

        // Barzilai-Borwein trial step, else grow the last accepted one
        let bb = previous.and_then(|(px, pg)| {
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..dims {
                let s = x[i] - px[i];
                ss += s * s;
                sy += s * (grad[i] - pg[i]);
            }
            (sy > 0.0).then(|| ss / sy)
        });
        step = bb.unwrap_or(2.0 * step).clamp(1e-10, 1e6);
        previous = Some((x, grad));
        let accepted = loop {
            let cand = clamp([x[0] + step * dir[0], x[1] + step * dir[1]]);
            let decrease: f64 = (0..dims).map(|i| grad[i] * (cand[i] - x[i])).sum();
            let fc = f(cand);
            if fc <= fx + options.armijo * decrease {
                break Some((cand, fc));
            }
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        match accepted {
            Some((cand, fc)) => {
                stalled = if fx - fc < options.stall_tol { stalled + 1 } else { 0 };
                x = cand;
                fx = fc;
                if stalled >= 3 {
                    return Ok(Descent {
                        n: x[0].exp(),
                        p_pilot: x[1].exp(),
                        iterations: iteration + 1,
                    });
                }
            }
            // no descent possible at finite-difference resolution
            None => {
                return Ok(Descent {
                    n: x[0].exp(),
                    p_pilot: x[1].exp(),
                    iterations: iteration + 1,
                })
            }
        }
    }
    Err(Error::NotConverged {
        iterations: options.max_iterations,
        n: x[0].exp(),
        p_pilot: pilot_for(rule, scenario, x[0].exp(), x[1].exp()),
        energy: fx * scale,
    })
}

/// Feasible divisors of `m` immediately below and above `n`.
fn bracketing_divisors(m: usize, n: f64) -> Vec<usize> {
    let divs = divisors(m);
    let below = divs.iter().rev().find(|&&d| d as f64 <= n).copied().unwrap_or(1);
    let above = divs.iter().find(|&&d| d as f64 >= n).copied().unwrap_or(m);
    if below == above {
        vec![below]
    } else {
        vec![below, above]
    }
}

pub fn optimize_joint(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    options: &JointOptions,
) -> Result<OptimizationResult> {
    scenario.validate()?;
    plan.validate()?;
    let descent = steepest_descent(scenario, plan, options)?;

    let mut best: Option<(usize, f64, f64)> = None;
    for n in bracketing_divisors(scenario.m, descent.n) {
        let (p, e) = optimize_pilot_power(scenario, plan, n, options)?;
        if best.is_none_or(|b| e < b.2) {
            best = Some((n, p, e));
        }
    }
    let (n_star, p_pilot_star, energy_star) = best.expect("at least one candidate");

    let verification = if options.verify {
        let (oracle_n, oracle_p_pilot, oracle_energy) = oracle_scan(scenario, plan, options)?;
        Some(Verification {
            oracle_n,
            oracle_p_pilot,
            oracle_energy,
            relative_gap: energy_star / oracle_energy - 1.0,
        })
    } else {
        None
    };

    Ok(OptimizationResult {
        n_star,
        p_pilot_star,
        energy_star,
        n_continuous: descent.n,
        p_pilot_continuous: pilot_for(options.pilot_rule, scenario, descent.n, descent.p_pilot),
        iterations: descent.iterations,
        case: None,
        verification,
    })
}

/// One row of a payload sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub payload: f64,
    pub n_star: usize,
    pub n_continuous: f64,
    pub p_pilot_star: f64,
    pub p_data: f64,
    /// `(N+1) P_pilot / B`.
    pub pilot_energy: f64,
    /// `(N+1) (P_pilot + P_circuit) / B`.
    pub pilot_phase_energy: f64,
    pub total_energy: f64,
}

/// Joint optimum for each payload length. Points are solved in parallel and
/// returned in input order.
pub fn payload_sweep(
    scenario: &ChannelScenario,
    template: &TransmissionPlan,
    payloads: &[f64],
    options: &JointOptions,
) -> Result<Vec<SweepRow>> {
    if payloads.is_empty() {
        return Err(Error::InvalidParameter {
            name: "payloads",
            reason: "at least one payload length is required".into(),
        });
    }
    payloads
        .par_iter()
        .map(|&payload| {
            let plan = template.with_payload(payload);
            let r = optimize_joint(scenario, &plan, options)?;
            let e = super::energy(scenario, &plan, r.n_star, r.p_pilot_star)?;
            Ok(SweepRow {
                payload,
                n_star: r.n_star,
                n_continuous: r.n_continuous,
                p_pilot_star: r.p_pilot_star,
                p_data: e.p_data_used,
                pilot_energy: e.pilot_energy,
                pilot_phase_energy: e.pilot_phase_energy(r.n_star as f64, &plan, scenario.bandwidth),
                total_energy: e.total,
            })
        })
        .collect()
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
            p_circuit: 0.01,
            resolution: PhaseResolution::Bits(1),
        }
    }

    #[test]
    fn bracketing() {
        assert_eq!(bracketing_divisors(1024, 403.0), vec![256, 512]);
        assert_eq!(bracketing_divisors(1024, 512.0), vec![512]);
        assert_eq!(bracketing_divisors(1024, 0.5), vec![1]);
        assert_eq!(bracketing_divisors(1024, 2000.0), vec![1024]);
        assert_eq!(bracketing_divisors(450, 20.0), vec![18, 25]);
    }

    #[test]
    fn converges_quickly_on_weak_direct_path() {
        let s = ChannelScenario::reference(-110.0);
        let r = optimize_joint(&s, &plan(200.0), &JointOptions::default()).unwrap();
        assert!(r.iterations < 200);
        assert!((r.n_continuous / 403.0 - 1.0).abs() < 0.1, "{r:?}");
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let s = ChannelScenario::reference(-110.0);
        let opts = JointOptions {
            max_iterations: 1,
            ..Default::default()
        };
        match optimize_joint(&s, &plan(200.0), &opts) {
            Err(Error::NotConverged { iterations, n, energy, .. }) => {
                assert_eq!(iterations, 1);
                assert!((1.0..=1024.0).contains(&n) && energy > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let s = ChannelScenario::reference(-110.0);
        assert!(payload_sweep(&s, &plan(1.0), &[], &JointOptions::default()).is_err());
    }
}
