//! End-to-end simulation used as the oracle for the closed forms.
//!
//! One trial draws a channel, runs the pilot phase, forms MMSE estimates,
//! co-phases the subarrays against the estimated direct path, quantizes the
//! phases and measures the data-phase SNR on the true channel. Trial `t` uses
//! its own ChaCha stream `(seed, t)`, and per-trial values are reduced in
//! trial order with compensated summation, so the result does not depend on
//! how rayon schedules the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    co_phasing, end_to_end_channel, instantaneous_snr, sample_realization_with, ChannelScenario,
    Sampler,
};
use crate::error::{Error, Result};
use crate::estimation::{build_pilot_matrix, decorrelated_reception, mmse_estimate, simulate_pilot_reception, PilotMatrix};
use crate::quantization::RisCodebook;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMode {
    PerfectCsi,
    EstimatedCsi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    pub mode: CsiMode,
    pub codebook: RisCodebook,
    pub sampler: Sampler,
    /// Transmit through an explicit DFT pattern instead of drawing the
    /// decorrelated noise directly.
    pub explicit_pilot_matrix: bool,
}

impl McConfig {
    pub fn new(trials: usize, seed: u64, mode: CsiMode, codebook: RisCodebook) -> Self {
        Self {
            trials,
            seed,
            mode,
            codebook,
            sampler: Sampler::Aggregate,
            explicit_pilot_matrix: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; zero for one trial.
    pub std_error: f64,
    pub trials: usize,
}

impl McEstimate {
    /// `|mean - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error
    }
}

/// Random source for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and standard error of the samples, reduced in order.
pub fn summarize(samples: &[f64]) -> McEstimate {
    let count = samples.len();
    let mean = compensated_sum(samples.iter().copied()) / count as f64;
    let std_error = if count > 1 {
        let ss = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
        (ss / (count - 1) as f64).sqrt() / (count as f64).sqrt()
    } else {
        0.0
    };
    McEstimate {
        mean,
        std_error,
        trials: count,
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Runs `trial` for every index in parallel and returns the values in order.
fn run_trials<F>(trials: usize, seed: u64, trial: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(seed, t)))
        .collect()
}

/// Average data-phase SNR with `n` subarrays. `p_pilot` is ignored in
/// perfect-CSI mode; an infinite pilot power also means perfect CSI.
pub fn mc_average_snr(
    scenario: &ChannelScenario,
    n: usize,
    p_pilot: f64,
    p_data: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    scenario.validate()?;
    scenario.check_subarrays(n)?;
    check_trials(config.trials)?;
    let perfect = config.mode == CsiMode::PerfectCsi || p_pilot.is_infinite();
    let psi: Option<PilotMatrix> = if !perfect && config.explicit_pilot_matrix {
        Some(build_pilot_matrix(n)?)
    } else {
        None
    };

    let values = run_trials(config.trials, config.seed, |rng| {
        let r = sample_realization_with(scenario, n, config.sampler, rng)?;
        let targets = if perfect {
            co_phasing(r.direct, &r.subarrays)
        } else {
            let ybar = match &psi {
                Some(psi) => simulate_pilot_reception(&r, psi, p_pilot, scenario.sigma2, rng)?,
                None => decorrelated_reception(&r, p_pilot, scenario.sigma2, rng)?,
            };
            let est = mmse_estimate(&ybar, scenario, n, p_pilot)?;
            co_phasing(est.direct, &est.subarrays)
        };
        let phases: Vec<f64> = targets
            .into_iter()
            .map(|c| config.codebook.quantize_phase(c))
            .collect();
        let g = end_to_end_channel(&r, &phases)?;
        instantaneous_snr(g, p_data, scenario.sigma2)
    })?;
    Ok(summarize(&values))
}

/// Only `n` individually phased elements (per-element gain `alpha beta`),
/// the remaining `M - n` switched off. Always perfect CSI.
pub fn mc_baseline_elements_off(
    scenario: &ChannelScenario,
    n: usize,
    p_data: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    if n == 0 || n > scenario.m {
        return Err(Error::InvalidSubarrayCount { n, m: scenario.m });
    }
    let reduced = ChannelScenario { m: n, ..*scenario };
    let config = McConfig {
        mode: CsiMode::PerfectCsi,
        ..config.clone()
    };
    mc_average_snr(&reduced, n, f64::INFINITY, p_data, &config)
}

/// Squared mean amplitude `(P_data / sigma2) (E{|p| + sum_n |Z_n|})^2`, the
/// sample counterpart of the Jensen bound. The standard error follows from
/// the delta method.
pub fn mc_jensen_bound(
    scenario: &ChannelScenario,
    n: usize,
    p_data: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    scenario.validate()?;
    check_trials(config.trials)?;
    let amplitudes = run_trials(config.trials, config.seed, |rng| {
        let r = sample_realization_with(scenario, n, config.sampler, rng)?;
        Ok(r.direct.norm() + r.subarrays.iter().map(|z| z.norm()).sum::<f64>())
    })?;
    let amp = summarize(&amplitudes);
    let snr = p_data / scenario.sigma2;
    Ok(McEstimate {
        mean: snr * amp.mean * amp.mean,
        std_error: 2.0 * snr * amp.mean * amp.std_error,
        trials: amp.trials,
    })
}
