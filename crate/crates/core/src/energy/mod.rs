//! UE energy model and its minimization.
//!
//! A transmission of `L` data symbols preceded by `N + 1` pilots costs
//! `E = (N+1) P_pilot / B + L P_data / B + (L + N + 1) P_circuit / B`
//! joules, where `P_data` is the smallest data power reaching the average SNR
//! target `gamma_d` for the chosen `(N, P_pilot)`.

mod joint;
pub mod search;
mod special;

pub use joint::{
    optimize_joint, optimize_pilot_power, oracle_scan, payload_sweep, JointOptions, PilotRule,
    SweepRow, Verification,
};
pub use special::{
    classify_case, derivative_perfect_csi, energy_perfect_csi, optimize_special_case, CaseReport,
};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelScenario;
use crate::error::{Error, Result};
use crate::quantization::PhaseResolution;
use crate::snr::required_data_power;

/// Payload and link requirements for one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPlan {
    /// Payload length `L` in symbols.
    pub payload: f64,
    /// Target average data SNR (linear).
    pub gamma_d: f64,
    /// Per-subarray pilot SNR assumed by the perfect-CSI special case (linear).
    pub gamma_p: f64,
    /// Analog circuit power in watts.
    pub p_circuit: f64,
    pub resolution: PhaseResolution,
}

impl TransmissionPlan {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, ok: bool, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("out of range: {v}"),
                })
            }
        };
        check("payload", self.payload >= 0.0 && self.payload.is_finite(), self.payload)?;
        check("gamma_d", self.gamma_d > 0.0 && self.gamma_d.is_finite(), self.gamma_d)?;
        check("gamma_p", self.gamma_p > 0.0 && self.gamma_p.is_finite(), self.gamma_p)?;
        check(
            "p_circuit",
            self.p_circuit >= 0.0 && self.p_circuit.is_finite(),
            self.p_circuit,
        )?;
        self.resolution.validate()?;
        Ok(())
    }

    pub fn with_payload(self, payload: f64) -> Self {
        Self { payload, ..self }
    }
}

/// Energy terms in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `(N+1) P_pilot / B`.
    pub pilot_energy: f64,
    /// `L P_data / B`.
    pub data_energy: f64,
    /// `(L + N + 1) P_circuit / B`.
    pub circuit_energy: f64,
    pub total: f64,
    pub p_data_used: f64,
}

impl EnergyBreakdown {
    /// Energy spent during the pilot phase, circuit share included.
    pub fn pilot_phase_energy(&self, n: f64, plan: &TransmissionPlan, bandwidth: f64) -> f64 {
        self.pilot_energy + (n + 1.0) * plan.p_circuit / bandwidth
    }
}

/// Which of the three regimes the perfect-CSI energy function is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumCase {
    /// `E'(1) < 0 < E'(M)`: the minimizer lies strictly inside `(1, M)`.
    Interior,
    /// `E'(M) <= 0`: configure every element individually.
    AllIndividual,
    /// `E'(1) >= 0`: one subarray holding all elements.
    SingleSubarray,
}

/// Chosen operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n_star: usize,
    pub p_pilot_star: f64,
    pub energy_star: f64,
    /// Minimizer of the continuous relaxation, before rounding.
    pub n_continuous: f64,
    /// Pilot power at the continuous minimizer.
    pub p_pilot_continuous: f64,
    pub iterations: usize,
    pub case: Option<OptimumCase>,
    pub verification: Option<Verification>,
}

fn check_pilot(p_pilot: f64) -> Result<()> {
    if !(p_pilot >= 0.0 && p_pilot.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p_pilot",
            reason: format!("must be finite and >= 0, got {p_pilot}"),
        });
    }
    Ok(())
}

/// Energy of one transmission with `n` subarrays and pilot power `p_pilot`.
pub fn energy(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    n: usize,
    p_pilot: f64,
) -> Result<EnergyBreakdown> {
    scenario.check_subarrays(n)?;
    energy_relaxed(scenario, plan, n as f64, p_pilot)
}

/// [`energy`] for a real-valued subarray count.
pub fn energy_relaxed(
    scenario: &ChannelScenario,
    plan: &TransmissionPlan,
    n: f64,
    p_pilot: f64,
) -> Result<EnergyBreakdown> {
    check_pilot(p_pilot)?;
    let b = scenario.bandwidth;
    let p_data = required_data_power(scenario, n, p_pilot, plan.resolution, plan.gamma_d)?;
    let pilot_energy = (n + 1.0) * p_pilot / b;
    let data_energy = plan.payload * p_data / b;
    let circuit_energy = (plan.payload + n + 1.0) * plan.p_circuit / b;
    Ok(EnergyBreakdown {
        pilot_energy,
        data_energy,
        circuit_energy,
        total: pilot_energy + data_energy + circuit_energy,
        p_data_used: p_data,
    })
}
