//! TOML experiment configuration.
//!
//! Every field is optional and defaults to the Table-1 setup, so per-figure
//! files only list what they change. dB-valued fields end in `_db`, powers in
//! `_w`. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::channel::ChannelScenario;
use crate::divisors;
use crate::energy::{JointOptions, PilotRule, TransmissionPlan};
use crate::quantization::PhaseResolution;
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SnrVsN,
    EnergySurface,
    Optimize,
    PayloadSweep,
    EnergyVsN,
    McVerify,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::SnrVsN,
        Experiment::EnergySurface,
        Experiment::Optimize,
        Experiment::PayloadSweep,
        Experiment::EnergyVsN,
        Experiment::McVerify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SnrVsN => "snr-vs-N",
            Experiment::EnergySurface => "energy-surface",
            Experiment::Optimize => "optimize",
            Experiment::PayloadSweep => "payload-sweep",
            Experiment::EnergyVsN => "energy-vs-N",
            Experiment::McVerify => "mc-verify",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}`, expected one of {}", names.join(", "))
            })
    }
}

// Experiment names in files use the CLI spelling.
mod experiment_name {
    use super::Experiment;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(e: &Option<Experiment>, s: S) -> Result<S::Ok, S::Error> {
        match e {
            Some(e) => s.serialize_str(e.name()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Experiment>, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotMode {
    #[default]
    Optimize,
    /// Pilot power pinned to the per-subarray pilot SNR `plan.gamma_p_db`.
    FixedSnr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub rho_db: f64,
    pub alpha_db: f64,
    pub beta_db: f64,
    /// Signed so that a negative value is reported against this field.
    pub m: i64,
    pub bandwidth_hz: f64,
    pub sigma2_db: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            rho_db: -110.0,
            alpha_db: -60.0,
            beta_db: -80.0,
            m: 1024,
            bandwidth_hz: 1e8,
            sigma2_db: -123.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub payload: f64,
    /// Explicit payload list for `payload-sweep`.
    pub payloads: Option<Vec<f64>>,
    /// Log-spaced payload grid used when `payloads` is absent.
    pub payload_min: f64,
    pub payload_max: f64,
    pub payload_points: usize,
    pub gamma_d_db: f64,
    pub gamma_p_db: f64,
    pub p_circuit_w: f64,
    pub bits: PhaseResolution,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            payload: 200.0,
            payloads: None,
            payload_min: 10.0,
            payload_max: 1e4,
            payload_points: 61,
            gamma_d_db: 20.0,
            gamma_p_db: 20.0,
            p_circuit_w: 0.01,
            bits: PhaseResolution::Bits(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(with = "experiment_name", skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<String>,
    pub format: Format,
    pub threads: Option<usize>,
    /// `P_data / sigma2`; overrides `p_data_w` when set.
    pub transmit_snr_db: Option<f64>,
    pub p_data_w: f64,
    /// Pilot powers compared by `snr-vs-N`; `inf` means perfect estimates.
    pub p_pilot_w: Vec<f64>,
    /// Resolutions compared by `snr-vs-N`; defaults to `plan.bits`.
    pub compare_bits: Option<Vec<PhaseResolution>>,
    /// Subarray counts; defaults to every divisor of `M`.
    pub n_values: Option<Vec<i64>>,
    /// Direct-path gains for `energy-vs-N`; defaults to `scenario.rho_db`.
    pub rho_db_values: Option<Vec<f64>>,
    pub surface_n_points: usize,
    pub surface_p_min_w: f64,
    pub surface_p_max_w: f64,
    pub surface_p_points: usize,
    pub pilot_mode: PilotMode,
    /// Steepest-descent iteration cap for `optimize` and `payload-sweep`.
    pub max_iterations: usize,
    /// Attach the exhaustive divisor scan to `optimize`.
    pub verify: bool,
    /// Transmit pilots through an explicit DFT pattern in Monte Carlo runs.
    pub explicit_pilot_matrix: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            experiment: None,
            trials: 1000,
            seed: 1,
            output: None,
            format: Format::Csv,
            threads: None,
            transmit_snr_db: None,
            p_data_w: 0.1,
            p_pilot_w: vec![0.001, 0.01, 0.1],
            compare_bits: None,
            n_values: None,
            rho_db_values: None,
            surface_n_points: 41,
            surface_p_min_w: 1e-4,
            surface_p_max_w: 1.0,
            surface_p_points: 41,
            pilot_mode: PilotMode::Optimize,
            max_iterations: 200,
            verify: true,
            explicit_pilot_matrix: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub plan: PlanSection,
    pub run: RunSection,
}

fn field(name: &str, reason: impl Into<String>) -> CliError {
    CliError::Field {
        field: name.to_string(),
        reason: reason.into(),
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scenario(&self) -> Result<ChannelScenario, CliError> {
        let s = &self.scenario;
        if s.rho_db.is_nan() || s.rho_db == f64::INFINITY {
            return Err(field("scenario.rho_db", format!("must be finite or -inf, got {}", s.rho_db)));
        }
        finite("scenario.alpha_db", s.alpha_db)?;
        finite("scenario.beta_db", s.beta_db)?;
        finite("scenario.sigma2_db", s.sigma2_db)?;
        positive("scenario.bandwidth_hz", s.bandwidth_hz)?;
        if s.m < 1 {
            return Err(field("scenario.m", format!("must be a positive integer, got {}", s.m)));
        }
        let scenario = ChannelScenario {
            rho: db_to_linear(s.rho_db),
            alpha: db_to_linear(s.alpha_db),
            beta: db_to_linear(s.beta_db),
            m: s.m as usize,
            sigma2: db_to_linear(s.sigma2_db),
            bandwidth: s.bandwidth_hz,
        };
        scenario
            .validate()
            .map_err(|e| field("scenario", e.to_string()))?;
        Ok(scenario)
    }

    pub fn plan(&self) -> Result<TransmissionPlan, CliError> {
        let p = &self.plan;
        if !(p.payload >= 0.0 && p.payload.is_finite()) {
            return Err(field("plan.payload", format!("must be >= 0, got {}", p.payload)));
        }
        finite("plan.gamma_d_db", p.gamma_d_db)?;
        finite("plan.gamma_p_db", p.gamma_p_db)?;
        if !(p.p_circuit_w >= 0.0 && p.p_circuit_w.is_finite()) {
            return Err(field("plan.p_circuit_w", format!("must be >= 0, got {}", p.p_circuit_w)));
        }
        p.bits
            .validate()
            .map_err(|e| field("plan.bits", e.to_string()))?;
        Ok(TransmissionPlan {
            payload: p.payload,
            gamma_d: db_to_linear(p.gamma_d_db),
            gamma_p: db_to_linear(p.gamma_p_db),
            p_circuit: p.p_circuit_w,
            resolution: p.bits,
        })
    }

    pub fn payloads(&self) -> Result<Vec<f64>, CliError> {
        let p = &self.plan;
        let values = match &p.payloads {
            Some(v) => {
                if v.is_empty() {
                    return Err(field("plan.payloads", "must not be empty"));
                }
                v.clone()
            }
            None => {
                positive("plan.payload_min", p.payload_min)?;
                positive("plan.payload_max", p.payload_max)?;
                if p.payload_max < p.payload_min {
                    return Err(field("plan.payload_max", "must be >= plan.payload_min"));
                }
                if p.payload_points == 0 {
                    return Err(field("plan.payload_points", "must be at least 1"));
                }
                log_grid(p.payload_min, p.payload_max, p.payload_points)
            }
        };
        if let Some(bad) = values.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(field("plan.payloads", format!("payloads must be >= 0, got {bad}")));
        }
        Ok(values)
    }

    pub fn p_data(&self) -> Result<f64, CliError> {
        match self.run.transmit_snr_db {
            Some(snr_db) => {
                finite("run.transmit_snr_db", snr_db)?;
                Ok(db_to_linear(snr_db) * db_to_linear(self.scenario.sigma2_db))
            }
            None => {
                positive("run.p_data_w", self.run.p_data_w)?;
                Ok(self.run.p_data_w)
            }
        }
    }

    pub fn pilot_powers(&self) -> Result<Vec<f64>, CliError> {
        let v = &self.run.p_pilot_w;
        if v.is_empty() {
            return Err(field("run.p_pilot_w", "must not be empty"));
        }
        if let Some(bad) = v.iter().find(|p| !(**p >= 0.0)) {
            return Err(field("run.p_pilot_w", format!("powers must be >= 0, got {bad}")));
        }
        Ok(v.clone())
    }

    pub fn resolutions(&self) -> Result<Vec<PhaseResolution>, CliError> {
        let v = self.run.compare_bits.clone().unwrap_or_else(|| vec![self.plan.bits]);
        if v.is_empty() {
            return Err(field("run.compare_bits", "must not be empty"));
        }
        for r in &v {
            r.validate().map_err(|e| field("run.compare_bits", e.to_string()))?;
        }
        Ok(v)
    }

    pub fn n_values(&self, m: usize) -> Result<Vec<usize>, CliError> {
        match &self.run.n_values {
            None => Ok(divisors(m)),
            Some(v) if v.is_empty() => Err(field("run.n_values", "must not be empty")),
            Some(v) => v
                .iter()
                .map(|&n| {
                    if n >= 1 && (n as u64) <= m as u64 && m.is_multiple_of(n as usize) {
                        Ok(n as usize)
                    } else {
                        Err(field("run.n_values", format!("{n} does not divide M = {m}")))
                    }
                })
                .collect(),
        }
    }

    pub fn rho_db_values(&self) -> Result<Vec<f64>, CliError> {
        let v = self
            .run
            .rho_db_values
            .clone()
            .unwrap_or_else(|| vec![self.scenario.rho_db]);
        if v.is_empty() {
            return Err(field("run.rho_db_values", "must not be empty"));
        }
        if let Some(bad) = v.iter().find(|r| r.is_nan() || **r == f64::INFINITY) {
            return Err(field("run.rho_db_values", format!("must be finite or -inf, got {bad}")));
        }
        Ok(v)
    }

    pub fn joint_options(&self, plan: &TransmissionPlan) -> JointOptions {
        JointOptions {
            pilot_rule: match self.run.pilot_mode {
                PilotMode::Optimize => PilotRule::Optimize,
                PilotMode::FixedSnr => PilotRule::FixedSnr(plan.gamma_p),
            },
            max_iterations: self.run.max_iterations,
            verify: self.run.verify,
            ..JointOptions::default()
        }
    }

    pub fn check_run(&self) -> Result<(), CliError> {
        let r = &self.run;
        if r.trials == 0 {
            return Err(field("run.trials", "must be at least 1"));
        }
        if r.max_iterations == 0 {
            return Err(field("run.max_iterations", "must be at least 1"));
        }
        if r.threads == Some(0) {
            return Err(field("run.threads", "must be at least 1"));
        }
        if r.surface_n_points < 2 {
            return Err(field("run.surface_n_points", "must be at least 2"));
        }
        if r.surface_p_points < 2 {
            return Err(field("run.surface_p_points", "must be at least 2"));
        }
        positive("run.surface_p_min_w", r.surface_p_min_w)?;
        positive("run.surface_p_max_w", r.surface_p_max_w)?;
        if r.surface_p_max_w <= r.surface_p_min_w {
            return Err(field("run.surface_p_max_w", "must exceed run.surface_p_min_w"));
        }
        Ok(())
    }
}

/// `points` values spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}
