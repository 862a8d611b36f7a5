//! The six experiment recipes. Each returns its rows as a [`Table`] plus a
//! JSON summary for the sidecar.

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{log_grid, Experiment, ExperimentConfig};
use super::output::Table;
use super::CliError;
use crate::channel::ChannelScenario;
use crate::divisors;
use crate::energy::{
    classify_case, derivative_perfect_csi, energy_perfect_csi, energy_relaxed, optimize_joint,
    optimize_special_case, payload_sweep, TransmissionPlan,
};
use crate::estimation::pilot_snr;
use crate::montecarlo::{
    mc_average_snr, mc_baseline_elements_off, mc_jensen_bound, CsiMode, McConfig, McEstimate,
};
use crate::quantization::{PhaseResolution, RisCodebook};
use crate::snr::{
    avg_snr_baseline_elements_off, avg_snr_exact_perfect, avg_snr_general, avg_snr_lower_bound,
    avg_snr_quantized_perfect_csi, SnrInputs,
};
use crate::units::{db_to_linear, linear_to_db};

/// Rows plus experiment-specific summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: Value,
    /// False when an oracle check failed; the files are still written.
    pub passed: bool,
}

fn report(table: Table, summary: Value) -> Report {
    Report {
        table,
        summary,
        passed: true,
    }
}

pub fn run_experiment(experiment: Experiment, config: &ExperimentConfig) -> Result<Report, CliError> {
    config.check_run()?;
    match experiment {
        Experiment::SnrVsN => snr_vs_n(config),
        Experiment::EnergySurface => energy_surface(config),
        Experiment::Optimize => optimize(config),
        Experiment::PayloadSweep => sweep(config),
        Experiment::EnergyVsN => energy_vs_n(config),
        Experiment::McVerify => mc_verify(config),
    }
}

fn mc_config(config: &ExperimentConfig, mode: CsiMode, resolution: PhaseResolution) -> Result<McConfig, CliError> {
    Ok(McConfig {
        explicit_pilot_matrix: config.run.explicit_pilot_matrix,
        ..McConfig::new(config.run.trials, config.run.seed, mode, RisCodebook::new(resolution)?)
    })
}

fn ris_pilot_snr_db(scenario: &ChannelScenario, n: usize, p_pilot: f64) -> f64 {
    linear_to_db(pilot_snr(scenario, n, p_pilot).1)
}

#[derive(Serialize)]
struct SnrRow {
    n: usize,
    p_pilot_w: f64,
    bits: String,
    avg_snr: f64,
    avg_snr_db: f64,
    lower_bound: f64,
    exact_perfect: f64,
    baseline_elements_off: f64,
    mc_mean: f64,
    mc_std_error: f64,
}

fn snr_vs_n(config: &ExperimentConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let p_data = config.p_data()?;
    let pilots = config.pilot_powers()?;
    let resolutions = config.resolutions()?;
    let ns = config.n_values(scenario.m)?;
    let mut rows = Vec::new();
    for &resolution in &resolutions {
        for &p_pilot in &pilots {
            for &n in &ns {
                let inputs = SnrInputs {
                    scenario,
                    n,
                    p_pilot,
                    p_data,
                    resolution,
                };
                let perfect = SnrInputs::perfect(scenario, n, p_data);
                let avg = avg_snr_general(&inputs)?;
                let mode = if p_pilot.is_infinite() {
                    CsiMode::PerfectCsi
                } else {
                    CsiMode::EstimatedCsi
                };
                let mc = mc_average_snr(&scenario, n, p_pilot, p_data, &mc_config(config, mode, resolution)?)?;
                rows.push(SnrRow {
                    n,
                    p_pilot_w: p_pilot,
                    bits: resolution.to_string(),
                    avg_snr: avg,
                    avg_snr_db: linear_to_db(avg),
                    lower_bound: avg_snr_lower_bound(&perfect)?,
                    exact_perfect: avg_snr_exact_perfect(&perfect)?,
                    baseline_elements_off: avg_snr_baseline_elements_off(&perfect)?,
                    mc_mean: mc.mean,
                    mc_std_error: mc.std_error,
                });
            }
        }
    }
    let summary = json!({ "p_data_w": p_data, "points": rows.len() });
    Ok(report(Table::from_rows(&rows)?, summary))
}

#[derive(Serialize)]
struct SurfaceRow {
    n: f64,
    p_pilot_w: f64,
    p_data_w: f64,
    pilot_energy_j: f64,
    data_energy_j: f64,
    circuit_energy_j: f64,
    total_energy_j: f64,
}

fn energy_surface(config: &ExperimentConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let plan = config.plan()?;
    let run = &config.run;
    let mut rows = Vec::new();
    for n in log_grid(1.0, scenario.m as f64, run.surface_n_points) {
        for p in log_grid(run.surface_p_min_w, run.surface_p_max_w, run.surface_p_points) {
            let e = energy_relaxed(&scenario, &plan, n, p)?;
            rows.push(SurfaceRow {
                n,
                p_pilot_w: p,
                p_data_w: e.p_data_used,
                pilot_energy_j: e.pilot_energy,
                data_energy_j: e.data_energy,
                circuit_energy_j: e.circuit_energy,
                total_energy_j: e.total,
            });
        }
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.total_energy_j.total_cmp(&b.total_energy_j))
        .expect("grid is nonempty");
    let summary = json!({
        "grid_minimum": { "n": best.n, "p_pilot_w": best.p_pilot_w, "total_energy_j": best.total_energy_j },
    });
    Ok(report(Table::from_rows(&rows)?, summary))
}

fn case_report(scenario: &ChannelScenario, plan: &TransmissionPlan) -> String {
    let c = classify_case(scenario, plan);
    format!(
        "case report (perfect-CSI lower bound): case={:?}, sqrt(rho/(alpha beta M))={:.6e}, \
         single-subarray threshold={:.6e}, all-individual threshold={:.6e}",
        c.case, c.direct_to_ris_ratio, c.single_threshold, c.all_threshold
    )
}

#[derive(Serialize)]
struct OptimizeRow {
    payload: f64,
    n_star: usize,
    p_pilot_star_w: f64,
    energy_star_j: f64,
    p_data_w: f64,
    pilot_snr_ris_db: f64,
    n_continuous: f64,
    p_pilot_continuous_w: f64,
    iterations: usize,
    oracle_n: Option<usize>,
    oracle_p_pilot_w: Option<f64>,
    oracle_energy_j: Option<f64>,
    relative_gap: Option<f64>,
}

fn optimize(config: &ExperimentConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let plan = config.plan()?;
    let options = config.joint_options(&plan);
    let r = optimize_joint(&scenario, &plan, &options).map_err(|source| CliError::Infeasible {
        source,
        report: case_report(&scenario, &plan),
    })?;
    let e = crate::energy::energy(&scenario, &plan, r.n_star, r.p_pilot_star)?;
    let v = r.verification;
    let row = OptimizeRow {
        payload: plan.payload,
        n_star: r.n_star,
        p_pilot_star_w: r.p_pilot_star,
        energy_star_j: r.energy_star,
        p_data_w: e.p_data_used,
        pilot_snr_ris_db: ris_pilot_snr_db(&scenario, r.n_star, r.p_pilot_star),
        n_continuous: r.n_continuous,
        p_pilot_continuous_w: r.p_pilot_continuous,
        iterations: r.iterations,
        oracle_n: v.map(|v| v.oracle_n),
        oracle_p_pilot_w: v.map(|v| v.oracle_p_pilot),
        oracle_energy_j: v.map(|v| v.oracle_energy),
        relative_gap: v.map(|v| v.relative_gap),
    };
    let summary = serde_json::to_value(r).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(report(Table::from_rows(&[row])?, summary))
}

#[derive(Serialize)]
struct SweepOut {
    payload: f64,
    n_star: usize,
    n_continuous: f64,
    p_pilot_star_w: f64,
    pilot_snr_ris_db: f64,
    p_data_w: f64,
    pilot_energy_j: f64,
    pilot_phase_energy_j: f64,
    total_energy_j: f64,
}

fn sweep(config: &ExperimentConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let plan = config.plan()?;
    let payloads = config.payloads()?;
    let options = config.joint_options(&plan);
    let rows: Vec<SweepOut> = payload_sweep(&scenario, &plan, &payloads, &options)
        .map_err(|source| CliError::Infeasible {
            source,
            report: case_report(&scenario, &plan),
        })?
        .into_iter()
        .map(|r| SweepOut {
            payload: r.payload,
            n_star: r.n_star,
            n_continuous: r.n_continuous,
            p_pilot_star_w: r.p_pilot_star,
            pilot_snr_ris_db: ris_pilot_snr_db(&scenario, r.n_star, r.p_pilot_star),
            p_data_w: r.p_data,
            pilot_energy_j: r.pilot_energy,
            pilot_phase_energy_j: r.pilot_phase_energy,
            total_energy_j: r.total_energy,
        })
        .collect();
    let jumps: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[1].n_star != w[0].n_star)
        .map(|w| w[1].payload)
        .collect();
    let summary = json!({ "n_star_jumps_at_payload": jumps });
    Ok(report(Table::from_rows(&rows)?, summary))
}

#[derive(Serialize)]
struct EnergyNRow {
    rho_db: f64,
    n: usize,
    feasible: bool,
    energy_j: f64,
    first_derivative: f64,
    second_derivative: f64,
}

fn energy_vs_n(config: &ExperimentConfig) -> Result<Report, CliError> {
    let base = config.scenario()?;
    let plan = config.plan()?;
    let mut rows = Vec::new();
    let mut cases = Vec::new();
    for rho_db in config.rho_db_values()? {
        let scenario = ChannelScenario {
            rho: db_to_linear(rho_db),
            ..base
        };
        let feasible = divisors(scenario.m);
        for n in 1..=scenario.m {
            let (d1, d2) = derivative_perfect_csi(&scenario, &plan, n as f64);
            rows.push(EnergyNRow {
                rho_db,
                n,
                feasible: feasible.binary_search(&n).is_ok(),
                energy_j: energy_perfect_csi(&scenario, &plan, n as f64),
                first_derivative: d1,
                second_derivative: d2,
            });
        }
        let c = classify_case(&scenario, &plan);
        let r = optimize_special_case(&scenario, &plan)?;
        cases.push(json!({
            "rho_db": rho_db,
            "case": c.case,
            "direct_to_ris_ratio": c.direct_to_ris_ratio,
            "single_threshold": c.single_threshold,
            "all_threshold": c.all_threshold,
            "n_star": r.n_star,
            "n_continuous": r.n_continuous,
            "energy_star_j": r.energy_star,
        }));
    }
    Ok(report(Table::from_rows(&rows)?, json!({ "special_case": cases })))
}

#[derive(Serialize)]
struct VerifyRow {
    form: &'static str,
    n: usize,
    p_pilot_w: f64,
    bits: String,
    rho_db: f64,
    closed_form: f64,
    mc_mean: f64,
    mc_std_error: f64,
    z_score: f64,
    passed: bool,
}

/// Agreement threshold in standard errors.
pub const ORACLE_Z: f64 = 3.0;

fn mc_verify(config: &ExperimentConfig) -> Result<Report, CliError> {
    let scenario = config.scenario()?;
    let plan = config.plan()?;
    let p_data = config.p_data()?;
    let pilots = config.pilot_powers()?;
    let ns = match config.run.n_values {
        Some(_) => config.n_values(scenario.m)?,
        None => {
            let d = divisors(scenario.m);
            let mut picks = vec![d[0], d[d.len() / 2], d[d.len() - 1]];
            picks.dedup();
            picks
        }
    };
    let bits = plan.resolution;
    let rho_db = config.scenario.rho_db;
    let no_direct = ChannelScenario { rho: 0.0, ..scenario };
    let mut rows = Vec::new();
    let mut push = |form, n, p_pilot, resolution: PhaseResolution, rho_db, closed: f64, mc: McEstimate| {
        let z = mc.z_score(closed);
        rows.push(VerifyRow {
            form,
            n,
            p_pilot_w: p_pilot,
            bits: resolution.to_string(),
            rho_db,
            closed_form: closed,
            mc_mean: mc.mean,
            mc_std_error: mc.std_error,
            z_score: z,
            passed: z <= ORACLE_Z,
        });
    };
    let ideal = PhaseResolution::Infinite;
    for &n in &ns {
        let perfect = SnrInputs::perfect(scenario, n, p_data);
        let perfect_cfg = mc_config(config, CsiMode::PerfectCsi, ideal)?;
        push(
            "jensen_lower_bound",
            n,
            f64::INFINITY,
            ideal,
            rho_db,
            avg_snr_lower_bound(&perfect)?,
            mc_jensen_bound(&scenario, n, p_data, &perfect_cfg)?,
        );
        push(
            "exact_perfect_csi",
            n,
            f64::INFINITY,
            ideal,
            rho_db,
            avg_snr_exact_perfect(&perfect)?,
            mc_average_snr(&scenario, n, f64::INFINITY, p_data, &perfect_cfg)?,
        );
        push(
            "baseline_elements_off",
            n,
            f64::INFINITY,
            ideal,
            rho_db,
            avg_snr_baseline_elements_off(&perfect)?,
            mc_baseline_elements_off(&scenario, n, p_data, &perfect_cfg)?,
        );
        let quantized = SnrInputs {
            resolution: bits,
            ..SnrInputs::perfect(no_direct, n, p_data)
        };
        push(
            "quantized_perfect_csi",
            n,
            f64::INFINITY,
            bits,
            f64::NEG_INFINITY,
            avg_snr_quantized_perfect_csi(&quantized)?,
            mc_average_snr(&no_direct, n, f64::INFINITY, p_data, &mc_config(config, CsiMode::PerfectCsi, bits)?)?,
        );
        for &p_pilot in &pilots {
            let inputs = SnrInputs {
                scenario,
                n,
                p_pilot,
                p_data,
                resolution: bits,
            };
            push(
                "general_imperfect_csi",
                n,
                p_pilot,
                bits,
                rho_db,
                avg_snr_general(&inputs)?,
                mc_average_snr(&scenario, n, p_pilot, p_data, &mc_config(config, CsiMode::EstimatedCsi, bits)?)?,
            );
        }
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    let summary = json!({
        "checks": rows.len(),
        "failed": failed,
        "threshold_std_errors": ORACLE_Z,
        "all_passed": failed == 0,
    });
    Ok(Report {
        table: Table::from_rows(&rows)?,
        summary,
        passed: failed == 0,
    })
}
