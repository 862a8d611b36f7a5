//! Pilot transmission and per-coefficient MMSE estimation.
//!
//! The UE sends `N + 1` pilots of power `P_pilot` while the surface steps
//! through the rows of a scaled-unitary pattern `Psi` (`Psi^H Psi = (N+1) I`,
//! first column all ones for the direct path). Decorrelating with
//! `Psi^H / sqrt(N+1)` gives `ybar = sqrt((N+1) P_pilot) h + wbar` with
//! `wbar ~ CN(0, sigma2 I)`, after which each coefficient of
//! `h = [p, Z_1, ..., Z_N]` is estimated by a scalar Wiener filter.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, ChannelRealization, ChannelScenario};
use crate::error::{Error, Result};

/// `(N+1) x (N+1)` DFT pattern, `Psi[t][k] = exp(-j 2 pi t k / (N+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl PilotMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length `N + 1`.
    pub fn size(&self) -> usize {
        self.n + 1
    }

    pub fn get(&self, t: usize, k: usize) -> Complex64 {
        self.entries[t * self.size() + k]
    }

    pub fn row(&self, t: usize) -> &[Complex64] {
        let s = self.size();
        &self.entries[t * s..(t + 1) * s]
    }

    /// `Psi x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        Ok((0..self.size())
            .map(|t| self.row(t).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Psi^H y`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(y.len())?;
        let s = self.size();
        Ok((0..s)
            .map(|k| (0..s).map(|t| self.get(t, k).conj() * y[t]).sum())
            .collect())
    }

    /// `Psi^H Psi`, row-major.
    pub fn gram(&self) -> Vec<Complex64> {
        let s = self.size();
        let mut g = vec![Complex64::new(0.0, 0.0); s * s];
        for i in 0..s {
            for j in 0..s {
                g[i * s + j] = (0..s).map(|t| self.get(t, i).conj() * self.get(t, j)).sum();
            }
        }
        g
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: len,
            });
        }
        Ok(())
    }
}

pub fn build_pilot_matrix(n: usize) -> Result<PilotMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "pilot pattern needs at least one subarray".into(),
        });
    }
    let s = n + 1;
    // reduce t*k modulo s before scaling so large indices stay exact
    let entries = (0..s)
        .flat_map(|t| {
            (0..s).map(move |k| {
                let idx = (t * k) % s;
                Complex64::from_polar(1.0, -std::f64::consts::TAU * idx as f64 / s as f64)
            })
        })
        .collect();
    Ok(PilotMatrix { n, entries })
}

fn check_pilot_power(p_pilot: f64) -> Result<()> {
    if !(p_pilot >= 0.0 && p_pilot.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p_pilot",
            reason: format!("must be finite and >= 0, got {p_pilot}"),
        });
    }
    Ok(())
}

fn check_noise(sigma2: f64) -> Result<()> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::NonPositiveNoise(sigma2));
    }
    Ok(())
}

/// Full pilot phase: `y = sqrt(P) Psi h + w`, returned decorrelated as
/// `Psi^H y / sqrt(N+1)`. `sigma2 = 0` gives the noiseless observation.
pub fn simulate_pilot_reception<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    psi: &PilotMatrix,
    p_pilot: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_pilot_power(p_pilot)?;
    check_noise(sigma2)?;
    if psi.n() != realization.n() {
        return Err(Error::LengthMismatch {
            expected: psi.n(),
            got: realization.n(),
        });
    }
    let amp = p_pilot.sqrt();
    let y: Vec<Complex64> = psi
        .apply(&realization.coefficients())?
        .into_iter()
        .map(|v| amp * v + complex_gaussian(sigma2, rng))
        .collect();
    let scale = 1.0 / (psi.size() as f64).sqrt();
    Ok(psi.apply_adjoint(&y)?.into_iter().map(|v| v * scale).collect())
}

/// Same law as [`simulate_pilot_reception`], drawing `wbar ~ CN(0, sigma2 I)`
/// directly instead of materializing `Psi`.
pub fn decorrelated_reception<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    p_pilot: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_pilot_power(p_pilot)?;
    check_noise(sigma2)?;
    let amp = ((realization.n() + 1) as f64 * p_pilot).sqrt();
    Ok(realization
        .coefficients()
        .into_iter()
        .map(|h| amp * h + complex_gaussian(sigma2, rng))
        .collect())
}

/// MMSE estimates of the direct path and the subarray channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub direct: Complex64,
    pub subarrays: Vec<Complex64>,
    /// `E|p_hat|^2`.
    pub est_var_direct: f64,
    /// `E|Z_hat_n|^2`, identical for every subarray.
    pub est_var_subarray: f64,
}

/// Variance of an MMSE estimate of a coefficient with prior variance
/// `prior`: `(N+1) P prior^2 / ((N+1) P prior + sigma2)`. Accepts
/// `p_pilot = inf` (returns `prior`) and real-valued `n`.
pub fn estimate_variance(prior: f64, n: f64, p_pilot: f64, sigma2: f64) -> f64 {
    if prior == 0.0 || p_pilot == 0.0 {
        return 0.0;
    }
    if p_pilot.is_infinite() {
        return prior;
    }
    let snr = (n + 1.0) * p_pilot * prior / sigma2;
    prior * snr / (snr + 1.0)
}

/// Wiener gain `sqrt((N+1) P) prior / ((N+1) P prior + sigma2)`.
fn wiener_gain(prior: f64, n: usize, p_pilot: f64, sigma2: f64) -> f64 {
    let energy = (n + 1) as f64 * p_pilot;
    energy.sqrt() * prior / (energy * prior + sigma2)
}

pub fn mmse_estimate(
    ybar: &[Complex64],
    scenario: &ChannelScenario,
    n: usize,
    p_pilot: f64,
) -> Result<ChannelEstimate> {
    check_pilot_power(p_pilot)?;
    if ybar.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: ybar.len(),
        });
    }
    let sigma2 = scenario.sigma2;
    let z_prior = scenario.subarray_variance(n as f64);
    let gp = wiener_gain(scenario.rho, n, p_pilot, sigma2);
    let gz = wiener_gain(z_prior, n, p_pilot, sigma2);
    Ok(ChannelEstimate {
        direct: ybar[0] * gp,
        subarrays: ybar[1..].iter().map(|y| y * gz).collect(),
        est_var_direct: estimate_variance(scenario.rho, n as f64, p_pilot, sigma2),
        est_var_subarray: estimate_variance(z_prior, n as f64, p_pilot, sigma2),
    })
}

/// Pilot SNRs `((N+1) P rho / sigma2, (N+1) P alpha beta M / (N sigma2))`
/// for the direct path and for each subarray channel.
pub fn pilot_snr(scenario: &ChannelScenario, n: usize, p_pilot: f64) -> (f64, f64) {
    let energy = (n + 1) as f64 * p_pilot / scenario.sigma2;
    (
        energy * scenario.rho,
        energy * scenario.subarray_variance(n as f64),
    )
}

/// Pilot power giving a per-subarray pilot SNR of `gamma_p`.
pub fn pilot_power_for_snr(scenario: &ChannelScenario, n: f64, gamma_p: f64) -> f64 {
    gamma_p * scenario.sigma2 * n / ((n + 1.0) * scenario.cascaded_gain())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_realization;
    use crate::units::linear_to_db;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_dft() {
        let psi = build_pilot_matrix(1).unwrap();
        let want = [[1.0, 1.0], [1.0, -1.0]];
        for (t, row) in want.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                assert!((psi.get(t, k) - Complex64::new(w, 0.0)).norm() < 1e-15);
            }
        }
        assert!(build_pilot_matrix(0).is_err());
    }

    #[test]
    fn scaled_unitary() {
        for n in [1, 3, 7, 16, 63] {
            let psi = build_pilot_matrix(n).unwrap();
            let s = n + 1;
            let g = psi.gram();
            for i in 0..s {
                for j in 0..s {
                    let want = if i == j { s as f64 } else { 0.0 };
                    assert!((g[i * s + j] - Complex64::new(want, 0.0)).norm() < 1e-10, "n={n}");
                }
            }
        }
    }

    #[test]
    fn structure_of_large_patterns() {
        for n in [100, 511, 1024] {
            let psi = build_pilot_matrix(n).unwrap();
            for i in 0..=n {
                assert_eq!(psi.get(i, 0), Complex64::new(1.0, 0.0));
                assert_eq!(psi.get(0, i), Complex64::new(1.0, 0.0));
            }
            for t in (0..=n).step_by(37) {
                for k in (0..=n).step_by(13) {
                    assert!((psi.get(t, k).norm() - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn noiseless_reception_is_scaled_channel() {
        let s = ChannelScenario::reference(-100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = sample_realization(&s, 8, &mut rng).unwrap();
        let psi = build_pilot_matrix(8).unwrap();
        let p = 0.02;
        let ybar = simulate_pilot_reception(&r, &psi, p, 0.0, &mut rng).unwrap();
        let amp = (9.0 * p).sqrt();
        for (y, h) in ybar.iter().zip(r.coefficients()) {
            assert!((y - amp * h).norm() <= 1e-12 * (amp * h).norm().max(1e-30));
        }
        let fast = decorrelated_reception(&r, p, 0.0, &mut rng).unwrap();
        for (a, b) in fast.iter().zip(&ybar) {
            assert!((a - b).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn zero_pilot_power_gives_zero_estimates() {
        let s = ChannelScenario::reference(-100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = sample_realization(&s, 4, &mut rng).unwrap();
        let ybar = decorrelated_reception(&r, 0.0, s.sigma2, &mut rng).unwrap();
        let est = mmse_estimate(&ybar, &s, 4, 0.0).unwrap();
        assert_eq!(est.direct, Complex64::new(0.0, 0.0));
        assert!(est.subarrays.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(est.est_var_direct, 0.0);
        assert_eq!(est.est_var_subarray, 0.0);
    }

    #[test]
    fn high_pilot_power_recovers_channel() {
        let s = ChannelScenario::reference(-100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = sample_realization(&s, 4, &mut rng).unwrap();
        let p = 1e15;
        let ybar = decorrelated_reception(&r, p, s.sigma2, &mut rng).unwrap();
        let est = mmse_estimate(&ybar, &s, 4, p).unwrap();
        assert!((est.direct - r.direct).norm() < 1e-6 * r.direct.norm());
        for (zh, z) in est.subarrays.iter().zip(&r.subarrays) {
            assert!((zh - z).norm() < 1e-6 * z.norm());
        }
        assert!((est.est_var_direct / s.rho - 1.0).abs() < 1e-6);
    }

    #[test]
    fn estimate_variances_follow_closed_forms() {
        let s = ChannelScenario::reference(-110.0);
        let (n, p) = (64usize, 0.01);
        let e = (n + 1) as f64 * p;
        let want_p = e * s.rho * s.rho / (e * s.rho + s.sigma2);
        let zv = s.cascaded_gain() / n as f64;
        let want_z = e * zv * zv / (e * zv + s.sigma2);
        assert!((estimate_variance(s.rho, n as f64, p, s.sigma2) / want_p - 1.0).abs() < 1e-12);
        assert!((estimate_variance(zv, n as f64, p, s.sigma2) / want_z - 1.0).abs() < 1e-12);
        assert!(want_p < s.rho && want_z < zv);
        assert_eq!(estimate_variance(zv, n as f64, f64::INFINITY, s.sigma2), zv);
    }

    #[test]
    fn estimate_variance_increases_with_power_and_length() {
        let s = ChannelScenario::reference(-110.0);
        let mut prev = 0.0;
        for k in 0..40 {
            let p = 1e-6 * 1.5f64.powi(k);
            let v = estimate_variance(s.rho, 16.0, p, s.sigma2);
            assert!(v > prev);
            prev = v;
        }
        // fixed prior, growing pilot length
        let mut prev = 0.0;
        for n in 1..200 {
            let v = estimate_variance(1e-11, n as f64, 0.01, s.sigma2);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn pilot_snr_examples() {
        let s = ChannelScenario::reference(-110.0);
        assert_eq!(pilot_snr(&s, 16, 0.0), (0.0, 0.0));
        let (_, ris) = pilot_snr(&s, s.m, 0.02);
        let want = (s.m + 1) as f64 * 0.02 * s.alpha * s.beta / s.sigma2;
        assert!((ris / want - 1.0).abs() < 1e-12);
        // 10 to 40 mW per-element pilots sit around -6 to 0 dB
        let lo = linear_to_db(pilot_snr(&s, 1024, 0.010).1);
        let hi = linear_to_db(pilot_snr(&s, 1024, 0.040).1);
        assert!((lo + 5.0).abs() < 1.5 && hi.abs() < 1.5, "{lo} {hi}");
        let p = pilot_power_for_snr(&s, 64.0, 100.0);
        assert!((pilot_snr(&s, 64, p).1 / 100.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let s = ChannelScenario::reference(-110.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = sample_realization(&s, 4, &mut rng).unwrap();
        let psi = build_pilot_matrix(8).unwrap();
        assert!(simulate_pilot_reception(&r, &psi, 0.01, s.sigma2, &mut rng).is_err());
        assert!(mmse_estimate(&[Complex64::new(0.0, 0.0); 3], &s, 4, 0.01).is_err());
    }
}
