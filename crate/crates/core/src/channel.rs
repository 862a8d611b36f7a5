//! Direct path and subarray channel model.
//!
//! The direct path is `p ~ CN(0, rho)`. Subarray `n` aggregates `M/N`
//! elements into `Z_n = sum_i sqrt(alpha) e^{-j phi_{n,i}} b_{n,i}` with
//! `b_{n,i} ~ CN(0, beta)`, so `Z_n ~ CN(0, alpha beta M / N)`. The default
//! sampler draws `Z_n` directly from that law; [`Sampler::PerElement`] builds it
//! element by element (uniform LoS phases) for cross-checking.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantization::wrap_angle;
use crate::units::db_to_linear;

/// Static propagation and radio constants, all linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScenario {
    /// Average gain of the direct BS-UE path.
    pub rho: f64,
    /// Per-element RIS-BS gain.
    pub alpha: f64,
    /// Per-element UE-RIS gain.
    pub beta: f64,
    /// Number of RIS elements.
    pub m: usize,
    /// Receiver noise power in watts.
    pub sigma2: f64,
    /// Symbol rate in symbols per second.
    pub bandwidth: f64,
}

impl ChannelScenario {
    pub fn new(
        rho: f64,
        alpha: f64,
        beta: f64,
        m: usize,
        sigma2: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        let scenario = Self {
            rho,
            alpha,
            beta,
            m,
            sigma2,
            bandwidth,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Simulation defaults: alpha = -60 dB, beta = -80 dB, M = 1024,
    /// B = 100 MHz, sigma2 = -123.9 dBW, with the given direct-path gain in dB.
    pub fn reference(rho_db: f64) -> Self {
        Self {
            rho: db_to_linear(rho_db),
            alpha: db_to_linear(-60.0),
            beta: db_to_linear(-80.0),
            m: 1024,
            sigma2: db_to_linear(-123.9),
            bandwidth: 100e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: String) -> Error {
            Error::InvalidParameter { name, reason }
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(bad("rho", format!("must be finite and >= 0, got {}", self.rho)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(bad("alpha", format!("must be finite and > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(bad("beta", format!("must be finite and > 0, got {}", self.beta)));
        }
        if self.m == 0 {
            return Err(bad("m", "must be at least 1".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::NonPositiveNoise(self.sigma2));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(bad(
                "bandwidth",
                format!("must be finite and > 0, got {}", self.bandwidth),
            ));
        }
        Ok(())
    }

    /// Total cascaded gain `alpha beta M`.
    pub fn cascaded_gain(&self) -> f64 {
        self.alpha * self.beta * self.m as f64
    }

    /// Variance of one subarray channel, `alpha beta M / N`. `n` may be real.
    pub fn subarray_variance(&self, n: f64) -> f64 {
        self.cascaded_gain() / n
    }

    /// Checks that `n` is a feasible subarray count.
    pub fn check_subarrays(&self, n: usize) -> Result<()> {
        if n == 0 || !self.m.is_multiple_of(n) {
            return Err(Error::InvalidSubarrayCount { n, m: self.m });
        }
        Ok(())
    }
}

/// One draw of the direct path and the `N` subarray channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub direct: Complex64,
    pub subarrays: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn n(&self) -> usize {
        self.subarrays.len()
    }

    /// The stacked coefficient vector `[p, Z_1, ..., Z_N]`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        std::iter::once(self.direct)
            .chain(self.subarrays.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `Z_n ~ CN(0, alpha beta M / N)` drawn directly, O(N).
    #[default]
    Aggregate,
    /// Sum of `M/N` element paths with uniform LoS phases, O(M).
    PerElement,
}

/// `CN(0, variance)` from two real Gaussians of variance `variance / 2`.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

pub fn sample_realization<R: Rng + ?Sized>(
    scenario: &ChannelScenario,
    n: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    sample_realization_with(scenario, n, Sampler::Aggregate, rng)
}

pub fn sample_realization_with<R: Rng + ?Sized>(
    scenario: &ChannelScenario,
    n: usize,
    sampler: Sampler,
    rng: &mut R,
) -> Result<ChannelRealization> {
    scenario.check_subarrays(n)?;
    let direct = complex_gaussian(scenario.rho, rng);
    let subarrays = match sampler {
        Sampler::Aggregate => {
            let var = scenario.subarray_variance(n as f64);
            (0..n).map(|_| complex_gaussian(var, rng)).collect()
        }
        Sampler::PerElement => {
            let per_subarray = scenario.m / n;
            let amp = scenario.alpha.sqrt();
            (0..n)
                .map(|_| {
                    (0..per_subarray)
                        .map(|_| {
                            let phi = rng.random::<f64>() * std::f64::consts::TAU;
                            let b = complex_gaussian(scenario.beta, rng);
                            Complex64::from_polar(amp, -phi) * b
                        })
                        .sum()
                })
                .collect()
        }
    };
    Ok(ChannelRealization { direct, subarrays })
}

/// `g = p + sum_n Z_n e^{-j c_n}`.
pub fn end_to_end_channel(realization: &ChannelRealization, phases: &[f64]) -> Result<Complex64> {
    if phases.len() != realization.n() {
        return Err(Error::LengthMismatch {
            expected: realization.n(),
            got: phases.len(),
        });
    }
    let reflected: Complex64 = realization
        .subarrays
        .iter()
        .zip(phases)
        .map(|(z, &c)| z * Complex64::from_polar(1.0, -c))
        .sum();
    Ok(realization.direct + reflected)
}

/// `(p_data / sigma2) |g|^2`.
pub fn instantaneous_snr(g: Complex64, p_data: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveNoise(sigma2));
    }
    if !(p_data >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "p_data",
            reason: format!("must be >= 0, got {p_data}"),
        });
    }
    Ok(p_data / sigma2 * g.norm_sqr())
}

/// Argument with the convention `arg(0) = 0`.
pub fn phase_of(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        z.arg()
    }
}

/// Co-phasing configuration `c_n = arg(Z_n) - arg(p)` in `(-pi, pi]`.
pub fn optimal_phases(realization: &ChannelRealization) -> Vec<f64> {
    co_phasing(realization.direct, &realization.subarrays)
}

/// Co-phasing targets computed from any (true or estimated) coefficients.
pub fn co_phasing(direct: Complex64, subarrays: &[Complex64]) -> Vec<f64> {
    let reference = phase_of(direct);
    subarrays
        .iter()
        .map(|&z| wrap_angle(phase_of(z) - reference))
        .collect()
}
