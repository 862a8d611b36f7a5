#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use ris_energy::channel::ChannelScenario;
use ris_energy::units::db_to_linear;

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn assert_within_se(label: &str, xs: &[f64], want: f64, k: f64) {
    let (mean, se) = mean_se(xs);
    assert!(
        (mean - want).abs() <= k * se,
        "{label}: sample mean {mean:.6e} vs {want:.6e} ({:.2} standard errors)",
        (mean - want).abs() / se
    );
}

pub fn re_im(zs: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (zs.iter().map(|z| z.re).collect(), zs.iter().map(|z| z.im).collect())
}

/// Scenario with path losses drawn around the figure setups.
pub fn random_scenario<R: Rng>(rng: &mut R) -> ChannelScenario {
    let m = 1usize << rng.random_range(4..=10);
    ChannelScenario {
        rho: db_to_linear(rng.random_range(-120.0..-85.0)),
        alpha: db_to_linear(rng.random_range(-85.0..-55.0)),
        beta: db_to_linear(rng.random_range(-85.0..-55.0)),
        m,
        sigma2: db_to_linear(-123.9),
        bandwidth: 1e8,
    }
}

/// A random divisor of `m`.
pub fn random_divisor<R: Rng>(m: usize, rng: &mut R) -> usize {
    let d = ris_energy::divisors(m);
    d[rng.random_range(0..d.len())]
}
