//! dB helpers. Everything inside the crate is linear; dB only appears in
//! configuration files and reports.

/// Power ratio from dB, `10^(db/10)`. `-inf` maps to exactly zero.
pub fn db_to_linear(db: f64) -> f64 {
    if db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

/// Power ratio to dB, `10 log10(x)`. Zero maps to `-inf`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
