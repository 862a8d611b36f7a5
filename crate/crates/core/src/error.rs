use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("subarray count {n} must be positive and divide the element count {m}")]
    InvalidSubarrayCount { n: usize, m: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("noise power must be positive (got {0})")]
    NonPositiveNoise(f64),

    #[error("quantization needs at least 2 states (got {0})")]
    InvalidStates(u64),

    #[error("no signal can reach the receiver: direct and reflected gains are both zero")]
    SignalImpossible,

    #[error(
        "descent did not converge after {iterations} iterations \
         (best iterate N = {n:.3}, P_pilot = {p_pilot:.6e} W, E = {energy:.6e} J)"
    )]
    NotConverged {
        iterations: usize,
        n: f64,
        p_pilot: f64,
        energy: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
