//! Uniform `b`-bit phase codebooks.
//!
//! `K = 2^b` phases equally spaced by `2 pi / K`. The 1- and 2-bit sets are
//! offset by `pi / 4` (`{pi/4, -3pi/4}` and `{+-pi/4, +-3pi/4}`); 3 bits and
//! more include `0`. All angles are reported in `(-pi, pi]`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported resolution in bits.
pub const MAX_BITS: u32 = 16;

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `sin(pi x) / (pi x)`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `sinc(1/K)` for `K >= 2` states.
pub fn sinc_factor(states: u64) -> Result<f64> {
    if states < 2 {
        return Err(Error::InvalidStates(states));
    }
    Ok(sinc(1.0 / states as f64))
}

/// Phase-shift resolution of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseResolution {
    Bits(u32),
    Infinite,
}

impl PhaseResolution {
    pub fn validate(self) -> Result<Self> {
        match self {
            PhaseResolution::Bits(b) if b == 0 || b > MAX_BITS => Err(Error::InvalidParameter {
                name: "bits",
                reason: format!("must be in 1..={MAX_BITS} or \"inf\", got {b}"),
            }),
            r => Ok(r),
        }
    }

    /// Number of states `K`, `None` when unquantized.
    pub fn states(self) -> Option<u64> {
        match self {
            PhaseResolution::Bits(b) => Some(1u64 << b),
            PhaseResolution::Infinite => None,
        }
    }

    /// `sinc(1/K)`, equal to 1 for infinite resolution.
    pub fn sinc_factor(self) -> f64 {
        match self.states() {
            Some(k) => sinc(1.0 / k as f64),
            None => 1.0,
        }
    }
}

impl fmt::Display for PhaseResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseResolution::Bits(b) => write!(f, "{b}"),
            PhaseResolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PhaseResolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" => Ok(PhaseResolution::Infinite),
            other => other
                .parse::<u32>()
                .map_err(|_| Error::InvalidParameter {
                    name: "bits",
                    reason: format!("expected a bit count or \"inf\", got {other:?}"),
                })
                .and_then(|b| PhaseResolution::Bits(b).validate()),
        }
    }
}

impl Serialize for PhaseResolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PhaseResolution::Bits(b) => s.serialize_u32(*b),
            PhaseResolution::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PhaseResolution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(b) => u32::try_from(b)
                .map_err(|_| Error::InvalidParameter {
                    name: "bits",
                    reason: format!("must be in 1..={MAX_BITS} or \"inf\", got {b}"),
                })
                .and_then(|b| PhaseResolution::Bits(b).validate()),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// A discrete set of reflection phases.
#[derive(Debug, Clone, PartialEq)]
pub struct RisCodebook {
    resolution: PhaseResolution,
    offset: f64,
    /// Codewords indexed by cell: `offset + k * 2pi/K`, wrapped.
    codewords: Vec<f64>,
}

impl RisCodebook {
    pub fn new(resolution: PhaseResolution) -> Result<Self> {
        let resolution = resolution.validate()?;
        let (offset, codewords) = match resolution.states() {
            Some(k) => {
                let offset = if k <= 4 { PI / 4.0 } else { 0.0 };
                let spacing = TAU / k as f64;
                let words = (0..k).map(|i| wrap_angle(offset + i as f64 * spacing)).collect();
                (offset, words)
            }
            None => (0.0, Vec::new()),
        };
        Ok(Self {
            resolution,
            offset,
            codewords,
        })
    }

    pub fn bits(bits: u32) -> Result<Self> {
        Self::new(PhaseResolution::Bits(bits))
    }

    pub fn infinite() -> Self {
        Self {
            resolution: PhaseResolution::Infinite,
            offset: 0.0,
            codewords: Vec::new(),
        }
    }

    pub fn resolution(&self) -> PhaseResolution {
        self.resolution
    }

    pub fn states(&self) -> Option<u64> {
        self.resolution.states()
    }

    /// Codebook angles in ascending order within `(-pi, pi]`. Empty when
    /// the resolution is infinite.
    pub fn phases(&self) -> Vec<f64> {
        let mut p = self.codewords.clone();
        p.sort_by(f64::total_cmp);
        p
    }

    /// Cell index and normalized error `r` in `[-1/2, 1/2)`; the quantized
    /// phase is `offset + idx * spacing` and the error is `r * spacing`.
    fn cell(&self, target: f64) -> (i64, f64) {
        let k = self.codewords.len() as f64;
        let spacing = TAU / k;
        let x = (wrap_angle(target) - self.offset) / spacing;
        // ceil(x - 1/2) sends exact midpoints to the lower codeword
        let mut idx = (x - 0.5).ceil();
        let mut r = idx - x;
        if r >= 0.5 {
            idx -= 1.0;
            r -= 1.0;
        } else if r < -0.5 {
            idx += 1.0;
            r += 1.0;
        }
        (idx as i64, r)
    }

    /// Nearest codeword to `target` on the circle. Midpoints resolve to the
    /// codeword just below the target. Identity for infinite resolution.
    pub fn quantize_phase(&self, target: f64) -> f64 {
        if self.codewords.is_empty() {
            return wrap_angle(target);
        }
        let (idx, _) = self.cell(target);
        let k = self.codewords.len() as i64;
        self.codewords[idx.rem_euclid(k) as usize]
    }

    /// `wrap(quantize_phase(target) - target)`, always in `[-pi/K, pi/K)`.
    pub fn quantization_error(&self, target: f64) -> f64 {
        if self.codewords.is_empty() {
            return 0.0;
        }
        let (_, r) = self.cell(target);
        r * TAU / self.codewords.len() as f64
    }

    pub fn sinc_factor(&self) -> f64 {
        self.resolution.sinc_factor()
    }
}
