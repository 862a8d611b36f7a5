//! Energy-aware configuration of a reconfigurable intelligent surface (RIS)
//! for short uplink transmissions.
//!
//! A single-antenna UE reaches a single-antenna BS over a Rayleigh-fading
//! direct path and an RIS with `M` elements grouped into `N` subarrays. The
//! crate covers:
//!
//! * [`channel`]: sampling of the direct path and subarray channels, the
//!   end-to-end channel and the co-phasing RIS configuration;
//! * [`estimation`]: DFT pilot patterns and the per-coefficient MMSE filters;
//! * [`quantization`]: `b`-bit phase codebooks and the `sinc(1/K)` factor;
//! * [`snr`]: closed-form average SNRs and the required data power;
//! * [`energy`]: the UE energy model, the joint `(N, P_pilot)` optimizer and
//!   the perfect-CSI special case;
//! * [`montecarlo`]: the end-to-end simulator used as an oracle;
//! * [`cli`]: configuration files and experiment recipes behind the
//!   `ris-energy` binary.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod energy;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod quantization;
pub mod snr;
pub mod units;

pub use channel::{ChannelRealization, ChannelScenario};
pub use error::{Error, Result};
pub use quantization::{PhaseResolution, RisCodebook};

/// Divisors of `m` in ascending order: the feasible subarray counts.
pub fn divisors(m: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m.is_multiple_of(d) {
            small.push(d);
            if d * d != m {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}
