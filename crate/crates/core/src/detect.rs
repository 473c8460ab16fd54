//! Detection statistics: heralding, detector efficiency, dark counts and
//! seeded Monte Carlo sampling of recorded bits.
//!
//! Per heralded photon slot, a real click at Alice's detector requires the
//! photon to traverse the system (heralding efficiency `h`) and to be
//! detected (efficiency `eta`); a dark count fires with probability `d`
//! per coincidence window independently of the light. Clicks combine by
//! inclusion-exclusion, so `p_click = 1 - (1 - h eta p)(1 - d)`.
//!
//! Violation probabilities are physical leakage: they scale with the
//! photon's presence (`h`) but not with detection, and exclude dark
//! counts.
//!
//! [`click_probabilities`] is pure; [`sample_bit_transmission`] is pure
//! given its [`TrialRng`] value, and parallel trials should use distinct
//! stream ids.

use thiserror::Error;

pub use crate::rng::TrialRng;

use crate::scalar::{real, Scalar};
use crate::zeno::{run_photon, ProtocolSpec, ZenoError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("coincidence window must be positive, got {0} ns")]
    InvalidWindow(f64),
    #[error("a bit must be encoded in at least one photon")]
    ZeroPhotons,
    #[error(transparent)]
    Zeno(#[from] ZenoError),
}

/// Detection and optics noise figures of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams<T> {
    /// Probability a heralded photon traverses source, chip and coupling.
    pub heralding_efficiency: T,
    /// Single-photon detector efficiency.
    pub detector_efficiency: T,
    /// False-click probability per coincidence window.
    pub dark_prob: T,
    /// Coincidence window in nanoseconds; documentation only, the modeled
    /// quantity is `dark_prob`.
    pub coincidence_window_ns: T,
    /// Mean per-MZI interferometric visibility.
    pub visibility: T,
    /// Probability a SWAP reflects amplitude back into the line.
    pub swap_backscatter: T,
}

impl<T: Scalar> NoiseParams<T> {
    /// Noise-free channel.
    pub fn ideal() -> Self {
        Self {
            heralding_efficiency: T::one(),
            detector_efficiency: T::one(),
            dark_prob: T::zero(),
            coincidence_window_ns: real(2.5),
            visibility: T::one(),
            swap_backscatter: T::zero(),
        }
    }

    /// Figures of the silicon-photonics testbed this model is tuned to:
    /// ~3% heralding, ~90% detection, 99.94% mean visibility, at most 1%
    /// SWAP backscatter, 2.5 ns coincidence window, and a configurable
    /// dark-count floor defaulting to 1e-6 per window.
    pub fn device_defaults() -> Self {
        Self {
            heralding_efficiency: real(0.03),
            detector_efficiency: real(0.90),
            dark_prob: real(1e-6),
            coincidence_window_ns: real(2.5),
            visibility: real(0.9994),
            swap_backscatter: real(0.01),
        }
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        let fields = [
            ("heralding_efficiency", self.heralding_efficiency),
            ("detector_efficiency", self.detector_efficiency),
            ("dark_prob", self.dark_prob),
            ("visibility", self.visibility),
            ("swap_backscatter", self.swap_backscatter),
        ];
        for (name, value) in fields {
            if !(value >= T::zero() && value <= T::one()) {
                return Err(DetectError::InvalidProbability {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let window = self.coincidence_window_ns;
        if window.is_nan() || window <= T::zero() {
            return Err(DetectError::InvalidWindow(
                window.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(())
    }

    /// Whether the optics part of this parameter set is noise-free.
    pub fn optics_ideal(&self) -> bool {
        self.visibility == T::one() && self.swap_backscatter == T::zero()
    }

    /// Protocol description for chain length `n` carrying this set's
    /// optical noise.
    pub fn protocol_spec(&self, n: usize, bob_bit: bool) -> Result<ProtocolSpec<T>, ZenoError> {
        if self.optics_ideal() {
            ProtocolSpec::ideal(n, bob_bit)
        } else {
            ProtocolSpec::noisy(n, bob_bit, self.visibility, self.swap_backscatter)
        }
    }
}

/// Per heralded photon slot: click and violation probabilities for both
/// of Bob's bit values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbabilities<T> {
    /// Alice's detector fires while Bob sends a logic 1.
    pub p_click_bit1: T,
    /// Alice's detector fires while Bob sends a logic 0.
    pub p_click_bit0: T,
    /// Physical leakage into Alice's laboratory for a logic 0 (excludes
    /// dark counts and detection).
    pub p_violation_bit0: T,
    /// Physical backscatter re-entering the line for a logic 1.
    pub p_violation_bit1: T,
}

/// Combine a transmission probability with dark counts by
/// inclusion-exclusion: `1 - (1 - transmit)(1 - dark)` expanded, so a
/// silent channel floors at exactly the dark rate.
fn click<T: Scalar>(transmit: T, dark: T) -> T {
    transmit + dark - transmit * dark
}

/// Per-photon click and violation probabilities for both bit values.
///
/// `spec` supplies the chain length and idealness; the optical-noise
/// fields of `noise` take precedence over the ones in `spec` so one
/// parameter set drives the whole channel.
pub fn click_probabilities<T: Scalar>(
    spec: &ProtocolSpec<T>,
    noise: &NoiseParams<T>,
) -> Result<ClickProbabilities<T>, DetectError> {
    spec.validate()?;
    noise.validate()?;
    let n = spec.num_beamsplitters;
    let noise = if spec.ideal {
        NoiseParams {
            visibility: T::one(),
            swap_backscatter: T::zero(),
            ..*noise
        }
    } else {
        *noise
    };
    let bit0 = run_photon(&noise.protocol_spec(n, false)?)?;
    let bit1 = run_photon(&noise.protocol_spec(n, true)?)?;

    let h = noise.heralding_efficiency;
    let eta = noise.detector_efficiency;
    let d = noise.dark_prob;
    Ok(ClickProbabilities {
        p_click_bit1: click(h * eta * bit1.p_alice, d),
        p_click_bit0: click(h * eta * bit0.p_alice, d),
        p_violation_bit0: h * bit0.p_violation_amp,
        p_violation_bit1: h * bit1.p_violation_amp,
    })
}

/// Record one logical bit from `m` photon slots: Alice records a 1 iff at
/// least one slot produced a click at her detector.
///
/// Exactly `m` Bernoulli draws are consumed, so a given `(seed, stream)`
/// always yields the same trial sequence.
pub fn sample_bit_transmission<T: Scalar>(
    bit: bool,
    m: usize,
    probs: &ClickProbabilities<T>,
    rng: &mut TrialRng,
) -> Result<bool, DetectError> {
    if m < 1 {
        return Err(DetectError::ZeroPhotons);
    }
    let p = if bit {
        probs.p_click_bit1
    } else {
        probs.p_click_bit0
    }
    .to_f64()
    .expect("probability converts to f64");
    let mut clicked = false;
    for _ in 0..m {
        if rng.next_bool(p) {
            clicked = true;
        }
    }
    Ok(clicked)
}
