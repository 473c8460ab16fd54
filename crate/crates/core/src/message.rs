//! Bit- and image-level protocol: average bit error, counterfactual
//! violation accounting, photons-per-bit optimisation, message
//! transmission and image fidelity.
//!
//! A logical bit is encoded in `m` photon slots; Alice records a 1 iff at
//! least one slot clicks. With per-photon error probabilities `p1` (logic
//! 1: no photon arrives) and `p0` (logic 0: a spurious click), the
//! equal-prior average bit error is
//!
//! ```text
//! exact:       (p1^m + 1 - (1 - p0)^m) / 2
//! first-order: (p1^m + m p0) / 2
//! ```
//!
//! and the violation probability of a random bit is `m p0 / (2 eta)`,
//! which converts observed clicks back to physical photons through the
//! detector efficiency `eta` (and, as written, still contains the dark
//! counts; the physical per-photon violations in
//! [`ClickProbabilities`](crate::detect::ClickProbabilities) exclude
//! them).
//!
//! Everything here is pure except [`transmit_message`], which consumes an
//! explicit [`TrialRng`]; independent messages or bits can run in
//! parallel on distinct streams.

use thiserror::Error;

use crate::detect::{
    click_probabilities, sample_bit_transmission, DetectError, NoiseParams, TrialRng,
};
use crate::pbm::PbmError;
use crate::scalar::{count, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MessageError {
    #[error("a bit must be encoded in at least one photon")]
    ZeroPhotons,
    #[error("detector efficiency {0} is outside (0, 1]")]
    InvalidEta(f64),
    #[error("bitmap is {width} x {height} but carries {got} bits")]
    BitCountMismatch {
        width: usize,
        height: usize,
        got: usize,
    },
    #[error("empty bitmap ({width} x {height})")]
    EmptyBitmap { width: usize, height: usize },
    #[error("bitmap sizes differ: {0} x {1} vs {2} x {3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Pbm(#[from] PbmError),
}

/// How a message is encoded on the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingConfig {
    /// Photon slots per logical bit, `m >= 1`.
    pub photons_per_bit: usize,
    /// Chain length, `n >= 2`.
    pub num_beamsplitters: usize,
}

/// Binary image, row-major; white pixels carry logic 1, black logic 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitmapMessage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitmapMessage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MessageError> {
        if width == 0 || height == 0 {
            return Err(MessageError::EmptyBitmap { width, height });
        }
        if bits.len() != width * height {
            return Err(MessageError::BitCountMismatch {
                width,
                height,
                got: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Constant-colour image.
    pub fn filled(width: usize, height: usize, white: bool) -> Result<Self, MessageError> {
        Self::new(width, height, vec![white; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_white(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

/// Outcome of one message transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionReport {
    /// Fraction of bits received as sent.
    pub fidelity: f64,
    /// Empirical mismatch rate, `1 - fidelity` exactly.
    pub avg_bit_error: f64,
    /// Incorrectly received logic 0s over the total bit count: the
    /// directly measurable violation.
    pub violation_prob_bit0: f64,
    /// `violation_prob_bit0` plus the backscatter bound of the sent
    /// logic 1s.
    pub violation_prob_total: f64,
    /// Per-bit record of (sent, received), in message order.
    pub bits: Vec<(bool, bool)>,
}

/// Equal-prior average bit error over `m` photon slots. `exact = false`
/// uses the first-order `m p0` form, valid for small `m p0`.
pub fn avg_bit_error<T: Scalar>(m: usize, p1_err: T, p0_err: T, exact: bool) -> T {
    debug_assert!(m >= 1);
    let one = T::one();
    let two = one + one;
    let miss_all = p1_err.powi(m as i32);
    let false_click = if exact {
        one - (one - p0_err).powi(m as i32)
    } else {
        count::<T>(m) * p0_err
    };
    (miss_all + false_click) / two
}

/// Violation probability of a random bit, `m p0 / (2 eta)`.
pub fn violation_probability<T: Scalar>(m: usize, p0_err: T, eta: T) -> Result<T, MessageError> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(MessageError::InvalidEta(
            num_traits::ToPrimitive::to_f64(&eta).unwrap_or(f64::NAN),
        ));
    }
    let two = T::one() + T::one();
    Ok(count::<T>(m) * p0_err / (two * eta))
}

/// Photon count in `[1, m_max]` minimising the exact average bit error,
/// ties broken toward smaller `m` (lower violation). Returns the argmin
/// and its error.
pub fn optimal_m<T: Scalar>(p1_err: T, p0_err: T, m_max: usize) -> (usize, T) {
    assert!(m_max >= 1);
    let one = T::one();
    let two = one + one;
    let q0 = one - p0_err;
    // Incremental powers; the brute-force per-m evaluation is the oracle.
    let mut miss_all = one;
    let mut keep_all = one;
    let mut best = (1, T::infinity());
    for m in 1..=m_max {
        miss_all = miss_all * p1_err;
        keep_all = keep_all * q0;
        let err = (miss_all + (one - keep_all)) / two;
        if err < best.1 {
            best = (m, err);
        }
    }
    best
}

/// Fraction of equal bits between two same-sized images.
pub fn image_fidelity(sent: &BitmapMessage, received: &BitmapMessage) -> Result<f64, MessageError> {
    if sent.width != received.width || sent.height != received.height {
        return Err(MessageError::DimensionMismatch(
            sent.width,
            sent.height,
            received.width,
            received.height,
        ));
    }
    let matches = sent
        .bits
        .iter()
        .zip(&received.bits)
        .filter(|(a, b)| a == b)
        .count();
    Ok(matches as f64 / sent.len() as f64)
}

/// Transmit a message bit by bit over the noisy channel.
///
/// Bit `i` draws from `rng.substream(i)`, so the report is independent of
/// evaluation order and reproducible from `(seed, stream_id)`.
pub fn transmit_message(
    msg: &BitmapMessage,
    cfg: &EncodingConfig,
    noise: &NoiseParams<f64>,
    rng: &TrialRng,
) -> Result<TransmissionReport, MessageError> {
    if cfg.photons_per_bit < 1 {
        return Err(MessageError::ZeroPhotons);
    }
    let spec = noise
        .protocol_spec(cfg.num_beamsplitters, false)
        .map_err(DetectError::from)?;
    let probs = click_probabilities(&spec, noise)?;

    let total = msg.len() as f64;
    let mut bits = Vec::with_capacity(msg.len());
    let mut wrong_zeros = 0usize;
    let mut sent_ones = 0usize;
    for (i, &sent) in msg.bits.iter().enumerate() {
        let mut bit_rng = rng.substream(i as u64);
        let received = sample_bit_transmission(sent, cfg.photons_per_bit, &probs, &mut bit_rng)?;
        if sent {
            sent_ones += 1;
        } else if received {
            wrong_zeros += 1;
        }
        bits.push((sent, received));
    }

    let received_msg = BitmapMessage {
        width: msg.width,
        height: msg.height,
        bits: bits.iter().map(|(_, r)| *r).collect(),
    };
    let fidelity = image_fidelity(msg, &received_msg)?;
    let violation_prob_bit0 = wrong_zeros as f64 / total;
    // Upper bound on the unobservable logic-1 leakage: per sent 1, the
    // chance any of its m photons backscattered into the line.
    let m = cfg.photons_per_bit as i32;
    let bit1_bound = 1.0 - (1.0 - probs.p_violation_bit1).powi(m);
    let violation_prob_total = violation_prob_bit0 + sent_ones as f64 / total * bit1_bound;

    Ok(TransmissionReport {
        fidelity,
        avg_bit_error: 1.0 - fidelity,
        violation_prob_bit0,
        violation_prob_total,
        bits,
    })
}
