//! Probability bookkeeping for soft-input decoding.
//!
//! Everything is kept in the natural-log domain: per-bit flip/keep
//! log-probabilities derived from channel LLRs, log-probabilities of error
//! patterns over arbitrary position scopes, and a compensated linear-domain
//! accumulator for the total queried probability mass. Pattern probabilities
//! underflow plain doubles well before n = 64 at low SNR, so the log domain
//! is not optional here.

use crate::gf2::BitWord;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// |LLR| is clipped here before flip probabilities are formed, so that
/// q_i stays strictly positive and log ratios stay finite.
pub const LLR_CLIP: f64 = 50.0;

/// ln(1 + e^x) without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic function e^x / (1 + e^x).
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-bit soft information for one received word.
///
/// Sign convention: positive LLR favours bit 0, so the probability of bit 0
/// is `sigmoid(llr)`. The hard decision takes bit 0 on ties (L = 0).
#[derive(Clone, Debug)]
pub struct ChannelObservation {
    llr: Vec<f64>,
    hard: BitWord,
    /// |LLR| after clipping at [`LLR_CLIP`].
    abs_llr: Vec<f64>,
    /// ln q_i with q_i = 1/(1+e^{|L_i|}).
    flip_logp: Vec<f64>,
    /// ln (1 - q_i).
    keep_logp: Vec<f64>,
}

impl ChannelObservation {
    /// Build from raw channel LLRs.
    pub fn from_llrs(llr: Vec<f64>) -> Self {
        let n = llr.len();
        let mut hard = BitWord::zeros(n);
        let mut abs_llr = Vec::with_capacity(n);
        let mut flip_logp = Vec::with_capacity(n);
        let mut keep_logp = Vec::with_capacity(n);
        for (i, &l) in llr.iter().enumerate() {
            if l < 0.0 {
                hard.set(i, true);
            }
            let a = l.abs().min(LLR_CLIP);
            abs_llr.push(a);
            flip_logp.push(-softplus(a));
            keep_logp.push(-softplus(-a));
        }
        Self {
            llr,
            hard,
            abs_llr,
            flip_logp,
            keep_logp,
        }
    }

    pub fn len(&self) -> usize {
        self.llr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llr.is_empty()
    }

    pub fn llr(&self) -> &[f64] {
        &self.llr
    }

    /// Hard-decision word: bit 1 where the LLR is negative.
    pub fn hard(&self) -> &BitWord {
        &self.hard
    }

    pub fn abs_llr(&self) -> &[f64] {
        &self.abs_llr
    }

    pub fn flip_logp(&self) -> &[f64] {
        &self.flip_logp
    }

    pub fn keep_logp(&self) -> &[f64] {
        &self.keep_logp
    }
}

/// Log-probability of the noise-effect pattern that flips exactly the
/// positions in `flipped` within `scope` and keeps the rest.
///
/// Summing `e^result` over all subsets of `scope` gives 1.
pub fn pattern_log_prob(
    obs: &ChannelObservation,
    flipped: &[usize],
    scope: &[usize],
) -> Result<f64> {
    let mut scope_mask = 0u128;
    for &i in scope {
        scope_mask |= 1u128 << i;
    }
    let mut flip_mask = 0u128;
    for &i in flipped {
        if (scope_mask >> i) & 1 == 0 {
            return Err(Error::PositionOutOfScope { pos: i });
        }
        flip_mask |= 1u128 << i;
    }
    let mut logp = 0.0;
    for &i in scope {
        logp += if (flip_mask >> i) & 1 == 1 {
            obs.flip_logp[i]
        } else {
            obs.keep_logp[i]
        };
    }
    Ok(logp)
}

/// Compensated accumulator for probability mass added one log-term at a time.
///
/// Neumaier summation keeps 2^20 equal terms exact to ~1e-15 relative error
/// and makes the result independent of the order terms arrive in.
#[derive(Clone, Debug, Default)]
pub struct MassAccumulator {
    sum: f64,
    comp: f64,
    count: u64,
}

impl MassAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a pattern with log-probability `logp` (must be <= 0).
    pub fn accumulate(&mut self, logp: f64) {
        debug_assert!(logp <= 1e-12, "log-probability {logp} is positive");
        let term = logp.exp();
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
        self.count += 1;
        debug_assert!(self.mass() <= 1.0 + 1e-9, "mass exceeds 1: {}", self.mass());
    }

    /// Total accumulated probability mass.
    pub fn mass(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Noise variance of the unit-energy BPSK/AWGN channel at a given Eb/N0.
pub fn awgn_sigma2(ebno_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))
}

/// Transmit `codeword` over a BPSK/AWGN channel and demodulate to LLRs.
///
/// Bit 0 maps to +1, bit 1 to -1; the LLR of received value r is 2r/sigma^2.
/// Deterministic for a fixed seed.
pub fn bpsk_awgn_llr(
    codeword: &BitWord,
    ebno_db: f64,
    rate: f64,
    rng_seed: u64,
) -> ChannelObservation {
    use rand::SeedableRng;
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    bpsk_awgn_llr_with(codeword, ebno_db, rate, &mut rng)
}

/// As [`bpsk_awgn_llr`] but drawing noise from a caller-supplied generator.
pub fn bpsk_awgn_llr_with<R: Rng>(
    codeword: &BitWord,
    ebno_db: f64,
    rate: f64,
    rng: &mut R,
) -> ChannelObservation {
    assert!(rate > 0.0 && rate <= 1.0, "rate must be in (0,1]");
    let sigma2 = awgn_sigma2(ebno_db, rate);
    let sigma = sigma2.sqrt();
    let llr = (0..codeword.len())
        .map(|i| {
            let x = if codeword.get(i) { -1.0 } else { 1.0 };
            let noise: f64 = StandardNormal.sample(rng);
            2.0 * (x + sigma * noise) / sigma2
        })
        .collect();
    ChannelObservation::from_llrs(llr)
}
