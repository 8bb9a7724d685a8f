//! Soft-input soft-output guessing decoders with honest posteriors.
//!
//! This crate implements two closely related universal decoders for short
//! binary linear codes, both driven by ordered noise-effect guessing:
//!
//! - [`decode::grand_so_decode`]: guesses error patterns on all `n` received
//!   bits and tests codebook membership through the parity-check matrix.
//! - [`decode::gcd_so_decode`]: guesses error patterns on the `k` information
//!   bits only and extends each guess to a full codeword through the
//!   generator matrix, with an early-termination test that makes the search
//!   provably complete under an exact maximum-likelihood query order.
//!
//! Both return a ranked codeword list together with blockwise posteriors, an
//! explicit estimate of the probability that the transmitted codeword is not
//! in the list, and per-bit APP LLRs. The bitwise output makes the decoders
//! usable as the component SISO stage of an iterative product-code decoder
//! ([`turbo::turbo_decode`]).
//!
//! The [`harness`] module drives Monte-Carlo experiments: reliability
//! diagrams for the blockwise and bitwise soft output, and BLER/BER/guess
//! curves for square product codes.

pub mod codes;
pub mod decode;
pub mod gf2;
pub mod harness;
pub mod metrics;
pub mod patterns;
pub mod turbo;

pub use codes::{make_ebch, make_product, make_rlc, CodeFamily, CodeSpec, ProductCode};
pub use decode::{
    bitwise_app_llr, exhaustive_map_oracle, forney_block_so, gcd_so_decode, grand_so_decode,
    pyndiah_bitwise_llr, DecodeOutcome, DecodeStatus, DecoderConfig, PatternOrder,
};
pub use gf2::{to_systematic, BitMatrix, BitWord, SystematicCode};
pub use metrics::{bpsk_awgn_llr, pattern_log_prob, ChannelObservation, MassAccumulator};
pub use patterns::{ml_pattern_iter, orb_pattern_iter, ErrorPattern, OrbOptions, ReliabilityOrder};
pub use turbo::{hard_decision, turbo_decode, TurboConfig, TurboResult, TurboStatus};

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("generator matrix is rank deficient (rank {rank} < {k} rows)")]
    RankDeficient { rank: usize, k: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bad code dimensions (n={n}, k={k})")]
    BadDimensions { n: usize, k: usize },
    #[error("unsupported code ({0})")]
    UnsupportedCode(String),
    #[error("position {pos} outside the designated scope")]
    PositionOutOfScope { pos: usize },
    #[error("problem size {m} exceeds the supported scale {max}")]
    ScaleExceeded { m: usize, max: usize },
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
