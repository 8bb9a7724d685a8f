//! GRAND and GCD decoding loops with blockwise and bitwise soft output.
//!
//! Both decoders walk a stream of candidate noise-effect patterns and keep
//! the best codewords they see. Alongside the list they maintain the total
//! probability mass of every pattern queried so far; the posterior of each
//! listed codeword is then its own likelihood divided by the listed mass
//! plus an estimate of the unseen codeword mass,
//! `(1 - queried mass) * (2^k - 1)/(2^n - 1)`. The same bookkeeping yields
//! the probability that the transmitted codeword is not in the list, and
//! from there per-bit APP LLRs in which the channel prior is retained with
//! exactly that not-in-list weight.

use crate::gf2::{BitWord, SystematicCode};
use crate::metrics::{sigmoid, ChannelObservation, MassAccumulator};
use crate::patterns::{
    ml_pattern_iter, orb_pattern_iter, ErrorPattern, MlPatternIter, OrbOptions, OrbPatternIter,
    Parity, ReliabilityOrder,
};
use crate::{Error, Result};

/// APP LLR outputs are clipped here; beyond it the posteriors are pinned to
/// 0/1 at double precision anyway and turbo iterations must stay finite.
pub const APP_LLR_CLIP: f64 = 50.0;

/// Which pattern stream drives the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternOrder {
    /// Landslide order on logistic weight: approximate, memory-free.
    Orb,
    /// Exact maximum-likelihood order: oracle scale only.
    Ml,
}

#[derive(Clone, Copy, Debug)]
pub struct DecoderConfig {
    /// Good-list size: how many codewords must be collected before the
    /// termination test can fire.
    pub lambda: usize,
    /// Hard cap on the number of patterns tested in one decode.
    pub max_queries: usize,
    /// Skip patterns of the wrong weight parity (GRAND on even codes).
    pub parity_skip: bool,
    pub order: PatternOrder,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            lambda: 1,
            max_queries: 1 << 22,
            parity_skip: false,
            order: PatternOrder::Orb,
        }
    }
}

impl DecoderConfig {
    pub fn with_lambda(lambda: usize) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn order(mut self, order: PatternOrder) -> Self {
        self.order = order;
        self
    }

    pub fn max_queries(mut self, max_queries: usize) -> Self {
        self.max_queries = max_queries;
        self
    }

    pub fn parity_skip(mut self, on: bool) -> Self {
        self.parity_skip = on;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Converged,
    BudgetExhausted,
}

/// One ranked codeword with its likelihood and blockwise posterior.
#[derive(Clone, Debug)]
pub struct ListEntry {
    pub codeword: BitWord,
    /// Full-scope log-probability of the noise effect `codeword ⊕ y`.
    pub logp: f64,
    /// Blockwise posterior that this entry is the transmitted codeword.
    pub post: f64,
}

/// Result of one soft-output decode.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    /// Up to lambda codewords, sorted by nonincreasing logp.
    pub list: Vec<ListEntry>,
    /// Estimated probability that the transmitted codeword is not among the
    /// listed entries: identified-but-dropped mass plus the unseen-mass
    /// estimate, normalized.
    pub not_in_list: f64,
    /// Per-bit APP LLRs, clipped to +/-[`APP_LLR_CLIP`].
    pub app_llr: Vec<f64>,
    /// Number of patterns tested.
    pub queries: usize,
    /// Probability mass of all queried patterns (k-scope for GCD, n-scope
    /// for GRAND).
    pub queried_mass: f64,
    /// Combined likelihood of every codeword identified, including any that
    /// fell off the list.
    pub found_mass: f64,
    pub status: DecodeStatus,
}

impl DecodeOutcome {
    pub fn top(&self) -> Option<&ListEntry> {
        self.list.first()
    }
}

/// Pattern source unified over the two orders; emits patterns whose flipped
/// positions are already in original codeword coordinates.
enum PatternStream<'a> {
    Orb(OrbPatternIter<'a>),
    Ml {
        iter: MlPatternIter,
        /// position_map[i] = original coordinate of input index i.
        position_map: &'a [usize],
    },
}

impl PatternStream<'_> {
    fn next(&mut self) -> Option<ErrorPattern> {
        match self {
            PatternStream::Orb(it) => it.next(),
            PatternStream::Ml { iter, position_map } => iter.next().map(|mut p| {
                for i in p.flipped.iter_mut() {
                    *i = position_map[*i];
                }
                p.flipped.sort_unstable();
                p
            }),
        }
    }
}

/// Keep `list` sorted by nonincreasing logp with at most `lambda` entries.
fn offer(list: &mut Vec<(u128, f64)>, lambda: usize, cw: u128, logp: f64) {
    if list.len() == lambda {
        if logp <= list[lambda - 1].1 {
            return;
        }
        list.pop();
    }
    let at = list.partition_point(|e| e.1 >= logp);
    list.insert(at, (cw, logp));
}

/// Search-loop tallies handed to the posterior assembly.
struct SearchTotals {
    /// Mass of every queried pattern (k-scope for GCD, n-scope for GRAND).
    queried_mass: f64,
    /// Mass of every identified codeword, listed or dropped.
    found_mass: f64,
    /// How many codewords were identified in total.
    found_count: usize,
    queries: usize,
}

/// Assemble posteriors, the not-in-list mass, and APP LLRs from the raw
/// decode state.
///
/// The posterior denominator covers every codeword the search identified
/// (not only the kept list) plus the unseen-mass estimate, so codewords
/// that fell off the list surrender their mass to `not_in_list` rather
/// than silently inflating the listed posteriors.
fn finish(
    code: &SystematicCode,
    obs: &ChannelObservation,
    raw_list: Vec<(u128, f64)>,
    totals: SearchTotals,
    status: DecodeStatus,
) -> DecodeOutcome {
    let n = code.n() as i32;
    let k = code.k() as i32;
    let unseen_factor = (2f64.powi(k) - 1.0) / (2f64.powi(n) - 1.0);
    let unseen = (1.0 - totals.queried_mass).max(0.0) * unseen_factor;
    let listed: f64 = raw_list.iter().map(|e| e.1.exp()).sum();
    // When nothing was dropped the two mass totals are equal; preferring
    // the listed sum keeps the posterior total exactly 1 after a full
    // enumeration (x/x = 1), which the oracle-equivalence checks rely on.
    let base = if totals.found_count == raw_list.len() {
        listed
    } else {
        totals.found_mass
    };
    let denom = base + unseen;
    let list: Vec<ListEntry> = raw_list
        .into_iter()
        .map(|(cw, logp)| ListEntry {
            codeword: BitWord::from_raw(cw, code.n()),
            logp,
            post: if denom > 0.0 { logp.exp() / denom } else { 0.0 },
        })
        .collect();
    let post_sum = if denom > 0.0 { listed / denom } else { 0.0 };
    let not_in_list = (1.0 - post_sum).max(0.0);
    let app_llr = bitwise_app_llr(&list, not_in_list, obs);
    DecodeOutcome {
        list,
        not_in_list,
        app_llr,
        queries: totals.queries,
        queried_mass: totals.queried_mass,
        found_mass: totals.found_mass,
        status,
    }
}

/// Guessing codeword decoding with soft output.
///
/// Patterns are generated over the k systematic positions in the configured
/// order; each is extended through the generator matrix to a full codeword.
/// The loop stops when the next pattern's k-scope probability cannot beat
/// the lambda-th best codeword already held (only possible once the list is
/// full), when the pattern space is exhausted, or on budget exhaustion.
/// Under the exact order a converged decode's top entry is the
/// maximum-likelihood codeword.
pub fn gcd_so_decode(
    code: &SystematicCode,
    obs: &ChannelObservation,
    cfg: DecoderConfig,
) -> Result<DecodeOutcome> {
    if obs.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: obs.len(),
        });
    }
    assert!(cfg.lambda >= 1, "list size must be at least 1");
    let n = code.n();
    let sys = code.systematic_positions();
    let y = obs.hard();

    let mut sys_index = vec![usize::MAX; n];
    let mut base_info = 0u128;
    for (j, &pos) in sys.iter().enumerate() {
        sys_index[pos] = j;
        if y.get(pos) {
            base_info |= 1u128 << j;
        }
    }

    let base_n: f64 = obs.keep_logp().iter().sum();
    let cost: Vec<f64> = (0..n)
        .map(|i| obs.keep_logp()[i] - obs.flip_logp()[i])
        .collect();

    let order = ReliabilityOrder::new(obs, sys);
    let sys_abs: Vec<f64> = sys.iter().map(|&p| obs.abs_llr()[p]).collect();
    let mut stream = match cfg.order {
        PatternOrder::Orb => PatternStream::Orb(orb_pattern_iter(&order, OrbOptions::default())),
        PatternOrder::Ml => PatternStream::Ml {
            iter: ml_pattern_iter(&sys_abs)?,
            position_map: sys,
        },
    };

    let mut list: Vec<(u128, f64)> = Vec::with_capacity(cfg.lambda.min(64));
    let mut acc = MassAccumulator::new();
    let mut found = MassAccumulator::new();
    let mut queries = 0usize;
    let mut pending = stream.next();
    let status = loop {
        let Some(pat) = pending.take() else {
            break DecodeStatus::Converged; // pattern space exhausted
        };
        if list.len() == cfg.lambda && pat.log_prob <= list[cfg.lambda - 1].1 {
            break DecodeStatus::Converged; // no unseen pattern can do better
        }
        if queries >= cfg.max_queries {
            break DecodeStatus::BudgetExhausted;
        }
        queries += 1;
        let mut flip = 0u128;
        for &pos in &pat.flipped {
            flip |= 1u128 << sys_index[pos];
        }
        let cw = code.encode_raw(base_info ^ flip);
        let mut nlogp = base_n;
        let mut diff = cw ^ y.raw();
        while diff != 0 {
            let i = diff.trailing_zeros() as usize;
            diff &= diff - 1;
            nlogp -= cost[i];
        }
        acc.accumulate(pat.log_prob);
        found.accumulate(nlogp);
        offer(&mut list, cfg.lambda, cw, nlogp);
        pending = stream.next();
    };
    debug_assert!(!list.is_empty(), "first query always yields a codeword");
    let totals = SearchTotals {
        queried_mass: acc.mass(),
        found_mass: found.mass(),
        found_count: queries, // every query extends to exactly one codeword
        queries,
    };
    Ok(finish(code, obs, list, totals, status))
}

/// GRAND with soft output: patterns over all n positions, membership tested
/// through the parity-check matrix, stopping once lambda codewords are
/// found. With `parity_skip` on an even code, patterns of the wrong weight
/// parity are never generated; the identified codewords are unchanged.
pub fn grand_so_decode(
    code: &SystematicCode,
    obs: &ChannelObservation,
    cfg: DecoderConfig,
) -> Result<DecodeOutcome> {
    if obs.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: obs.len(),
        });
    }
    assert!(cfg.lambda >= 1, "list size must be at least 1");
    let n = code.n();
    let y = obs.hard();
    let all: Vec<usize> = (0..n).collect();
    let order = ReliabilityOrder::new(obs, &all);
    let parity = (cfg.parity_skip && code.is_even_code()).then(|| Parity::of(y.weight()));
    let mut stream = match cfg.order {
        PatternOrder::Orb => PatternStream::Orb(orb_pattern_iter(
            &order,
            OrbOptions {
                parity,
                max_queries: usize::MAX,
            },
        )),
        PatternOrder::Ml => PatternStream::Ml {
            iter: ml_pattern_iter(obs.abs_llr())?,
            position_map: &all,
        },
    };

    let mut list: Vec<(u128, f64)> = Vec::new();
    let mut acc = MassAccumulator::new();
    let mut found = MassAccumulator::new();
    let mut queries = 0usize;
    let mut pending = stream.next();
    let status = loop {
        if list.len() == cfg.lambda {
            break DecodeStatus::Converged;
        }
        let Some(pat) = pending.take() else {
            break DecodeStatus::Converged; // pattern space exhausted
        };
        if queries >= cfg.max_queries {
            break DecodeStatus::BudgetExhausted;
        }
        queries += 1;
        let mut mask = 0u128;
        for &pos in &pat.flipped {
            mask |= 1u128 << pos;
        }
        acc.accumulate(pat.log_prob);
        let candidate = y.raw() ^ mask;
        if code.is_codeword_raw(candidate) {
            found.accumulate(pat.log_prob);
            offer(&mut list, cfg.lambda, candidate, pat.log_prob);
        }
        pending = stream.next();
    };
    let totals = SearchTotals {
        queried_mass: acc.mass(),
        found_mass: found.mass(),
        found_count: list.len(), // the search stops at lambda hits, none dropped
        queries,
    };
    Ok(finish(code, obs, list, totals, status))
}

/// Per-bit APP LLRs from a posterior-weighted codeword list; where the list
/// misses, the channel prior is retained with weight `not_in_list`.
pub fn bitwise_app_llr(
    list: &[ListEntry],
    not_in_list: f64,
    obs: &ChannelObservation,
) -> Vec<f64> {
    let n = obs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let l = obs.llr()[i];
        let mut p_zero = not_in_list * sigmoid(l);
        let mut p_one = not_in_list * sigmoid(-l);
        for entry in list {
            if entry.codeword.get(i) {
                p_one += entry.post;
            } else {
                p_zero += entry.post;
            }
        }
        out.push((p_zero.ln() - p_one.ln()).clamp(-APP_LLR_CLIP, APP_LLR_CLIP));
    }
    out
}

/// List-only posterior normalization: each entry's likelihood over the sum
/// of listed likelihoods, with any unlisted mass treated as zero.
pub fn forney_block_so(list: &[ListEntry]) -> Vec<f64> {
    assert!(!list.is_empty(), "list must be nonempty");
    let max = list.iter().map(|e| e.logp).fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = list.iter().map(|e| (e.logp - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    scaled.into_iter().map(|v| v / total).collect()
}

/// Max-log bitwise LLRs from a codeword list. Where the list pins a bit
/// (every listed codeword agrees), fall back to `sign * beta * |channel
/// LLR|` with the sign taken from the best codeword.
pub fn pyndiah_bitwise_llr(list: &[ListEntry], obs: &ChannelObservation, beta: f64) -> Vec<f64> {
    assert!(!list.is_empty(), "list must be nonempty");
    let best = &list[0];
    let n = obs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut best_zero = f64::NEG_INFINITY;
        let mut best_one = f64::NEG_INFINITY;
        for entry in list {
            if entry.codeword.get(i) {
                best_one = best_one.max(entry.logp);
            } else {
                best_zero = best_zero.max(entry.logp);
            }
        }
        if best_zero.is_finite() && best_one.is_finite() {
            out.push(best_zero - best_one);
        } else {
            let sign = if best.codeword.get(i) { -1.0 } else { 1.0 };
            out.push(sign * beta * obs.llr()[i].abs());
        }
    }
    out
}

/// Exact posteriors and bitwise MAP LLRs by brute-force enumeration of all
/// 2^k codewords.
pub struct ExhaustiveMapSo {
    /// Posterior per info word (index = packed info bits).
    pub posteriors: Vec<f64>,
    /// Exact bitwise LLRs, clipped like the decoder output.
    pub bit_llrs: Vec<f64>,
    code_k: usize,
}

impl ExhaustiveMapSo {
    /// Posterior of a specific codeword.
    pub fn posterior_of(&self, code: &SystematicCode, cw: &BitWord) -> Result<f64> {
        let info = code.extract_info(cw)?;
        Ok(self.posteriors[info.raw() as usize])
    }

    /// Info word with the maximum posterior.
    pub fn argmax_info(&self) -> BitWord {
        let (best, _) = self
            .posteriors
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
        BitWord::from_raw(best as u128, self.code_k)
    }
}

/// Scale cap for the exhaustive oracle.
pub const ORACLE_MAX_K: usize = 16;

/// Evaluate the exact codeword posterior by full codebook enumeration.
/// Intended as the reference the guessing decoders are tested against.
pub fn exhaustive_map_oracle(
    code: &SystematicCode,
    obs: &ChannelObservation,
) -> Result<ExhaustiveMapSo> {
    if code.k() > ORACLE_MAX_K {
        return Err(Error::ScaleExceeded {
            m: code.k(),
            max: ORACLE_MAX_K,
        });
    }
    if obs.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: obs.len(),
        });
    }
    let n = code.n();
    let k = code.k();
    let scope: Vec<usize> = (0..n).collect();
    let y = obs.hard();
    let count = 1usize << k;
    let mut logps = Vec::with_capacity(count);
    let mut codewords = Vec::with_capacity(count);
    for w in 0..count {
        let cw = code.encode_raw(w as u128);
        let flipped: Vec<usize> = BitWord::from_raw(cw ^ y.raw(), n).iter_ones().collect();
        let logp = crate::metrics::pattern_log_prob(obs, &flipped, &scope)?;
        logps.push(logp);
        codewords.push(cw);
    }
    let max = logps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logps.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let posteriors: Vec<f64> = scaled.iter().map(|&v| v / total).collect();

    let mut bit_llrs = Vec::with_capacity(n);
    for i in 0..n {
        let mut p_zero = 0.0;
        let mut p_one = 0.0;
        for (w, &cw) in codewords.iter().enumerate() {
            if (cw >> i) & 1 == 1 {
                p_one += posteriors[w];
            } else {
                p_zero += posteriors[w];
            }
        }
        bit_llrs.push((p_zero.ln() - p_one.ln()).clamp(-APP_LLR_CLIP, APP_LLR_CLIP));
    }
    Ok(ExhaustiveMapSo {
        posteriors,
        bit_llrs,
        code_k: k,
    })
}
