//! Candidate error-pattern generation in (approximately or exactly)
//! decreasing likelihood order.
//!
//! Two generators are provided. The landslide generator walks subsets of the
//! designated positions in nondecreasing logistic weight (the sum of the
//! flipped positions' reliability ranks) and needs no dynamic memory beyond
//! the current partition: for each target weight it enumerates the integer
//! partitions into distinct parts. The maximum-likelihood generator expands a
//! best-first frontier over exact pattern probabilities and is intended for
//! oracle-scale use only.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::metrics::ChannelObservation;
use crate::{Error, Result};

/// Positions of a designated bit set sorted by ascending reliability.
#[derive(Clone, Debug)]
pub struct ReliabilityOrder {
    /// Designated positions, least reliable first; ties broken by index.
    positions: Vec<usize>,
    /// Reliability ranks, exactly 1..=m in order.
    ranks: Vec<u32>,
    abs_llr: Vec<f64>,
    flip_logp: Vec<f64>,
    keep_logp: Vec<f64>,
    /// Log-probability of the empty pattern over the designated scope.
    base_logp: f64,
}

impl ReliabilityOrder {
    pub fn new(obs: &ChannelObservation, designated: &[usize]) -> Self {
        let mut positions: Vec<usize> = designated.to_vec();
        positions.sort_by(|&a, &b| {
            obs.abs_llr()[a]
                .partial_cmp(&obs.abs_llr()[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let abs_llr: Vec<f64> = positions.iter().map(|&p| obs.abs_llr()[p]).collect();
        let flip_logp: Vec<f64> = positions.iter().map(|&p| obs.flip_logp()[p]).collect();
        let keep_logp: Vec<f64> = positions.iter().map(|&p| obs.keep_logp()[p]).collect();
        let base_logp = keep_logp.iter().sum();
        let ranks = (1..=positions.len() as u32).collect();
        Self {
            positions,
            ranks,
            abs_llr,
            flip_logp,
            keep_logp,
            base_logp,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Clipped |LLR| per sorted position; nondecreasing by construction.
    pub fn abs_llr(&self) -> &[f64] {
        &self.abs_llr
    }

    pub fn base_logp(&self) -> f64 {
        self.base_logp
    }
}

/// A candidate noise-effect pattern over the designated positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorPattern {
    /// Flipped positions in the caller's coordinates, ascending.
    pub flipped: Vec<usize>,
    /// Sum of the reliability ranks of the flipped positions.
    pub logistic_weight: u64,
    /// Natural-log probability of the pattern over the designated scope.
    pub log_prob: f64,
}

/// Weight-parity constraint for even codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(weight: u32) -> Self {
        if weight.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn matches(self, count: usize) -> bool {
        count.is_multiple_of(2) == (self == Parity::Even)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OrbOptions {
    /// Skip subsets whose Hamming weight has the wrong parity.
    pub parity: Option<Parity>,
    /// Stop after this many emissions.
    pub max_queries: usize,
}

impl Default for OrbOptions {
    fn default() -> Self {
        Self {
            parity: None,
            max_queries: usize::MAX,
        }
    }
}

/// Why an iterator stopped yielding patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterStatus {
    Active,
    Exhausted,
    BudgetExceeded,
}

/// Landslide enumeration state over partitions of the current logistic
/// weight into distinct parts.
pub struct OrbPatternIter<'a> {
    order: &'a ReliabilityOrder,
    opts: OrbOptions,
    weight: u64,
    part_count: usize,
    parts: Option<Vec<u32>>,
    started: bool,
    emitted: usize,
    status: IterStatus,
}

/// Enumerate subsets of the ordered positions in nondecreasing logistic
/// weight; within a weight, by increasing Hamming weight, then
/// lexicographically by sorted rank tuple. The empty pattern comes first.
pub fn orb_pattern_iter(order: &ReliabilityOrder, opts: OrbOptions) -> OrbPatternIter<'_> {
    assert!(!order.is_empty(), "reliability order must be nonempty");
    OrbPatternIter {
        order,
        opts,
        weight: 0,
        part_count: 0,
        parts: None,
        started: false,
        emitted: 0,
        status: IterStatus::Active,
    }
}

/// Lexicographically first ascending tuple of `count` distinct parts in
/// `[lo, m]` summing to `sum`, or None.
fn first_partition(mut lo: u32, mut count: usize, mut sum: u64, m: u32) -> Option<Vec<u32>> {
    let mut parts = Vec::with_capacity(count);
    while count > 0 {
        let d = count as u64;
        // Smallest head leaving the tail inside its [min,max] sum range;
        // the tail's maximum is the sum of the d-1 largest values <= m.
        let t = d - 1;
        let tail_max = if t == 0 { 0 } else { t * m as u64 - t * (t - 1) / 2 };
        let mut a = lo as u64;
        if sum > tail_max {
            a = a.max(sum - tail_max);
        }
        // Tail min with head a: (d-1)*a + d(d-1)/2.
        if a * d + d * (d - 1) / 2 > sum || a + d - 1 > m as u64 {
            return None;
        }
        parts.push(a as u32);
        lo = a as u32 + 1;
        sum -= a;
        count -= 1;
    }
    if sum == 0 {
        Some(parts)
    } else {
        None
    }
}

/// Successor of `parts` in the same (sum, count) enumeration, or None.
fn next_partition(parts: &[u32], m: u32) -> Option<Vec<u32>> {
    let d = parts.len();
    let total: u64 = parts.iter().map(|&p| p as u64).sum();
    let mut prefix_sum = total;
    for i in (0..d).rev() {
        prefix_sum -= parts[i] as u64;
        // Bump position i and refill the tail minimally.
        let lo = parts[i] + 1;
        let rem = total - prefix_sum;
        let tail_count = d - i;
        // The bumped head takes values from lo upward; delegate the search
        // to first_partition over the whole suffix.
        if let Some(tail) = first_partition(lo, tail_count, rem, m) {
            if tail[0] > parts[i] {
                let mut out = parts[..i].to_vec();
                out.extend(tail);
                return Some(out);
            }
        }
    }
    None
}

impl OrbPatternIter<'_> {
    pub fn status(&self) -> IterStatus {
        self.status
    }

    fn emit(&mut self, parts: &[u32]) -> ErrorPattern {
        self.emitted += 1;
        let order = self.order;
        let mut flipped: Vec<usize> = parts.iter().map(|&r| order.positions[r as usize - 1]).collect();
        flipped.sort_unstable();
        let log_prob = parts.iter().fold(order.base_logp, |acc, &r| {
            let i = r as usize - 1;
            acc + order.flip_logp[i] - order.keep_logp[i]
        });
        ErrorPattern {
            flipped,
            logistic_weight: self.weight,
            log_prob,
        }
    }
}

impl Iterator for OrbPatternIter<'_> {
    type Item = ErrorPattern;

    fn next(&mut self) -> Option<ErrorPattern> {
        if self.status != IterStatus::Active {
            return None;
        }
        if self.emitted >= self.opts.max_queries {
            self.status = IterStatus::BudgetExceeded;
            return None;
        }
        let m = self.order.len() as u32;
        let max_weight = (m as u64) * (m as u64 + 1) / 2;

        if !self.started {
            self.started = true;
            // Weight 0: the empty pattern, unless parity excludes it.
            if self.opts.parity.is_none_or(|p| p.matches(0)) {
                return Some(self.emit(&[]));
            }
        }

        // Advance within the current (weight, part_count) block.
        if let Some(cur) = self.parts.take() {
            if let Some(next) = next_partition(&cur, m) {
                self.parts = Some(next.clone());
                return Some(self.emit(&next));
            }
        }
        // Move to the next part count, then the next weight.
        loop {
            self.part_count += 1;
            let d = self.part_count as u64;
            if d > m as u64 || d * (d + 1) / 2 > self.weight {
                // Exhausted part counts for this weight.
                self.weight += 1;
                self.part_count = 0;
                if self.weight > max_weight {
                    self.status = IterStatus::Exhausted;
                    return None;
                }
                continue;
            }
            if let Some(p) = self.opts.parity {
                if !p.matches(self.part_count) {
                    continue;
                }
            }
            if let Some(first) = first_partition(1, self.part_count, self.weight, m) {
                self.parts = Some(first.clone());
                return Some(self.emit(&first));
            }
        }
    }
}

/// Frontier node for the maximum-likelihood generator.
struct MlNode {
    log_prob: f64,
    /// Ascending indices into the caller's |LLR| list.
    flipped: Vec<usize>,
}

impl PartialEq for MlNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for MlNode {}

impl PartialOrd for MlNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MlNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on log_prob; on ties the lexicographically smaller
        // flipped set wins.
        self.log_prob
            .partial_cmp(&other.log_prob)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.flipped.cmp(&self.flipped))
    }
}

/// Exact maximum-likelihood pattern stream over up to [`ML_MAX_POSITIONS`]
/// positions, via best-first expansion of a pattern-successor tree.
///
/// The frontier works in reliability-sorted coordinates (the successor step
/// is only cost-monotone when |LLR| is ascending) and maps back to the
/// caller's indices on emission.
pub struct MlPatternIter {
    /// |LLR| ascending.
    sorted_abs: Vec<f64>,
    /// sorted coordinate -> caller coordinate.
    input_index: Vec<usize>,
    heap: BinaryHeap<MlNode>,
    status: IterStatus,
}

/// Scale cap for the ML generator; it exists as a test oracle.
pub const ML_MAX_POSITIONS: usize = 24;

/// Emit all 2^m patterns over the given |LLR| magnitudes in exactly
/// nonincreasing probability order; ties break lexicographically on the
/// flipped index set.
pub fn ml_pattern_iter(abs_llrs: &[f64]) -> Result<MlPatternIter> {
    let m = abs_llrs.len();
    if m > ML_MAX_POSITIONS {
        return Err(Error::ScaleExceeded {
            m,
            max: ML_MAX_POSITIONS,
        });
    }
    let abs_llr: Vec<f64> = abs_llrs
        .iter()
        .map(|l| l.abs().min(crate::metrics::LLR_CLIP))
        .collect();
    let mut input_index: Vec<usize> = (0..m).collect();
    input_index.sort_by(|&a, &b| abs_llr[a].partial_cmp(&abs_llr[b]).unwrap().then(a.cmp(&b)));
    let sorted_abs: Vec<f64> = input_index.iter().map(|&i| abs_llr[i]).collect();
    let base_logp: f64 = abs_llr.iter().map(|&a| -crate::metrics::softplus(-a)).sum();
    let mut heap = BinaryHeap::new();
    heap.push(MlNode {
        log_prob: base_logp,
        flipped: Vec::new(),
    });
    Ok(MlPatternIter {
        sorted_abs,
        input_index,
        heap,
        status: IterStatus::Active,
    })
}

impl MlPatternIter {
    pub fn status(&self) -> IterStatus {
        self.status
    }
}

impl Iterator for MlPatternIter {
    type Item = ErrorPattern;

    fn next(&mut self) -> Option<ErrorPattern> {
        if self.status != IterStatus::Active {
            return None;
        }
        let Some(node) = self.heap.pop() else {
            self.status = IterStatus::Exhausted;
            return None;
        };
        let m = self.sorted_abs.len();
        // Successors: extend past the current maximum sorted index, and
        // slide that index up by one. Both cost no more than the parent and
        // each subset is reached exactly once.
        match node.flipped.last().copied() {
            None => {
                if m > 0 {
                    self.heap.push(MlNode {
                        log_prob: node.log_prob - self.sorted_abs[0],
                        flipped: vec![0],
                    });
                }
            }
            Some(j) if j + 1 < m => {
                let mut extend = node.flipped.clone();
                extend.push(j + 1);
                self.heap.push(MlNode {
                    log_prob: node.log_prob - self.sorted_abs[j + 1],
                    flipped: extend,
                });
                let mut slide = node.flipped.clone();
                *slide.last_mut().unwrap() = j + 1;
                self.heap.push(MlNode {
                    log_prob: node.log_prob + self.sorted_abs[j] - self.sorted_abs[j + 1],
                    flipped: slide,
                });
            }
            _ => {}
        }
        // The sorted coordinate is the reliability rank minus one.
        let logistic_weight = node.flipped.iter().map(|&i| i as u64 + 1).sum();
        let mut flipped: Vec<usize> = node.flipped.iter().map(|&i| self.input_index[i]).collect();
        flipped.sort_unstable();
        Some(ErrorPattern {
            flipped,
            logistic_weight,
            log_prob: node.log_prob,
        })
    }
}
