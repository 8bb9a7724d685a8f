//! Monte-Carlo experiment driver: reliability-diagram calibration of the
//! blockwise and bitwise soft output, product-code error-rate curves, and
//! the exhaustive-oracle equivalence suite.
//!
//! Trials are independent and embarrassingly parallel. Each trial derives
//! its own generator from `(seed, trial_id)`, work is split into
//! fixed-size chunks processed in trial order, and chunk results are merged
//! by ascending chunk index, so every statistic is bit-identical at any
//! parallelism level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::codes::ProductCode;
use crate::decode::{
    exhaustive_map_oracle, forney_block_so, gcd_so_decode, grand_so_decode, pyndiah_bitwise_llr,
    DecodeStatus, DecoderConfig, PatternOrder,
};
use crate::gf2::{BitWord, SystematicCode};
use crate::metrics::{bpsk_awgn_llr_with, sigmoid};
use crate::turbo::{turbo_decode, TurboConfig, TurboStatus};
use crate::Result;

/// Trials per work unit; fixed so that results do not depend on the number
/// of worker threads.
const CHUNK: u64 = 512;

/// Fallback scaling for the max-log baseline where its list pins a bit.
pub const DEFAULT_PYNDIAH_BETA: f64 = 0.5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-trial generator: trials can run in any order.
pub fn trial_rng(seed: u64, trial_id: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial_id)))
}

fn random_codeword<R: Rng>(code: &SystematicCode, rng: &mut R) -> BitWord {
    let mask = if code.k() == 128 {
        u128::MAX
    } else {
        (1u128 << code.k()) - 1
    };
    let info = BitWord::from_raw(rng.random::<u128>() & mask, code.k());
    code.encode(&info).expect("info length matches k")
}

/// One block-decoding trial outcome kept for calibration.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub true_in_list: bool,
    pub top1_correct: bool,
    /// The decoder's estimate that the transmitted codeword is unlisted.
    pub predicted_not_in_list: f64,
    pub queries: usize,
}

/// One bin of a reliability diagram.
#[derive(Clone, Debug)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub sum_predicted: f64,
    pub errors: u64,
    pub count: u64,
}

impl CalibrationBin {
    pub fn mean_predicted(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum_predicted / self.count as f64
        }
    }

    pub fn empirical(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.errors as f64 / self.count as f64
        }
    }
}

/// Binned (predicted, empirical) pairs.
#[derive(Clone, Debug)]
pub struct CalibrationTable {
    pub bins: Vec<CalibrationBin>,
    log_scale: bool,
}

/// Log-binning span for blockwise calibration.
const BLOCK_BIN_FLOOR: f64 = 1e-4;
const BLOCK_BINS_PER_DECADE: usize = 3;
const BLOCK_DECADES: usize = 4;
/// Uniform bin count for bitwise calibration.
const BIT_BINS: usize = 20;

impl CalibrationTable {
    /// Blockwise layout: an underflow bin below 1e-4, then three bins per
    /// decade up to 1.
    pub fn new_block() -> Self {
        let total = BLOCK_BINS_PER_DECADE * BLOCK_DECADES;
        let edge = |j: usize| BLOCK_BIN_FLOOR * 10f64.powf(j as f64 / BLOCK_BINS_PER_DECADE as f64);
        let mut bins = vec![CalibrationBin {
            lo: 0.0,
            hi: BLOCK_BIN_FLOOR,
            sum_predicted: 0.0,
            errors: 0,
            count: 0,
        }];
        for j in 0..total {
            bins.push(CalibrationBin {
                lo: edge(j),
                hi: edge(j + 1),
                sum_predicted: 0.0,
                errors: 0,
                count: 0,
            });
        }
        Self {
            bins,
            log_scale: true,
        }
    }

    /// Bitwise layout: 20 uniform bins on [0, 1].
    pub fn new_bit() -> Self {
        let bins = (0..BIT_BINS)
            .map(|j| CalibrationBin {
                lo: j as f64 / BIT_BINS as f64,
                hi: (j + 1) as f64 / BIT_BINS as f64,
                sum_predicted: 0.0,
                errors: 0,
                count: 0,
            })
            .collect();
        Self {
            bins,
            log_scale: false,
        }
    }

    fn bin_index(&self, predicted: f64) -> usize {
        if self.log_scale {
            if predicted < BLOCK_BIN_FLOOR {
                return 0;
            }
            let total = BLOCK_BINS_PER_DECADE * BLOCK_DECADES;
            let j = ((predicted.log10() + BLOCK_DECADES as f64)
                * BLOCK_BINS_PER_DECADE as f64)
                .floor() as isize;
            (1 + j.clamp(0, total as isize - 1)) as usize
        } else {
            ((predicted * BIT_BINS as f64) as usize).min(BIT_BINS - 1)
        }
    }

    pub fn record(&mut self, predicted: f64, error: bool) {
        let idx = self.bin_index(predicted);
        let bin = &mut self.bins[idx];
        bin.sum_predicted += predicted;
        bin.count += 1;
        bin.errors += u64::from(error);
    }

    /// Merge `other` into self; call in ascending chunk order for
    /// reproducible floating-point sums.
    pub fn merge(&mut self, other: &CalibrationTable) {
        assert_eq!(self.bins.len(), other.bins.len());
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.sum_predicted += b.sum_predicted;
            a.errors += b.errors;
            a.count += b.count;
        }
    }

    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// The bin whose range contains `predicted`.
    pub fn bin_containing(&self, predicted: f64) -> &CalibrationBin {
        &self.bins[self.bin_index(predicted)]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,mean_predicted,empirical,count\n");
        for b in &self.bins {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                b.lo,
                b.hi,
                b.mean_predicted(),
                b.empirical(),
                b.count
            ));
        }
        out
    }
}

/// Which blockwise soft output feeds the diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockDecoder {
    GcdSo,
    GrandSo,
    /// GCD list with list-only normalization; predicted error is one minus
    /// the top posterior.
    GcdForney,
}

/// Which bitwise soft output feeds the diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitSo {
    SoGcd,
    Pyndiah,
}

fn block_trial(
    code: &SystematicCode,
    decoder: BlockDecoder,
    lambda: usize,
    ebno_db: f64,
    seed: u64,
    trial_id: u64,
) -> TrialRecord {
    let mut rng = trial_rng(seed, trial_id);
    let rate = code.k() as f64 / code.n() as f64;
    let cw = random_codeword(code, &mut rng);
    let obs = bpsk_awgn_llr_with(&cw, ebno_db, rate, &mut rng);
    let cfg = DecoderConfig::with_lambda(lambda);
    let out = match decoder {
        BlockDecoder::GcdSo | BlockDecoder::GcdForney => {
            gcd_so_decode(code, &obs, cfg).expect("lengths match")
        }
        BlockDecoder::GrandSo => grand_so_decode(code, &obs, cfg).expect("lengths match"),
    };
    let true_in_list = out.list.iter().any(|e| e.codeword == cw);
    let top1_correct = out.top().is_some_and(|e| e.codeword == cw);
    let predicted = match decoder {
        BlockDecoder::GcdSo | BlockDecoder::GrandSo => out.not_in_list,
        BlockDecoder::GcdForney => {
            let posts = forney_block_so(&out.list);
            1.0 - posts.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    };
    TrialRecord {
        trial_id,
        true_in_list,
        top1_correct,
        predicted_not_in_list: predicted,
        queries: out.queries,
    }
}

/// Deterministic chunked parallel fold over trials.
fn fold_trials<T, F>(trials: u64, make_table: fn() -> T, per_chunk: F) -> T
where
    T: Send + Mergeable,
    F: Fn(std::ops::Range<u64>, &mut T) + Sync,
{
    let chunks: Vec<std::ops::Range<u64>> = (0..trials.div_ceil(CHUNK))
        .map(|c| (c * CHUNK)..((c + 1) * CHUNK).min(trials))
        .collect();
    let partials: Vec<T> = chunks
        .into_par_iter()
        .map(|range| {
            let mut table = make_table();
            per_chunk(range, &mut table);
            table
        })
        .collect();
    let mut iter = partials.into_iter();
    let mut acc = iter.next().unwrap_or_else(make_table);
    for t in iter {
        merge_into(&mut acc, t);
    }
    acc
}

/// Merge helper trait so `fold_trials` can combine any partial aggregate.
trait Mergeable {
    fn merge_from(&mut self, other: Self);
}

fn merge_into<T: Mergeable>(acc: &mut T, other: T) {
    acc.merge_from(other);
}

impl Mergeable for CalibrationTable {
    fn merge_from(&mut self, other: Self) {
        self.merge(&other);
    }
}

/// Blockwise reliability diagram.
///
/// For the soft-output decoders the predicted value is the not-in-list
/// probability and the error event is "the transmitted codeword is missing
/// from the list". The list-only baseline cannot express a not-in-list
/// probability at all, so its predicted value is one minus the top
/// posterior and the matching event is "the top-ranked decoding is wrong".
pub fn run_block_calibration(
    code: &SystematicCode,
    decoder: BlockDecoder,
    lambda: usize,
    ebno_db: f64,
    trials: u64,
    seed: u64,
) -> CalibrationTable {
    fold_trials(trials, CalibrationTable::new_block, |range, table| {
        for t in range {
            let rec = block_trial(code, decoder, lambda, ebno_db, seed, t);
            let error = match decoder {
                BlockDecoder::GcdSo | BlockDecoder::GrandSo => !rec.true_in_list,
                BlockDecoder::GcdForney => !rec.top1_correct,
            };
            table.record(rec.predicted_not_in_list, error);
        }
    })
}

/// Bitwise reliability diagram: per decoded bit, the predicted probability
/// that the hard-demodulated bit differs from the transmitted one versus
/// the empirical flip rate.
pub fn run_bit_calibration(
    code: &SystematicCode,
    so_kind: BitSo,
    lambda: usize,
    ebno_db: f64,
    trials: u64,
    seed: u64,
    pyndiah_beta: f64,
) -> CalibrationTable {
    let rate = code.k() as f64 / code.n() as f64;
    fold_trials(trials, CalibrationTable::new_bit, |range, table| {
        for t in range {
            let mut rng = trial_rng(seed, t);
            let cw = random_codeword(code, &mut rng);
            let obs = bpsk_awgn_llr_with(&cw, ebno_db, rate, &mut rng);
            let cfg = DecoderConfig::with_lambda(lambda);
            let out = gcd_so_decode(code, &obs, cfg).expect("lengths match");
            let llrs = match so_kind {
                BitSo::SoGcd => out.app_llr.clone(),
                BitSo::Pyndiah => pyndiah_bitwise_llr(&out.list, &obs, pyndiah_beta),
            };
            for (i, &llr) in llrs.iter().enumerate() {
                let y = obs.hard().get(i);
                // LLR re-signed relative to the hard demodulated bit: the
                // flip posterior then spans the whole [0,1] range.
                let s = if y { -llr } else { llr };
                let predicted = sigmoid(-s);
                table.record(predicted, cw.get(i) != y);
            }
        }
    })
}

/// One SNR point of a product-code error-rate curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub ebno_db: f64,
    pub bler: f64,
    pub ber: f64,
    pub avg_queries: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler_se: f64,
    pub low_confidence: bool,
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out =
        String::from("ebno_db,bler,ber,avg_queries,blocks,block_errors,bler_se,low_confidence\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.ebno_db,
            p.bler,
            p.ber,
            p.avg_queries,
            p.blocks,
            p.block_errors,
            p.bler_se,
            p.low_confidence
        ));
    }
    out
}

#[derive(Clone, Default)]
struct PointStats {
    blocks: u64,
    block_errors: u64,
    info_bit_errors: u64,
    queries: u64,
}

impl Mergeable for PointStats {
    fn merge_from(&mut self, other: Self) {
        self.blocks += other.blocks;
        self.block_errors += other.block_errors;
        self.info_bit_errors += other.info_bit_errors;
        self.queries += other.queries;
    }
}

fn product_block_trial(
    pc: &ProductCode,
    cfg: &TurboConfig,
    ebno_db: f64,
    point_seed: u64,
    trial_id: u64,
) -> (bool, u64, u64) {
    let mut rng = trial_rng(point_seed, trial_id);
    let k = pc.k();
    let mask = (1u128 << k) - 1;
    let info: Vec<BitWord> = (0..k)
        .map(|_| BitWord::from_raw(rng.random::<u128>() & mask, k))
        .collect();
    let tx = pc.encode(&info).expect("square info block");
    let mut l_ch = Vec::with_capacity(pc.block_len());
    for row in &tx {
        let obs = bpsk_awgn_llr_with(row, ebno_db, pc.rate(), &mut rng);
        l_ch.extend_from_slice(obs.llr());
    }
    let out = turbo_decode(pc, &l_ch, cfg).expect("dimensions match");
    let block_error = out.status == TurboStatus::Failure || out.decision != tx;
    let decoded_info = pc.extract_info(&out.decision).expect("full decision");
    let bit_errors: u64 = decoded_info
        .iter()
        .zip(&info)
        .map(|(a, b)| u64::from(a.xor(b).weight()))
        .sum();
    (block_error, bit_errors, out.total_queries)
}

/// Simulate one SNR point until enough block errors are seen or the trial
/// budget runs out. Batching keeps the stopping rule deterministic under
/// parallel execution.
fn run_product_point(
    pc: &ProductCode,
    cfg: &TurboConfig,
    ebno_db: f64,
    min_block_errors: u64,
    max_trials: u64,
    point_seed: u64,
) -> CurvePoint {
    let batch = CHUNK / 8;
    let mut stats = PointStats::default();
    let mut next_trial = 0u64;
    while stats.block_errors < min_block_errors && next_trial < max_trials {
        let upto = (next_trial + batch).min(max_trials);
        let fresh = fold_trials(upto - next_trial, PointStats::default, |range, s| {
            for i in range {
                let (err, bits, q) =
                    product_block_trial(pc, cfg, ebno_db, point_seed, next_trial + i);
                s.blocks += 1;
                s.block_errors += u64::from(err);
                s.info_bit_errors += bits;
                s.queries += q;
            }
        });
        stats.merge_from(fresh);
        next_trial = upto;
    }
    let blocks = stats.blocks.max(1);
    let bler = stats.block_errors as f64 / blocks as f64;
    CurvePoint {
        ebno_db,
        bler,
        ber: stats.info_bit_errors as f64 / (pc.dimension() as f64 * blocks as f64),
        avg_queries: stats.queries as f64 / blocks as f64,
        blocks: stats.blocks,
        block_errors: stats.block_errors,
        bler_se: (bler * (1.0 - bler) / blocks as f64).sqrt(),
        low_confidence: stats.block_errors < 10,
    }
}

/// BLER/BER/guess-count curve over a list of SNR points.
pub fn run_product_curve(
    pc: &ProductCode,
    cfg: &TurboConfig,
    ebno_db_list: &[f64],
    min_block_errors: u64,
    max_trials: u64,
    seed: u64,
) -> Vec<CurvePoint> {
    ebno_db_list
        .iter()
        .enumerate()
        .map(|(idx, &ebno_db)| {
            let point_seed = splitmix64(seed ^ (idx as u64 + 1).wrapping_mul(0xA076_1D64_78BD_642F));
            run_product_point(pc, cfg, ebno_db, min_block_errors, max_trials, point_seed)
        })
        .collect()
}

/// Outcome of the exhaustive-oracle equivalence suite.
#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub trials: u64,
    pub posterior_failures: u64,
    pub llr_failures: u64,
    pub ml_argmax_failures: u64,
    pub max_posterior_dev: f64,
    pub max_llr_dev: f64,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.posterior_failures == 0 && self.llr_failures == 0 && self.ml_argmax_failures == 0
    }
}

impl Mergeable for OracleReport {
    fn merge_from(&mut self, other: Self) {
        self.trials += other.trials;
        self.posterior_failures += other.posterior_failures;
        self.llr_failures += other.llr_failures;
        self.ml_argmax_failures += other.ml_argmax_failures;
        self.max_posterior_dev = self.max_posterior_dev.max(other.max_posterior_dev);
        self.max_llr_dev = self.max_llr_dev.max(other.max_llr_dev);
    }
}

/// Tolerance for oracle equivalence checks.
pub const ORACLE_TOL: f64 = 1e-6;

/// Check the guessing decoders against exact enumeration: full-enumeration
/// GCD must reproduce the exact posteriors and bitwise LLRs, and
/// ML-order GCD must land on the exact argmax whenever it converges.
/// Observations are drawn at Eb/N0 uniform in [0, 6] dB.
pub fn oracle_check(code: &SystematicCode, trials: u64, seed: u64) -> Result<OracleReport> {
    if code.k() > crate::decode::ORACLE_MAX_K {
        return Err(crate::Error::ScaleExceeded {
            m: code.k(),
            max: crate::decode::ORACLE_MAX_K,
        });
    }
    let rate = code.k() as f64 / code.n() as f64;
    let full = 1usize << code.k();
    Ok(fold_trials(trials, OracleReport::default, |range, rep| {
        for t in range {
            let mut rng = trial_rng(seed, t);
            let ebno_db = rng.random_range(0.0..6.0);
            let cw = random_codeword(code, &mut rng);
            let obs = bpsk_awgn_llr_with(&cw, ebno_db, rate, &mut rng);
            let oracle = exhaustive_map_oracle(code, &obs).expect("scale checked");

            let cfg = DecoderConfig::with_lambda(full).max_queries(full);
            let out = gcd_so_decode(code, &obs, cfg).expect("lengths match");
            for entry in &out.list {
                let exact = oracle
                    .posterior_of(code, &entry.codeword)
                    .expect("codeword in codebook");
                let dev = (entry.post - exact).abs();
                rep.max_posterior_dev = rep.max_posterior_dev.max(dev);
                rep.posterior_failures += u64::from(dev > ORACLE_TOL);
            }
            for (a, b) in out.app_llr.iter().zip(&oracle.bit_llrs) {
                let dev = (a - b).abs();
                rep.max_llr_dev = rep.max_llr_dev.max(dev);
                rep.llr_failures += u64::from(dev > ORACLE_TOL);
            }

            let ml = DecoderConfig::with_lambda(1).order(PatternOrder::Ml);
            let out = gcd_so_decode(code, &obs, ml).expect("lengths match");
            if out.status == DecodeStatus::Converged {
                let best = code.encode(&oracle.argmax_info()).expect("k bits");
                rep.ml_argmax_failures += u64::from(out.list[0].codeword != best);
            }
            rep.trials += 1;
        }
    }))
}
