//! Iterative block turbo decoding of square product codes.
//!
//! Each half-iteration decodes every row (or column) of `L_ch + L_a` with
//! the soft-output component decoder, writes the APP LLRs, forms extrinsic
//! values `L_e = L_app - (L_ch + L_a)`, and hard-decides on the APP matrix.
//! Decoding returns as soon as every row and column of the decision has a
//! zero syndrome; otherwise the a priori matrix becomes `alpha * L_e` and
//! the other direction takes over. All lines within a half-iteration are
//! decoded from the same input snapshot, so the half is order-independent.
//!
//! LLR matrices are row-major `n*n` slices: entry (r, c) lives at `r*n + c`.

use crate::codes::ProductCode;
use crate::decode::{gcd_so_decode, DecoderConfig, PatternOrder};
use crate::gf2::BitWord;
use crate::metrics::ChannelObservation;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct TurboConfig {
    /// Extrinsic scaling applied between half-iterations.
    pub alpha: f64,
    /// Maximum number of full (row + column) iterations.
    pub max_iters: usize,
    /// Component SISO decoder configuration.
    pub component: DecoderConfig,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            max_iters: 16,
            component: DecoderConfig::with_lambda(4).order(PatternOrder::Orb),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TurboStatus {
    Success,
    Failure,
}

#[derive(Clone, Debug)]
pub struct TurboResult {
    /// Hard decision, one row per component block.
    pub decision: Vec<BitWord>,
    pub status: TurboStatus,
    /// Full iterations entered when decoding stopped (1-based).
    pub iterations_used: usize,
    /// Component-decoder queries summed over every row, column, iteration.
    pub total_queries: u64,
}

/// Hard decision on an APP matrix: bit 0 where the LLR is nonnegative.
pub fn hard_decision(l_app: &[f64], n: usize) -> Vec<BitWord> {
    assert_eq!(l_app.len(), n * n);
    (0..n)
        .map(|r| {
            let mut row = BitWord::zeros(n);
            for c in 0..n {
                if l_app[r * n + c] < 0.0 {
                    row.set(c, true);
                }
            }
            row
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Half {
    Rows,
    Columns,
}

/// Decode every line of `input` (a snapshot of L_ch + L_a) along one axis,
/// writing APP and extrinsic matrices. Returns the summed query count.
fn half_iteration(
    pc: &ProductCode,
    input: &[f64],
    half: Half,
    cfg: DecoderConfig,
    l_app: &mut [f64],
    l_e: &mut [f64],
) -> Result<u64> {
    let n = pc.n();
    let idx = |line: usize, pos: usize| match half {
        Half::Rows => line * n + pos,
        Half::Columns => pos * n + line,
    };
    let mut queries = 0u64;
    let mut line_llr = vec![0.0; n];
    for line in 0..n {
        for pos in 0..n {
            line_llr[pos] = input[idx(line, pos)];
        }
        let obs = ChannelObservation::from_llrs(line_llr.clone());
        let out = gcd_so_decode(pc.component(), &obs, cfg)?;
        queries += out.queries as u64;
        for pos in 0..n {
            let i = idx(line, pos);
            l_app[i] = out.app_llr[pos];
            l_e[i] = out.app_llr[pos] - input[i];
        }
    }
    Ok(queries)
}

/// Block turbo decode of a product code from channel LLRs.
pub fn turbo_decode(pc: &ProductCode, l_ch: &[f64], cfg: &TurboConfig) -> Result<TurboResult> {
    let n = pc.n();
    if l_ch.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "expected {}x{} LLRs, got {}",
            n,
            n,
            l_ch.len()
        )));
    }
    assert!(cfg.alpha >= 0.0, "alpha must be nonnegative");
    assert!(cfg.max_iters >= 1);

    let cells = n * n;
    let mut l_a = vec![0.0; cells];
    let mut l_app = vec![0.0; cells];
    let mut l_e = vec![0.0; cells];
    let mut input = vec![0.0; cells];
    let mut total_queries = 0u64;
    let mut decision = Vec::new();

    for iter in 1..=cfg.max_iters {
        for half in [Half::Rows, Half::Columns] {
            for i in 0..cells {
                input[i] = l_ch[i] + l_a[i];
            }
            total_queries += half_iteration(pc, &input, half, cfg.component, &mut l_app, &mut l_e)?;
            decision = hard_decision(&l_app, n);
            if pc.is_valid(&decision) {
                return Ok(TurboResult {
                    decision,
                    status: TurboStatus::Success,
                    iterations_used: iter,
                    total_queries,
                });
            }
            for i in 0..cells {
                l_a[i] = cfg.alpha * l_e[i];
            }
        }
    }
    Ok(TurboResult {
        decision,
        status: TurboStatus::Failure,
        iterations_used: cfg.max_iters,
        total_queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_ebch, make_product};
    use crate::metrics::awgn_sigma2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_info<R: Rng>(k: usize, rng: &mut R) -> Vec<BitWord> {
        (0..k)
            .map(|_| BitWord::from_raw(rng.random::<u128>() & ((1 << k) - 1), k))
            .collect()
    }

    /// Channel LLRs for a transmitted array with fixed magnitude per bit.
    fn clean_llrs(rows: &[BitWord], magnitude: f64) -> Vec<f64> {
        let n = rows.len();
        let mut out = Vec::with_capacity(n * n);
        for row in rows {
            for c in 0..n {
                out.push(if row.get(c) { -magnitude } else { magnitude });
            }
        }
        out
    }

    #[test]
    fn noiseless_block_succeeds_in_first_row_half() {
        let pc = make_product(make_ebch(16, 11).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let tx = pc.encode(&random_info(11, &mut rng)).unwrap();
        let l_ch = clean_llrs(&tx, 40.0);
        let out = turbo_decode(&pc, &l_ch, &TurboConfig::default()).unwrap();
        assert_eq!(out.status, TurboStatus::Success);
        assert_eq!(out.iterations_used, 1);
        assert_eq!(out.decision, tx);
        // Each of the 16 rows costs at least one query.
        assert!(out.total_queries >= 16);
    }

    #[test]
    fn single_corrupted_bit_is_fixed() {
        let pc = make_product(make_ebch(16, 11).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let tx = pc.encode(&random_info(11, &mut rng)).unwrap();
        let mut l_ch = clean_llrs(&tx, 8.0);
        // One bit pointing the wrong way.
        let (i, j) = (5, 12);
        l_ch[i * 16 + j] = -l_ch[i * 16 + j] * 0.5;
        let out = turbo_decode(&pc, &l_ch, &TurboConfig::default()).unwrap();
        assert_eq!(out.status, TurboStatus::Success);
        assert_eq!(out.decision, tx);
        // Success means the decision re-encodes to itself.
        let info = pc.extract_info(&out.decision).unwrap();
        assert_eq!(pc.encode(&info).unwrap(), out.decision);
    }

    #[test]
    fn extrinsic_identity_holds_per_half() {
        let pc = make_product(make_ebch(8, 4).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let input: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut l_app = vec![0.0; 64];
        let mut l_e = vec![0.0; 64];
        for half in [Half::Rows, Half::Columns] {
            half_iteration(
                &pc,
                &input,
                half,
                DecoderConfig::with_lambda(4),
                &mut l_app,
                &mut l_e,
            )
            .unwrap();
            for i in 0..64 {
                assert!((l_e[i] - (l_app[i] - input[i])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_alpha_repeats_independent_decoding() {
        let pc = make_product(make_ebch(8, 4).unwrap());
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let tx = pc.encode(&random_info(4, &mut rng)).unwrap();
        // Noisy enough that plain row/column decoding fails.
        let sigma = awgn_sigma2(-2.0, pc.rate()).sqrt();
        let l_ch: Vec<f64> = clean_llrs(&tx, 1.0)
            .into_iter()
            .map(|x| x + sigma * rng.random_range(-2.0..2.0))
            .collect();
        let cfg_base = TurboConfig {
            alpha: 0.0,
            max_iters: 1,
            ..TurboConfig::default()
        };
        let one = turbo_decode(&pc, &l_ch, &cfg_base).unwrap();
        let three = turbo_decode(
            &pc,
            &l_ch,
            &TurboConfig {
                max_iters: 3,
                ..cfg_base
            },
        )
        .unwrap();
        assert_eq!(one.status, three.status);
        assert_eq!(one.decision, three.decision);
        if one.status == TurboStatus::Failure {
            // With a zero a priori every iteration repeats the same work.
            assert_eq!(three.total_queries, 3 * one.total_queries);
        }
    }

    #[test]
    fn hard_decision_sign_convention() {
        let l = vec![1.0, -0.5, 0.0, -2.0];
        let rows = hard_decision(&l, 2);
        assert!(!rows[0].get(0));
        assert!(rows[0].get(1));
        assert!(!rows[1].get(0)); // exact zero decides 0
        assert!(rows[1].get(1));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let pc = make_product(make_ebch(8, 4).unwrap());
        assert!(matches!(
            turbo_decode(&pc, &[0.0; 63], &TurboConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
