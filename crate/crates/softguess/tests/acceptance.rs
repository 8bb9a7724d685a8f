//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria and tolerances are pinned in code; the Monte-Carlo checks use
//! fixed seeds so reruns are reproducible.

use rand::Rng;
use softguess::codes::{make_ebch, make_product, make_rlc};
use softguess::decode::{
    exhaustive_map_oracle, gcd_so_decode, grand_so_decode, DecodeOutcome, DecodeStatus,
    DecoderConfig, PatternOrder,
};
use softguess::gf2::BitWord;
use softguess::harness::{
    curve_csv, oracle_check, run_block_calibration, run_product_curve, trial_rng, BitSo,
    BlockDecoder, CalibrationTable,
};
use softguess::metrics::bpsk_awgn_llr_with;
use softguess::patterns::{orb_pattern_iter, OrbOptions, Parity, ReliabilityOrder};
use softguess::turbo::TurboConfig;

struct Criterion {
    id: u32,
    name: &'static str,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self { id, name }
    }

    fn finish(&self, pass: bool, detail: String) {
        println!(
            "ACCEPTANCE {:2} ({}): {} — {}",
            self.id,
            self.name,
            if pass { "PASS" } else { "FAIL" },
            detail
        );
        assert!(pass, "criterion {} failed: {detail}", self.id);
    }
}

fn random_codeword<R: Rng>(code: &softguess::gf2::SystematicCode, rng: &mut R) -> BitWord {
    let info = BitWord::from_raw(rng.random::<u128>() & ((1u128 << code.k()) - 1), code.k());
    code.encode(&info).unwrap()
}

#[test]
fn criterion_01_oracle_exactness() {
    let c = Criterion::new(1, "oracle exactness on (8,4), full enumeration");
    let code = make_ebch(8, 4).unwrap();
    let report = oracle_check(&code, 1000, 0xACCE_0001).unwrap();
    let pass = report.posterior_failures == 0
        && report.llr_failures == 0
        && report.trials == 1000
        && report.max_posterior_dev <= 1e-6
        && report.max_llr_dev <= 1e-6;
    c.finish(
        pass,
        format!(
            "trials={} max_posterior_dev={:.2e} max_llr_dev={:.2e}",
            report.trials, report.max_posterior_dev, report.max_llr_dev
        ),
    );
}

#[test]
fn criterion_02_ml_soundness() {
    let c = Criterion::new(2, "ML-order GCD finds the exact argmax");
    let code = make_ebch(16, 11).unwrap();
    let cfg = DecoderConfig::with_lambda(1).order(PatternOrder::Ml);
    let trials = 10_000u64;
    let mut converged = 0u64;
    let mut matches = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(0xACCE_0002, t);
        let cw = random_codeword(&code, &mut rng);
        let obs = bpsk_awgn_llr_with(&cw, 3.0, 11.0 / 16.0, &mut rng);
        let out = gcd_so_decode(&code, &obs, cfg).unwrap();
        if out.status == DecodeStatus::Converged {
            converged += 1;
            let oracle = exhaustive_map_oracle(&code, &obs).unwrap();
            let best = code.encode(&oracle.argmax_info()).unwrap();
            matches += u64::from(out.list[0].codeword == best);
        }
    }
    let pass = converged > 0 && matches == converged;
    c.finish(
        pass,
        format!("converged={converged}/{trials}, argmax matches={matches}/{converged}"),
    );
}

fn bookkeeping_ok(out: &DecodeOutcome) -> bool {
    let total: f64 = out.list.iter().map(|e| e.post).sum::<f64>() + out.not_in_list;
    (total - 1.0).abs() <= 1e-9 && out.list.windows(2).all(|w| w[0].logp >= w[1].logp)
}

#[test]
fn criterion_03_posterior_bookkeeping() {
    let c = Criterion::new(3, "posterior + not-in-list mass sums to 1");
    let codes = [make_ebch(8, 4).unwrap(), make_ebch(16, 11).unwrap(), make_ebch(32, 26).unwrap()];
    let mut checked = 0u64;
    let mut bad = 0u64;
    for (ci, code) in codes.iter().enumerate() {
        for lambda in [1usize, 2, 4] {
            for ebno_db in [0.0, 3.0] {
                for t in 0..100u64 {
                    let salt = (ci as u64) << 32 | (lambda as u64) << 16 | ebno_db as u64;
                    let mut rng = trial_rng(0xACCE_0003 ^ salt, t);
                    let cw = random_codeword(code, &mut rng);
                    let rate = code.k() as f64 / code.n() as f64;
                    let obs = bpsk_awgn_llr_with(&cw, ebno_db, rate, &mut rng);
                    let cfg = DecoderConfig::with_lambda(lambda).max_queries(1 << 14);
                    let g = gcd_so_decode(code, &obs, cfg).unwrap();
                    let r = grand_so_decode(code, &obs, cfg).unwrap();
                    checked += 2;
                    bad += u64::from(!bookkeeping_ok(&g)) + u64::from(!bookkeeping_ok(&r));
                }
            }
        }
    }
    c.finish(bad == 0, format!("decodes checked={checked}, violations={bad}"));
}

#[test]
fn criterion_04_landslide_completeness() {
    let c = Criterion::new(4, "landslide enumeration complete and monotone");
    let mut detail = String::new();
    let mut pass = true;
    for m in [8usize, 10, 12] {
        let llrs: Vec<f64> = (0..m).map(|i| 0.1 + 0.37 * i as f64).collect();
        let obs = softguess::metrics::ChannelObservation::from_llrs(llrs);
        let designated: Vec<usize> = (0..m).collect();
        let order = ReliabilityOrder::new(&obs, &designated);
        let mut seen = std::collections::HashSet::new();
        let mut last_w = 0u64;
        let mut monotone = true;
        for p in orb_pattern_iter(&order, OrbOptions::default()) {
            monotone &= p.logistic_weight >= last_w;
            last_w = p.logistic_weight;
            seen.insert(p.flipped.clone());
        }
        let complete = seen.len() == 1 << m;

        let full: Vec<Vec<usize>> = orb_pattern_iter(&order, OrbOptions::default())
            .map(|p| p.flipped)
            .collect();
        let mut parity_ok = true;
        for parity in [Parity::Even, Parity::Odd] {
            let constrained: Vec<Vec<usize>> = orb_pattern_iter(
                &order,
                OrbOptions {
                    parity: Some(parity),
                    max_queries: usize::MAX,
                },
            )
            .map(|p| p.flipped)
            .collect();
            let filtered: Vec<Vec<usize>> = full
                .iter()
                .filter(|f| (f.len() % 2 == 0) == (parity == Parity::Even))
                .cloned()
                .collect();
            parity_ok &= constrained == filtered;
        }
        pass &= complete && monotone && parity_ok;
        detail.push_str(&format!(
            "m={m}: count={}/{} monotone={monotone} parity={parity_ok}; ",
            seen.len(),
            1 << m
        ));
    }
    c.finish(pass, detail);
}

#[test]
fn criterion_05_block_calibration_rlc() {
    let c = Criterion::new(5, "blockwise SO calibrated on RLC(32,26)");
    let code = make_rlc(32, 26, 7).unwrap();
    let table = run_block_calibration(&code, BlockDecoder::GcdSo, 2, 3.0, 200_000, 0xACCE_0005);
    let mut pass = true;
    let mut detail = String::new();
    let mut considered = 0;
    for b in &table.bins {
        if b.errors < 100 {
            continue;
        }
        considered += 1;
        let ratio = b.empirical() / b.mean_predicted();
        let ok = (0.6..=1.7).contains(&ratio);
        pass &= ok;
        detail.push_str(&format!("pred={:.4} ratio={:.2}{} ", b.mean_predicted(), ratio, if ok { "" } else { "!" }));
    }
    pass &= considered >= 3;
    c.finish(pass, format!("bins with >=100 errors: {considered}; {detail}"));
}

#[test]
fn criterion_06_forney_miscalibration() {
    let c = Criterion::new(6, "list-only posterior underestimates block error");
    let code = make_rlc(32, 26, 7).unwrap();
    let table =
        run_block_calibration(&code, BlockDecoder::GcdForney, 2, 3.0, 200_000, 0xACCE_0005);
    let mut best_ratio = 0.0f64;
    let mut at = 0.0;
    for b in &table.bins {
        if b.count == 0 || b.mean_predicted() > 0.01 || b.errors < 10 {
            continue;
        }
        let ratio = b.empirical() / b.mean_predicted();
        if ratio > best_ratio {
            best_ratio = ratio;
            at = b.mean_predicted();
        }
    }
    c.finish(
        best_ratio >= 2.5,
        format!("worst empirical/predicted in bins <=0.01: {best_ratio:.2} at pred={at:.4}"),
    );
}

#[test]
fn criterion_07_ebch_pessimism() {
    let c = Criterion::new(7, "single-decoding SO pessimism vanishes at lambda 4");
    let code = make_ebch(32, 26).unwrap();
    let t1 = run_block_calibration(&code, BlockDecoder::GcdSo, 1, 3.0, 200_000, 0xACCE_0007);
    let t4 = run_block_calibration(&code, BlockDecoder::GcdSo, 4, 3.0, 200_000, 0xACCE_0007);
    let b1 = t1.bin_containing(0.06);
    let b4 = t4.bin_containing(0.06);
    let r1 = b1.mean_predicted() / b1.empirical();
    let r4 = b4.mean_predicted() / b4.empirical();
    let pass = r1 >= 3.0 && (0.6..=1.7).contains(&r4);
    c.finish(
        pass,
        format!(
            "lambda=1: pred/emp={:.2} ({} errors); lambda=4: pred/emp={:.2} ({} errors)",
            r1, b1.errors, r4, b4.errors
        ),
    );
}

#[test]
fn criterion_08_bitwise_calibration() {
    let c = Criterion::new(8, "bitwise SO calibrated where max-log baseline is not");
    let code = make_ebch(32, 26).unwrap();
    let trials = 120_000;
    let so = softguess::harness::run_bit_calibration(
        &code,
        BitSo::SoGcd,
        4,
        3.0,
        trials,
        0xACCE_0008,
        0.5,
    );
    let pyn = softguess::harness::run_bit_calibration(
        &code,
        BitSo::Pyndiah,
        4,
        3.0,
        trials,
        0xACCE_0008,
        0.5,
    );
    let mid = |t: &CalibrationTable| -> Vec<(f64, f64)> {
        t.bins
            .iter()
            .filter(|b| b.lo >= 0.1 - 1e-12 && b.hi <= 0.9 + 1e-12 && b.count > 0)
            .map(|b| (b.mean_predicted(), b.empirical()))
            .collect()
    };
    let so_devs = mid(&so);
    let so_worst = so_devs
        .iter()
        .map(|(p, e)| (e - p).abs())
        .fold(0.0f64, f64::max);
    let pyn_violations = mid(&pyn)
        .iter()
        .filter(|(p, e)| (e - p).abs() > 0.06)
        .count();
    let pass = !so_devs.is_empty() && so_worst <= 0.06 && pyn_violations >= 3;
    c.finish(
        pass,
        format!(
            "SO worst |emp-pred| in [0.1,0.9]: {so_worst:.3} over {} bins; baseline violations: {pyn_violations}",
            so_devs.len()
        ),
    );
}

#[test]
fn criterion_09_product_code_operating_point() {
    let c = Criterion::new(9, "product (256,121) turbo decoding at 2 dB");
    let pc = make_product(make_ebch(16, 11).unwrap());
    let cfg = TurboConfig::default();
    let seed = 0xACCE_0009;
    let main = run_product_curve(&pc, &cfg, &[2.0], 100, 8000, seed);
    let p2 = &main[0];
    let lo_snr = run_product_curve(&pc, &cfg, &[1.5], 100, 2500, seed)[0].clone();
    let hi_snr = run_product_curve(&pc, &cfg, &[2.5], 25, 12_000, seed)[0].clone();

    let bler_ok = (0.018..=0.034).contains(&p2.bler) && p2.block_errors >= 100;
    let q_ref = 3106.6;
    let q_ok = p2.avg_queries >= q_ref / 2.0 && p2.avg_queries <= q_ref * 2.0;
    let mono_ok = lo_snr.bler > p2.bler && p2.bler > hi_snr.bler;
    let pass = bler_ok && q_ok && mono_ok;
    c.finish(
        pass,
        format!(
            "2dB: bler={:.4} ({} errors in {} blocks), avg_queries={:.0} (ref {q_ref}); bler 1.5dB={:.3} > 2dB={:.4} > 2.5dB={:.4}",
            p2.bler, p2.block_errors, p2.blocks, p2.avg_queries, lo_snr.bler, p2.bler, hi_snr.bler
        ),
    );
}

#[test]
fn criterion_10_parity_skip_equivalence() {
    let c = Criterion::new(10, "parity skipping: same lists, fewer queries");
    let code = make_ebch(16, 11).unwrap();
    let base = DecoderConfig::with_lambda(2).max_queries(1 << 16);
    let trials = 1000u64;
    let mut identical = 0u64;
    let mut fewer = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(0xACCE_0010, t);
        let cw = random_codeword(&code, &mut rng);
        let obs = bpsk_awgn_llr_with(&cw, 2.0, 11.0 / 16.0, &mut rng);
        let off = grand_so_decode(&code, &obs, base).unwrap();
        let on = grand_so_decode(&code, &obs, base.parity_skip(true)).unwrap();
        let words = |o: &DecodeOutcome| -> Vec<u128> {
            o.list.iter().map(|e| e.codeword.raw()).collect()
        };
        identical += u64::from(words(&off) == words(&on));
        fewer += u64::from(on.queries <= off.queries);
    }
    let pass = identical == trials && fewer == trials;
    c.finish(
        pass,
        format!("identical lists {identical}/{trials}, queries(on)<=queries(off) {fewer}/{trials}"),
    );
}

#[test]
fn criterion_11_determinism_under_parallelism() {
    let c = Criterion::new(11, "bit-identical CSVs at any parallelism level");
    let code = make_rlc(32, 26, 7).unwrap();
    let cal = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            run_block_calibration(&code, BlockDecoder::GcdSo, 2, 3.0, 10_000, 0xACCE_0011).to_csv()
        })
    };
    let cal_match = cal(1) == cal(4);

    let pc = make_product(make_ebch(8, 4).unwrap());
    let cfg = TurboConfig::default();
    let curve = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| curve_csv(&run_product_curve(&pc, &cfg, &[1.0, 3.0], 20, 400, 0xACCE_0011)))
    };
    let curve_match = curve(1) == curve(3);
    let pass = cal_match && curve_match;
    c.finish(
        pass,
        format!("calibration identical={cal_match}, curve identical={curve_match}"),
    );
}
