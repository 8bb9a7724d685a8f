//! Command-line driver: code registry, single-frame decoding, calibration
//! sweeps, product-code curves, and the oracle equivalence suite.
//!
//! Every data-producing subcommand writes CSV to `--out` plus a JSON run
//! manifest alongside it. Results are bit-identical for a fixed seed at any
//! parallelism level; `SOFTGUESS_THREADS` caps the worker count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use softguess::codes::{lookup, registry_ids, ProductCode, RegistryCode};
use softguess::decode::{
    gcd_so_decode, grand_so_decode, DecodeOutcome, DecoderConfig, PatternOrder,
};
use softguess::gf2::SystematicCode;
use softguess::harness::{
    curve_csv, oracle_check, run_bit_calibration, run_block_calibration, run_product_curve, BitSo,
    BlockDecoder, DEFAULT_PYNDIAH_BETA,
};
use softguess::metrics::ChannelObservation;
use softguess::turbo::{turbo_decode, TurboConfig};

#[derive(Parser)]
#[command(name = "softguess", version, about = "Soft-output guessing decoder workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the code registry.
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
    /// Decode a single LLR frame from a file and print the outcome.
    DecodeOne(DecodeOneArgs),
    /// Blockwise reliability diagram (predicted vs empirical BLER).
    CalibrateBlock(CalibrateBlockArgs),
    /// Bitwise reliability diagram (predicted vs empirical BER).
    CalibrateBit(CalibrateBitArgs),
    /// BLER/BER/guess-count curve for a product code.
    ProductCurve(ProductCurveArgs),
    /// Run the exhaustive-oracle equivalence suite.
    OracleCheck(OracleCheckArgs),
}

#[derive(Subcommand)]
enum CodesAction {
    /// List registry identifiers.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderKind {
    Gcd,
    Grand,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    Orb,
    Ml,
}

#[derive(Args)]
struct DecodeOneArgs {
    #[arg(long)]
    code: String,
    /// File with one whitespace-separated LLR per bit.
    #[arg(long)]
    llr_file: PathBuf,
    #[arg(long, value_enum, default_value = "gcd")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 4)]
    lambda: usize,
    #[arg(long, value_enum, default_value = "orb")]
    order: OrderKind,
    #[arg(long, default_value_t = 1 << 22)]
    max_queries: usize,
    /// Skip wrong-parity patterns (GRAND on even codes).
    #[arg(long)]
    parity_skip: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockKind {
    Gcd,
    Grand,
    Forney,
}

#[derive(Args)]
struct CalibrateBlockArgs {
    #[arg(long)]
    code: String,
    #[arg(long, value_enum, default_value = "gcd")]
    decoder: BlockKind,
    #[arg(long, default_value_t = 2)]
    lambda: usize,
    #[arg(long)]
    ebno: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BitKind {
    Gcd,
    Pyndiah,
}

#[derive(Args)]
struct CalibrateBitArgs {
    #[arg(long)]
    code: String,
    #[arg(long = "so", value_enum, default_value = "gcd")]
    so_kind: BitKind,
    #[arg(long, default_value_t = 4)]
    lambda: usize,
    #[arg(long)]
    ebno: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fallback scaling for the max-log baseline.
    #[arg(long, default_value_t = DEFAULT_PYNDIAH_BETA)]
    beta: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProductCurveArgs {
    #[arg(long)]
    code: String,
    /// Comma-separated Eb/N0 points in dB, e.g. "1,1.5,2".
    #[arg(long, value_delimiter = ',')]
    ebno_list: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    min_block_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_trials: u64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 4)]
    lambda: usize,
    #[arg(long, default_value_t = 16)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long)]
    code: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn version_string() -> String {
    let described = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string());
    match described {
        Some(d) if !d.is_empty() => format!("softguess {} ({d})", env!("CARGO_PKG_VERSION")),
        _ => format!("softguess {}", env!("CARGO_PKG_VERSION")),
    }
}

/// Write the run manifest next to the CSV output.
fn write_manifest(
    out: &Path,
    seed: u64,
    code_id: &str,
    decoder: &str,
    lambda: usize,
    ebno_db: serde_json::Value,
    trials: u64,
) -> Result<()> {
    let manifest = serde_json::json!({
        "seed": seed,
        "code_id": code_id,
        "decoder": decoder,
        "lambda": lambda,
        "ebno_db": ebno_db,
        "trials": trials,
        "version": version_string(),
    });
    let path = out.with_extension("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(())
}

fn linear_code(id: &str) -> Result<SystematicCode> {
    match lookup(id).map_err(|e| anyhow!("{e}"))? {
        RegistryCode::Linear(c) => Ok(c),
        RegistryCode::Product(_) => bail!("{id} is a product code; this command needs a component code"),
    }
}

fn product_code(id: &str) -> Result<ProductCode> {
    match lookup(id).map_err(|e| anyhow!("{e}"))? {
        RegistryCode::Product(p) => Ok(p),
        RegistryCode::Linear(_) => bail!("{id} is not a product code (try product-{id})"),
    }
}

fn read_llr_file(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading LLR frame {}", path.display()))?;
    let llrs: Vec<f64> = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .with_context(|| format!("bad LLR value {tok:?}"))
        })
        .collect::<Result<_>>()?;
    if llrs.len() != expected {
        bail!(
            "LLR frame has {} values, code needs {expected}",
            llrs.len()
        );
    }
    Ok(llrs)
}

fn print_outcome(out: &DecodeOutcome) {
    println!("status: {:?}", out.status);
    println!("queries: {}", out.queries);
    println!("queried_mass: {}", out.queried_mass);
    println!("not_in_list: {}", out.not_in_list);
    println!("list ({} entries):", out.list.len());
    for (i, e) in out.list.iter().enumerate() {
        println!(
            "  {:2}. codeword={} logp={:.6} post={:.6}",
            i + 1,
            e.codeword,
            e.logp,
            e.post
        );
    }
    let rendered: Vec<String> = out.app_llr.iter().map(|l| format!("{l:.4}")).collect();
    println!("app_llr: {}", rendered.join(" "));
}

fn cmd_decode_one(args: &DecodeOneArgs) -> Result<()> {
    match lookup(&args.code).map_err(|e| anyhow!("{e}"))? {
        RegistryCode::Linear(code) => {
            let llrs = read_llr_file(&args.llr_file, code.n())?;
            let obs = ChannelObservation::from_llrs(llrs);
            let cfg = DecoderConfig {
                lambda: args.lambda,
                max_queries: args.max_queries,
                parity_skip: args.parity_skip,
                order: match args.order {
                    OrderKind::Orb => PatternOrder::Orb,
                    OrderKind::Ml => PatternOrder::Ml,
                },
            };
            println!("code: {} (n={}, k={})", args.code, code.n(), code.k());
            let out = match args.decoder {
                DecoderKind::Gcd => gcd_so_decode(&code, &obs, cfg),
                DecoderKind::Grand => grand_so_decode(&code, &obs, cfg),
            }
            .map_err(|e| anyhow!("{e}"))?;
            print_outcome(&out);
        }
        RegistryCode::Product(pc) => {
            let llrs = read_llr_file(&args.llr_file, pc.block_len())?;
            let cfg = TurboConfig {
                component: DecoderConfig::with_lambda(args.lambda),
                ..TurboConfig::default()
            };
            println!(
                "code: {} (N={}, K={})",
                args.code,
                pc.block_len(),
                pc.dimension()
            );
            let out = turbo_decode(&pc, &llrs, &cfg).map_err(|e| anyhow!("{e}"))?;
            println!("status: {:?}", out.status);
            println!("iterations_used: {}", out.iterations_used);
            println!("total_queries: {}", out.total_queries);
            println!("decision rows:");
            for row in &out.decision {
                println!("  {row}");
            }
        }
    }
    Ok(())
}

fn cmd_calibrate_block(args: &CalibrateBlockArgs) -> Result<()> {
    let code = linear_code(&args.code)?;
    let decoder = match args.decoder {
        BlockKind::Gcd => BlockDecoder::GcdSo,
        BlockKind::Grand => BlockDecoder::GrandSo,
        BlockKind::Forney => BlockDecoder::GcdForney,
    };
    let table = run_block_calibration(&code, decoder, args.lambda, args.ebno, args.trials, args.seed);
    std::fs::write(&args.out, table.to_csv())
        .with_context(|| format!("writing {}", args.out.display()))?;
    let name = match args.decoder {
        BlockKind::Gcd => "gcd-so",
        BlockKind::Grand => "grand-so",
        BlockKind::Forney => "gcd-forney",
    };
    write_manifest(
        &args.out,
        args.seed,
        &args.code,
        name,
        args.lambda,
        args.ebno.into(),
        args.trials,
    )?;
    println!(
        "wrote {} ({} observations)",
        args.out.display(),
        table.total_count()
    );
    Ok(())
}

fn cmd_calibrate_bit(args: &CalibrateBitArgs) -> Result<()> {
    let code = linear_code(&args.code)?;
    let so = match args.so_kind {
        BitKind::Gcd => BitSo::SoGcd,
        BitKind::Pyndiah => BitSo::Pyndiah,
    };
    let table = run_bit_calibration(
        &code, so, args.lambda, args.ebno, args.trials, args.seed, args.beta,
    );
    std::fs::write(&args.out, table.to_csv())
        .with_context(|| format!("writing {}", args.out.display()))?;
    let name = match args.so_kind {
        BitKind::Gcd => "so-gcd-bits",
        BitKind::Pyndiah => "pyndiah-bits",
    };
    write_manifest(
        &args.out,
        args.seed,
        &args.code,
        name,
        args.lambda,
        args.ebno.into(),
        args.trials,
    )?;
    println!(
        "wrote {} ({} bits observed)",
        args.out.display(),
        table.total_count()
    );
    Ok(())
}

fn cmd_product_curve(args: &ProductCurveArgs) -> Result<()> {
    if args.ebno_list.is_empty() {
        bail!("--ebno-list needs at least one point");
    }
    if args.min_block_errors < 1 {
        bail!("--min-block-errors must be at least 1");
    }
    let pc = product_code(&args.code)?;
    let cfg = TurboConfig {
        alpha: args.alpha,
        max_iters: args.max_iters,
        component: DecoderConfig::with_lambda(args.lambda),
    };
    let points = run_product_curve(
        &pc,
        &cfg,
        &args.ebno_list,
        args.min_block_errors,
        args.max_trials,
        args.seed,
    );
    std::fs::write(&args.out, curve_csv(&points))
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_manifest(
        &args.out,
        args.seed,
        &args.code,
        "turbo-gcd-so",
        args.lambda,
        serde_json::json!(args.ebno_list),
        args.max_trials,
    )?;
    for p in &points {
        println!(
            "ebno={} bler={:.4e} ber={:.4e} avg_queries={:.1} blocks={}{}",
            p.ebno_db,
            p.bler,
            p.ber,
            p.avg_queries,
            p.blocks,
            if p.low_confidence { " (low confidence)" } else { "" }
        );
    }
    Ok(())
}

/// Runs the oracle suite; Ok(false) means the suite ran and found mismatches.
fn cmd_oracle_check(args: &OracleCheckArgs) -> Result<bool> {
    let code = linear_code(&args.code)?;
    let report = oracle_check(&code, args.trials, args.seed).map_err(|e| anyhow!("{e}"))?;
    println!(
        "trials={} posterior_failures={} llr_failures={} ml_argmax_failures={} max_posterior_dev={:.3e} max_llr_dev={:.3e}",
        report.trials,
        report.posterior_failures,
        report.llr_failures,
        report.ml_argmax_failures,
        report.max_posterior_dev,
        report.max_llr_dev
    );
    println!("oracle-check: {}", if report.ok() { "OK" } else { "FAILED" });
    Ok(report.ok())
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("SOFTGUESS_THREADS") {
        let n: usize = raw
            .parse()
            .with_context(|| format!("SOFTGUESS_THREADS={raw:?} is not a thread count"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("installing thread pool")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Codes { action: CodesAction::List } => {
            for id in registry_ids() {
                println!("{id}");
            }
            println!("rlc-<n>-<k>-s<seed>");
            Ok(())
        }
        Command::DecodeOne(args) => cmd_decode_one(args),
        Command::CalibrateBlock(args) => cmd_calibrate_block(args),
        Command::CalibrateBit(args) => cmd_calibrate_bit(args),
        Command::ProductCurve(args) => cmd_product_curve(args),
        Command::OracleCheck(args) => {
            return match cmd_oracle_check(args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(3),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
