use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cryptrisc::bench::{speedup, write_speedup_csv, Benchmark, TableImage};
use cryptrisc::crypto_isa::CryptoOp;
use cryptrisc::fdl::{classify, MaskPolicy};
use cryptrisc::power::{synthesize_traces, write_csv, LeakageConfig, TVLA_FIXED_INPUT};
use cryptrisc::reference::to_hex;
use cryptrisc::sca::{cpa_campaign, tvla_campaign, write_t_csv};
use cryptrisc::selftest::{selftest, selftest_with};
use cryptrisc::CampaignConfig64;

#[derive(Parser)]
#[command(name = "cryptrisc", version, about = "Scalar-crypto RISC-V model: benchmarks and leakage campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run known-answer vectors and mask round-trip suites.
    Selftest {
        /// 256-byte raw AES S-box to build the benchmark tables from (fault injection).
        #[arg(long, hide = true)]
        aes_sbox: Option<PathBuf>,
    },
    /// Cycle counts and speedup of accelerated over baseline programs.
    Bench(BenchArgs),
    /// Fixed-vs-random Welch t-test on one crypto instruction.
    Tvla(TvlaArgs),
    /// Correlation power analysis on the first AES S-box.
    Cpa(CpaArgs),
    /// Print the known-answer table.
    Vectors,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark name (aes128, aes192, aes256, sha256, sha512, sm3, sm4).
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    name: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "off")]
    masking: OnOff,
    #[arg(long, default_value = "1", value_parser = parse_seed)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Masking {
    #[arg(long, conflicts_with = "unmasked")]
    masked: bool,
    #[arg(long)]
    unmasked: bool,
}

impl Masking {
    /// Masking is on unless `--unmasked` is given.
    fn enabled(&self) -> bool {
        !self.unmasked
    }
}

#[derive(Args)]
struct Campaign {
    #[command(flatten)]
    masking: Masking,
    /// Number of traces.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "1.0")]
    sigma: f64,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Override the share count for every masked field class.
    #[arg(long)]
    shares: Option<u8>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TvlaArgs {
    /// Instruction mnemonic, e.g. saes64.encs.
    #[arg(required_unless_present = "list")]
    instr: Option<String>,
    /// List the crypto instructions and their field classes.
    #[arg(long, exclusive = true)]
    list: bool,
    #[command(flatten)]
    campaign: Campaign,
    /// Write the per-sample t-values as CSV.
    #[arg(long)]
    tcsv: Option<PathBuf>,
    /// Write every synthesized trace as CSV.
    #[arg(long)]
    traces_out: Option<PathBuf>,
}

#[derive(Args)]
struct CpaArgs {
    #[command(flatten)]
    campaign: Campaign,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn config(c: &Campaign) -> Result<CampaignConfig64> {
    let seed = c.seed.context("--seed is required so the campaign can be reproduced")?;
    let n = c.n.context("--n is required")?;
    let mut policy = MaskPolicy::from_env()?;
    if let Some(k) = c.shares {
        policy = MaskPolicy::uniform(k)?;
    }
    let mut cfg = CampaignConfig64::new(n, c.masking.enabled(), c.sigma, seed);
    cfg.policy = policy;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_selftest(aes_sbox: Option<&Path>) -> Result<bool> {
    let report = match aes_sbox {
        Some(p) => {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            let sbox: [u8; 256] = bytes.as_slice().try_into().context("S-box file must hold exactly 256 bytes")?;
            selftest_with(&TableImage::with_aes_sbox(&sbox))
        }
        None => selftest(),
    };
    for c in &report.checks {
        println!("{c}");
    }
    let failed = report.checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", report.checks.len());
    }
    Ok(failed == 0)
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let list = match &args.name {
        Some(n) => vec![n.parse::<Benchmark>()?],
        None => Benchmark::ALL.to_vec(),
    };
    let masking = matches!(args.masking, OnOff::On);
    let rows = list
        .iter()
        .map(|&b| speedup(b, &b.standard_input(), masking, args.seed))
        .collect::<cryptrisc::Result<Vec<_>>>()?;
    let mut out = output(args.out.as_deref())?;
    write_speedup_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_tvla(args: &TvlaArgs) -> Result<()> {
    if args.list {
        for op in CryptoOp::ALL {
            println!("{}\t{}", op.mnemonic(), classify(op.into()).name());
        }
        return Ok(());
    }
    let campaign = &args.campaign;
    let name = args.instr.as_deref().unwrap_or_default();
    let op: CryptoOp = name.parse()?;
    let cfg = config(campaign)?;
    let report = tvla_campaign(op, &cfg)?;
    if let Some(path) = &args.tcsv {
        let mut out = output(Some(path))?;
        write_t_csv(&report, &mut out)?;
        out.flush()?;
    }
    if let Some(path) = &args.traces_out {
        let leakage = LeakageConfig::new(cfg.sigma, cfg.model, cfg.seed)?;
        let traces = synthesize_traces(op, TVLA_FIXED_INPUT, cfg.n_traces, cfg.masked, cfg.policy, &leakage, cfg.seed)?;
        let mut out = output(Some(path))?;
        write_csv(&traces, &mut out)?;
        out.flush()?;
    }
    write_json(&report, campaign.report.as_deref())
}

fn cmd_cpa(args: &CpaArgs) -> Result<()> {
    let cfg = config(&args.campaign)?;
    let report = cpa_campaign(&cfg)?;
    write_json(&report, args.campaign.report.as_deref())
}

fn cmd_vectors() -> Result<()> {
    let mut out = output(None)?;
    writeln!(out, "benchmark,key,input,expected")?;
    for b in Benchmark::ALL {
        let input = b.standard_input();
        let want = b.reference(&input)?;
        writeln!(out, "{b},{},{},{}", to_hex(&input.key), to_hex(&input.data), to_hex(&want))?;
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Selftest { aes_sbox } => cmd_selftest(aes_sbox.as_deref()),
        Command::Bench(a) => cmd_bench(a).map(|()| true),
        Command::Tvla(a) => cmd_tvla(a).map(|()| true),
        Command::Cpa(a) => cmd_cpa(a).map(|()| true),
        Command::Vectors => cmd_vectors().map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
