//! Benchmark programs in baseline (RV64I) and accelerated (scalar crypto)
//! form, the host-side plumbing to run them, and speedup reporting.

mod layout;
mod programs;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdl::MaskPolicy;
use crate::mcu::{derive_seed, PrngState, Stream};
use crate::pipeline::{ExecStats, Machine, Memory, Program, DEFAULT_STEP_BUDGET};
use crate::power::format_sig9;
use crate::reference;

pub use layout::*;
pub use programs::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Aes128,
    Aes192,
    Aes256,
    Sha256,
    Sha512,
    Sm3,
    Sm4,
}

/// Key and data for one run. Hash benchmarks ignore `key` and take a
/// message short enough to pad into a single block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchInput {
    pub key: Vec<u8>,
    pub data: Vec<u8>,
}

impl Benchmark {
    pub const ALL: [Benchmark; 7] = [
        Benchmark::Aes128,
        Benchmark::Aes192,
        Benchmark::Aes256,
        Benchmark::Sha256,
        Benchmark::Sha512,
        Benchmark::Sm3,
        Benchmark::Sm4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Aes128 => "aes128",
            Benchmark::Aes192 => "aes192",
            Benchmark::Aes256 => "aes256",
            Benchmark::Sha256 => "sha256",
            Benchmark::Sha512 => "sha512",
            Benchmark::Sm3 => "sm3",
            Benchmark::Sm4 => "sm4",
        }
    }

    fn key_len(self) -> usize {
        match self {
            Benchmark::Aes128 | Benchmark::Sm4 => 16,
            Benchmark::Aes192 => 24,
            Benchmark::Aes256 => 32,
            _ => 0,
        }
    }

    fn is_hash(self) -> bool {
        matches!(self, Benchmark::Sha256 | Benchmark::Sha512 | Benchmark::Sm3)
    }

    /// Longest message that still pads into one block.
    pub fn max_message_len(self) -> usize {
        match self {
            Benchmark::Sha512 => 111,
            b if b.is_hash() => 55,
            _ => 16,
        }
    }

    /// The published example vector for the algorithm.
    pub fn standard_input(self) -> BenchInput {
        let hex = |s: &str| reference::from_hex(s).expect("valid hex literal");
        let aes_pt = hex("00112233445566778899aabbccddeeff");
        match self {
            Benchmark::Aes128 | Benchmark::Aes192 | Benchmark::Aes256 => {
                BenchInput { key: (0..self.key_len() as u8).collect(), data: aes_pt }
            }
            Benchmark::Sm4 => {
                let v = hex("0123456789abcdeffedcba9876543210");
                BenchInput { key: v.clone(), data: v }
            }
            _ => BenchInput { key: Vec::new(), data: b"abc".to_vec() },
        }
    }

    pub fn random_input(self, rng: &mut PrngState) -> BenchInput {
        let mut bytes = |n: usize| (0..n).map(|_| rng.next_u64() as u8).collect::<Vec<u8>>();
        if self.is_hash() {
            let n = bytes(1)[0] as usize % (self.max_message_len() + 1);
            BenchInput { key: Vec::new(), data: bytes(n) }
        } else {
            BenchInput { key: bytes(self.key_len()), data: bytes(16) }
        }
    }

    /// Oracle output from the independent software reference.
    pub fn reference(self, input: &BenchInput) -> Result<Vec<u8>> {
        self.check(input)?;
        let block: [u8; 16] = input.data.as_slice().try_into().unwrap_or([0; 16]);
        Ok(match self {
            Benchmark::Aes128 | Benchmark::Aes192 | Benchmark::Aes256 => {
                reference::aes_encrypt(&input.key, &block).to_vec()
            }
            Benchmark::Sm4 => {
                let key: &[u8; 16] = input.key.as_slice().try_into().expect("checked length");
                reference::sm4_encrypt(key, &block).to_vec()
            }
            Benchmark::Sha256 => reference::sha256(&input.data).to_vec(),
            Benchmark::Sha512 => reference::sha512(&input.data).to_vec(),
            Benchmark::Sm3 => reference::sm3(&input.data).to_vec(),
        })
    }

    pub fn program(self, variant: Variant) -> Result<Program> {
        match self {
            Benchmark::Aes128 | Benchmark::Aes192 | Benchmark::Aes256 => programs::aes(variant, self.key_len()),
            Benchmark::Sha256 => programs::sha256(variant),
            Benchmark::Sha512 => programs::sha512(variant),
            Benchmark::Sm3 => programs::sm3(variant),
            Benchmark::Sm4 => programs::sm4(variant),
        }
    }

    fn check(self, input: &BenchInput) -> Result<()> {
        if self.is_hash() {
            if input.data.len() > self.max_message_len() {
                return Err(Error::LengthMismatch { expected: self.max_message_len(), actual: input.data.len() });
            }
            return Ok(());
        }
        if input.key.len() != self.key_len() {
            return Err(Error::LengthMismatch { expected: self.key_len(), actual: input.key.len() });
        }
        if input.data.len() != 16 {
            return Err(Error::LengthMismatch { expected: 16, actual: input.data.len() });
        }
        Ok(())
    }

    /// Place the input in memory the way the program expects it.
    fn stage(self, input: &BenchInput, mem: &mut Memory) -> Result<()> {
        match self {
            Benchmark::Aes128 | Benchmark::Aes192 | Benchmark::Aes256 => {
                mem.write_bytes(KEY, &input.key)?;
                mem.write_bytes(IN, &input.data)
            }
            Benchmark::Sm4 => {
                for (i, (k, x)) in input.key.chunks(4).zip(input.data.chunks(4)).enumerate() {
                    mem.store(KEY + 4 * i as u64, 4, be(k))?;
                    mem.store(IN + 4 * i as u64, 4, be(x))?;
                }
                Ok(())
            }
            _ => {
                let width = if self == Benchmark::Sha512 { 8 } else { 4 };
                for (i, w) in pad_block(&input.data, 16 * width).chunks(width).enumerate() {
                    mem.store(IN + (width * i) as u64, width, be(w))?;
                }
                Ok(())
            }
        }
    }

    fn collect(self, mem: &Memory) -> Result<Vec<u8>> {
        let (words, width) = match self {
            Benchmark::Aes128 | Benchmark::Aes192 | Benchmark::Aes256 => return mem.read_bytes(OUT, 16),
            Benchmark::Sm4 => (4, 4),
            Benchmark::Sha512 => (8, 8),
            _ => (8, 4),
        };
        let mut out = Vec::with_capacity(words * width);
        for i in 0..words {
            let w = mem.load(OUT + (width * i) as u64, width)?;
            out.extend_from_slice(&w.to_be_bytes()[8 - width..]);
        }
        Ok(out)
    }
}

fn be(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0, |v, &b| v << 8 | b as u64)
}

/// Merkle–Damgård padding into exactly one block of `block` bytes.
fn pad_block(msg: &[u8], block: usize) -> Vec<u8> {
    let mut out = msg.to_vec();
    out.push(0x80);
    out.resize(block - 8, 0);
    // For SHA-512 the upper half of the 128-bit length field stays zero.
    out.extend_from_slice(&(8 * msg.len() as u64).to_be_bytes());
    out
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownBenchmark(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRun {
    pub output: Vec<u8>,
    pub stats: ExecStats,
}

pub fn run_benchmark(b: Benchmark, variant: Variant, input: &BenchInput, masking: bool, seed: u64) -> Result<BenchRun> {
    run_benchmark_with(b, variant, input, masking, seed, &TableImage::standard())
}

/// As [`run_benchmark`], with an explicit constant-table image.
pub fn run_benchmark_with(
    b: Benchmark,
    variant: Variant,
    input: &BenchInput,
    masking: bool,
    seed: u64,
    tables: &TableImage,
) -> Result<BenchRun> {
    b.check(input)?;
    let program = b.program(variant)?;
    let mut m = Machine::new(masking, MaskPolicy::default(), derive_seed(seed, Stream::Mask));
    tables.load(m.memory_mut())?;
    b.stage(input, m.memory_mut())?;
    m.run_with(&program, DEFAULT_STEP_BUDGET, |_| {})?;
    Ok(BenchRun { output: b.collect(m.memory())?, stats: m.stats() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupResult {
    pub benchmark: Benchmark,
    pub baseline_cycles: u64,
    pub accel_cycles: u64,
    pub speedup: f64,
    /// First 8 bytes of SHA-256 over the output, in hex.
    pub output_hash: String,
}

/// Cycle ratio of the baseline to the accelerated variant on one input.
/// Fails if the two variants disagree on the output.
pub fn speedup(b: Benchmark, input: &BenchInput, masking: bool, seed: u64) -> Result<SpeedupResult> {
    let base = run_benchmark(b, Variant::Baseline, input, masking, seed)?;
    let accel = run_benchmark(b, Variant::Accelerated, input, masking, seed)?;
    if base.output != accel.output {
        return Err(Error::Statistics(format!("{b}: baseline and accelerated outputs differ")));
    }
    Ok(SpeedupResult {
        benchmark: b,
        baseline_cycles: base.stats.cycles,
        accel_cycles: accel.stats.cycles,
        speedup: base.stats.cycles as f64 / accel.stats.cycles as f64,
        output_hash: reference::to_hex(&reference::sha256(&accel.output)[..8]),
    })
}

pub const CSV_HEADER: &str = "benchmark,baseline_cycles,accel_cycles,speedup,output_hash";

pub fn write_speedup_csv<W: Write>(rows: &[SpeedupResult], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.benchmark,
            r.baseline_cycles,
            r.accel_cycles,
            format_sig9(r.speedup),
            r.output_hash
        )?;
    }
    Ok(())
}
