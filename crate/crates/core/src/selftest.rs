//! Built-in known-answer and round-trip checks, run by `cryptrisc selftest`.

use std::fmt;

use crate::bench::{run_benchmark_with, Benchmark, TableImage, Variant};
use crate::crypto_isa::{compose_aes128, compose_sha256, compose_sha512, compose_sm3, compose_sm4};
use crate::fdl::{MaskMetadata, MaskMode};
use crate::fields::{gf_inv, gf_mul};
use crate::mcu::{derive_seed, mask_with, unmask, MaskScheme, PrngState, Stream};
use crate::reference::{self, to_hex};

/// Random inputs per benchmark on top of the standard vector.
const RANDOM_INPUTS: usize = 10;
const MASK_TRIALS: usize = 2000;
const SEED: u64 = 0x5e1f_7e57;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub failures: Vec<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "PASS {}", self.name);
        }
        write!(f, "FAIL {}", self.name)?;
        for why in &self.failures {
            write!(f, "\n  {why}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

pub fn selftest() -> SelftestReport {
    selftest_with(&TableImage::standard())
}

/// Run every check, with benchmark programs reading `tables`.
pub fn selftest_with(tables: &TableImage) -> SelftestReport {
    let mut checks: Vec<Check> = Benchmark::ALL.iter().map(|&b| bench_check(b, tables)).collect();
    checks.push(check("compose", compose_failures()));
    checks.push(check("gf256", gf_failures()));
    for (name, scheme, width) in [
        ("mask/boolean", MaskScheme::Boolean, 64),
        ("mask/arithmetic32", MaskScheme::Arithmetic, 32),
        ("mask/arithmetic64", MaskScheme::Arithmetic, 64),
        ("mask/multiplicative", MaskScheme::Multiplicative, 8),
        ("mask/affine", MaskScheme::Affine, 8),
    ] {
        checks.push(check(name, mask_failures(scheme, width)));
    }
    SelftestReport { checks }
}

fn check(name: &str, failures: Vec<String>) -> Check {
    Check { name: name.to_string(), failures }
}

fn bench_check(b: Benchmark, tables: &TableImage) -> Check {
    let mut rng = derive_seed(SEED, Stream::Input);
    let mut inputs = vec![("standard vector".to_string(), b.standard_input())];
    inputs.extend((0..RANDOM_INPUTS).map(|i| (format!("random input {i}"), b.random_input(&mut rng))));
    let mut failures = Vec::new();
    for (label, input) in &inputs {
        let want = match b.reference(input) {
            Ok(w) => w,
            Err(e) => {
                failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        for v in [Variant::Baseline, Variant::Accelerated] {
            match run_benchmark_with(b, v, input, false, SEED, tables) {
                Ok(run) if run.output == want => {}
                Ok(run) => failures.push(format!("{v:?} {label}: got {} want {}", to_hex(&run.output), to_hex(&want))),
                Err(e) => failures.push(format!("{v:?} {label}: {e}")),
            }
        }
    }
    check(b.name(), failures)
}

fn compose_failures() -> Vec<String> {
    let mut out = Vec::new();
    let mut expect = |name: &str, got: Option<Vec<u8>>, want: Vec<u8>| {
        if got.as_ref() != Some(&want) {
            out.push(format!("{name}: got {} want {}", got.map_or("error".into(), |g| to_hex(&g)), to_hex(&want)));
        }
    };
    let key: [u8; 16] = core::array::from_fn(|i| i as u8);
    let pt: [u8; 16] = core::array::from_fn(|i| (i as u8) * 0x11);
    expect("aes128", compose_aes128(&key, &pt).ok().map(Vec::from), reference::aes_encrypt(&key, &pt).to_vec());
    expect("sm4", compose_sm4(&key, &pt).ok().map(Vec::from), reference::sm4_encrypt(&key, &pt).to_vec());
    let msg = b"field-aware masking";
    expect("sha256", Some(compose_sha256(msg).to_vec()), reference::sha256(msg).to_vec());
    expect("sha512", Some(compose_sha512(msg).to_vec()), reference::sha512(msg).to_vec());
    expect("sm3", Some(compose_sm3(msg).to_vec()), reference::sm3(msg).to_vec());
    out
}

fn gf_failures() -> Vec<String> {
    let mut out = Vec::new();
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            if gf_mul(a, b) != reference::gmul(a, b) {
                out.push(format!("gf_mul({a:#04x}, {b:#04x})"));
            }
        }
        if a != 0 && gf_inv(a).map(|i| gf_mul(a, i)) != Ok(1) {
            out.push(format!("gf_inv({a:#04x})"));
        }
    }
    if gf_inv(0).is_ok() {
        out.push("gf_inv(0) accepted".into());
    }
    out.truncate(10);
    out
}

fn mask_failures(scheme: MaskScheme, width: u32) -> Vec<String> {
    let mut rng = derive_seed(SEED, Stream::Mask);
    let mut values = PrngState::new(SEED).expect("nonzero seed");
    let mut out = Vec::new();
    for i in 0..MASK_TRIALS {
        let shares = 1 + (i % 3) as u8;
        let x = values.next_u64();
        let meta = MaskMetadata { mode: MaskMode::Affine, shares };
        let got = mask_with(x, scheme, meta, width, &mut rng).and_then(|m| unmask(&m));
        if got != Ok(x) {
            out.push(format!("x = {x:#018x}, {shares} shares: {got:?}"));
            if out.len() == 10 {
                break;
            }
        }
    }
    out
}
