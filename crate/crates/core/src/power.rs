//! Synthetic power traces from bus activity under a Hamming-weight/distance model.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crypto_isa::{CryptoOp, Reg};
use crate::error::{Error, Result};
use crate::fdl::MaskPolicy;
use crate::mcu::{derive_seed, PrngState, Stream};
use crate::pipeline::{Asm, Machine, PowerEvent, Program, DEFAULT_STEP_BUDGET};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeakageModel {
    #[serde(rename = "HW")]
    HammingWeight,
    #[serde(rename = "HW+HD")]
    HammingWeightDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageConfig<T> {
    pub sigma: T,
    pub model: LeakageModel,
    pub noise_seed: u64,
}

impl<T: Scalar> LeakageConfig<T> {
    pub fn new(sigma: T, model: LeakageModel, noise_seed: u64) -> Result<Self> {
        // Written this way round so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::Statistics(format!("noise sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(LeakageConfig { sigma, model, noise_seed })
    }
}

impl<T: Scalar> Default for LeakageConfig<T> {
    fn default() -> Self {
        LeakageConfig { sigma: T::one(), model: LeakageModel::HammingWeightDistance, noise_seed: 1 }
    }
}

pub fn noiseless_leak(e: &PowerEvent, model: LeakageModel) -> u32 {
    let hw = e.op1.count_ones() + e.op2.count_ones() + e.result.count_ones();
    match model {
        LeakageModel::HammingWeight => hw,
        LeakageModel::HammingWeightDistance => hw + (e.prev_rd ^ e.result).count_ones(),
    }
}

/// Standard normal sample by Box–Muller over two consecutive LFSR words:
/// u1 = ((w1 >> 11) + 1) / 2^53 in (0, 1], u2 = (reverse_bits(w2) >> 11) / 2^53
/// in [0, 1), z = sqrt(-2 ln u1) cos(2π u2).
///
/// The bit reversal takes u2 from the newest bits of w2. The high bits of
/// consecutive words are linearly tied through the feedback taps, which
/// visibly thins the tails when both come from the top.
pub fn gaussian<T: Scalar>(rng: &mut PrngState) -> T {
    let scale = T::of(1.0 / (1u64 << 53) as f64);
    let u1 = T::of(((rng.next_u64() >> 11) + 1) as f64) * scale;
    let u2 = T::of((rng.next_u64().reverse_bits() >> 11) as f64) * scale;
    (T::of(-2.0) * u1.ln()).sqrt() * (T::of(std::f64::consts::TAU) * u2).cos()
}

/// One leakage sample. Noise is drawn even when sigma is zero so that the
/// stream position does not depend on the configuration.
pub fn leak<T: Scalar>(event: &PowerEvent, cfg: &LeakageConfig<T>, noise: &mut PrngState) -> T {
    let z: T = gaussian(noise);
    T::of(noiseless_leak(event, cfg.model) as f64) + cfg.sigma * z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Fixed,
    Random,
}

impl Group {
    pub fn code(self) -> u8 {
        match self {
            Group::Fixed => 0,
            Group::Random => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub group: Group,
    pub samples: Vec<T>,
    pub seed: u64,
}

/// Fixed input for fixed-vs-random campaigns (rs1, rs2).
pub const TVLA_FIXED_INPUT: (u64, u64) = (0xda39_a3ee_5e6b_4b0d, 0x3255_bfef_9560_1890);

/// Instructions in a leakage window.
pub const TVLA_WINDOW: usize = 8;

/// `window` chained copies of `op`: the k-th reads the previous result (x1 for
/// the first) and x2, and writes x(3+k). Immediates cycle through the legal range.
pub fn tvla_window(op: CryptoOp, window: usize) -> Result<Program> {
    if window == 0 || window > 29 {
        return Err(Error::Statistics(format!("window of {window} instructions does not fit the register file")));
    }
    let mut a = Asm::new();
    let rs2 = if op.reads_rs2() { 2 } else { 0 };
    let mut rs1 = 1u8;
    for k in 0..window {
        let rd = 3 + k as u8;
        match op.imm_range() {
            Some(r) => a.crypto_imm(op, rd, rs1, rs2, (k as i64) % (r.end() + 1)),
            None => a.crypto(op, rd, rs1, rs2),
        };
        rs1 = rd;
    }
    a.finish()
}

/// Run `program` once with the given register inputs and turn every retired
/// instruction into one sample. Mask and noise streams derive from `seed`.
pub fn capture<T: Scalar>(
    program: &Program,
    inputs: &[(Reg, u64)],
    masking: bool,
    policy: MaskPolicy,
    cfg: &LeakageConfig<T>,
    seed: u64,
) -> Result<Vec<T>> {
    let mut m = Machine::new(masking, policy, derive_seed(seed, Stream::Mask));
    for &(r, v) in inputs {
        m.set_reg(r, v);
    }
    let mut noise = derive_seed(seed ^ cfg.noise_seed.rotate_left(32), Stream::Noise);
    let mut samples = Vec::with_capacity(program.len());
    m.run_with(program, DEFAULT_STEP_BUDGET, |r| samples.push(leak(&r.event, cfg, &mut noise)))?;
    Ok(samples)
}

/// Half fixed, half random, in a seeded random order.
pub fn shuffled_groups(n: usize, master_seed: u64) -> Vec<Group> {
    let mut groups: Vec<Group> = (0..n).map(|i| if i < n / 2 { Group::Fixed } else { Group::Random }).collect();
    let mut rng = derive_seed(master_seed, Stream::Shuffle);
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        groups.swap(i, j);
    }
    groups
}

/// Fixed-vs-random traces of `op`'s instruction window. Trace `i` uses the
/// seed `master_seed ^ i`.
pub fn synthesize_traces<T: Scalar>(
    op: CryptoOp,
    fixed_input: (u64, u64),
    n_traces: usize,
    masking: bool,
    policy: MaskPolicy,
    cfg: &LeakageConfig<T>,
    master_seed: u64,
) -> Result<Vec<Trace<T>>> {
    if n_traces == 0 || !n_traces.is_multiple_of(2) {
        return Err(Error::Statistics(format!("trace count must be even and positive, got {n_traces}")));
    }
    let program = tvla_window(op, TVLA_WINDOW)?;
    let groups = shuffled_groups(n_traces, master_seed);
    groups
        .into_par_iter()
        .enumerate()
        .map(|(i, group)| {
            let seed = master_seed ^ i as u64;
            let (x1, x2) = match group {
                Group::Fixed => fixed_input,
                Group::Random => {
                    let mut r = derive_seed(seed, Stream::Input);
                    (r.next_u64(), r.next_u64())
                }
            };
            let inputs = [(Reg::x(1), x1), (Reg::x(2), x2)];
            let samples = capture(&program, &inputs, masking, policy, cfg, seed)?;
            Ok(Trace { group, samples, seed })
        })
        .collect()
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp).max(0) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<T: Scalar, W: Write>(traces: &[Trace<T>], mut out: W) -> io::Result<()> {
    let len = traces.first().map_or(0, |t| t.samples.len());
    let mut header = String::from("group,seed");
    for i in 0..len {
        header.push_str(&format!(",s{i}"));
    }
    writeln!(out, "{header}")?;
    for t in traces {
        write!(out, "{},{}", t.group.code(), t.seed)?;
        for s in &t.samples {
            write!(out, ",{}", format_sig9(s.as_f64()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_csv<T: Scalar, R: BufRead>(input: R) -> Result<Vec<Trace<T>>> {
    let bad = |line: usize, what: &str| Error::Statistics(format!("trace CSV line {line}: {what}"));
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?.map_err(|e| bad(1, &e.to_string()))?;
    let width = header.split(',').count();
    if !header.starts_with("group,seed") {
        return Err(bad(1, "header must start with group,seed"));
    }
    let mut traces = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line.map_err(|e| bad(n, &e.to_string()))?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(n, "wrong number of fields"));
        }
        let group = match fields[0] {
            "0" => Group::Fixed,
            "1" => Group::Random,
            _ => return Err(bad(n, "group must be 0 or 1")),
        };
        let seed = fields[1].parse().map_err(|_| bad(n, "bad seed"))?;
        let samples = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>().map(T::of).map_err(|_| bad(n, "bad sample")))
            .collect::<Result<_>>()?;
        traces.push(Trace { group, samples, seed });
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(op1: u64, op2: u64, result: u64, prev_rd: u64) -> PowerEvent {
        PowerEvent { cycle: 0, op1, op2, result, prev_rd }
    }

    fn cfg(sigma: f64, model: LeakageModel) -> LeakageConfig<f64> {
        LeakageConfig::new(sigma, model, 1).unwrap()
    }

    #[test]
    fn noiseless_examples() {
        let mut r = PrngState::new(1).unwrap();
        assert_eq!(leak(&ev(0, 0, 0, 0), &cfg(0.0, LeakageModel::HammingWeightDistance), &mut r), 0.0);
        assert_eq!(leak(&ev(0xff, 0, 0, 0), &cfg(0.0, LeakageModel::HammingWeight), &mut r), 8.0);
        assert_eq!(noiseless_leak(&ev(1, 1, 3, 1), LeakageModel::HammingWeightDistance), 5);
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(LeakageConfig::new(-1.0, LeakageModel::HammingWeight, 1).is_err());
        assert!(LeakageConfig::new(f64::NAN, LeakageModel::HammingWeight, 1).is_err());
    }

    #[test]
    fn noise_mean_and_spread() {
        let c = cfg(2.0, LeakageModel::HammingWeightDistance);
        let e = ev(0xf0, 0x3, 0x1, 0x0);
        let mut r = PrngState::new(12345).unwrap();
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| leak(&e, &c, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let truth = noiseless_leak(&e, c.model) as f64;
        assert!((mean - truth).abs() < 3.0 * 2.0 / (n as f64).sqrt(), "mean {mean}");
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 2.0).abs() < 0.05, "sd {}", var.sqrt());
    }

    #[test]
    fn gaussian_tails() {
        let mut r = PrngState::new(99).unwrap();
        let n = 2_000_000;
        let beyond3 = (0..n).filter(|_| gaussian::<f64>(&mut r).abs() > 3.0).count() as f64 / n as f64;
        // P(|Z| > 3) = 0.0026998; binomial sd at this n is 3.7e-5.
        assert!((beyond3 - 0.0026998).abs() < 4.0 * 3.7e-5, "{beyond3}");
    }

    #[test]
    fn generic_over_f32() {
        let c = LeakageConfig::<f32>::new(0.0, LeakageModel::HammingWeight, 1).unwrap();
        let mut r = PrngState::new(1).unwrap();
        assert_eq!(leak(&ev(3, 0, 0, 0), &c, &mut r), 2.0f32);
    }

    #[test]
    fn group_balance() {
        let t = synthesize_traces(
            CryptoOp::Saes64Encs,
            TVLA_FIXED_INPUT,
            400,
            false,
            MaskPolicy::default(),
            &cfg(1.0, LeakageModel::HammingWeightDistance),
            42,
        )
        .unwrap();
        assert_eq!(t.iter().filter(|t| t.group == Group::Fixed).count(), 200);
        assert!(t.iter().all(|t| t.samples.len() == TVLA_WINDOW));
        assert!(t.iter().enumerate().all(|(i, t)| t.seed == 42 ^ i as u64));
        assert!(synthesize_traces(
            CryptoOp::Saes64Encs,
            TVLA_FIXED_INPUT,
            3,
            false,
            MaskPolicy::default(),
            &cfg(1.0, LeakageModel::HammingWeight),
            1
        )
        .is_err());
    }

    #[test]
    fn fixed_group_replays_without_noise_or_masks() {
        let c = cfg(0.0, LeakageModel::HammingWeightDistance);
        let t = synthesize_traces(CryptoOp::Ssha256Sum0, TVLA_FIXED_INPUT, 100, false, MaskPolicy::default(), &c, 9)
            .unwrap();
        let fixed: Vec<_> = t.iter().filter(|t| t.group == Group::Fixed).collect();
        assert!(fixed.windows(2).all(|w| w[0].samples == w[1].samples));
        let masked =
            synthesize_traces(CryptoOp::Ssha256Sum0, TVLA_FIXED_INPUT, 100, true, MaskPolicy::default(), &c, 9)
                .unwrap();
        let fixed: Vec<_> = masked.iter().filter(|t| t.group == Group::Fixed).collect();
        assert_ne!(fixed[0].samples, fixed[1].samples);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = cfg(1.0, LeakageModel::HammingWeightDistance);
        let a = synthesize_traces(CryptoOp::Ssm4Ed, TVLA_FIXED_INPUT, 64, true, MaskPolicy::default(), &c, 5).unwrap();
        let b = synthesize_traces(CryptoOp::Ssm4Ed, TVLA_FIXED_INPUT, 64, true, MaskPolicy::default(), &c, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_shape() {
        let p = tvla_window(CryptoOp::Saes64Ks1, 8).unwrap();
        let imms: Vec<_> = p.instructions().iter().map(|i| i.imm.unwrap()).collect();
        assert_eq!(imms, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        let p = tvla_window(CryptoOp::Ssm4Ks, 6).unwrap();
        assert_eq!(p.instructions()[5].imm, Some(1));
        assert_eq!(p.instructions()[1].rs1, Reg::x(3));
        assert!(tvla_window(CryptoOp::Ssm4Ks, 0).is_err());
    }

    #[test]
    fn sig9_format() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567891.0), "1.23456789e+09");
        assert_eq!(format_sig9(0.000012345), "1.2345e-05");
        assert_eq!(format_sig9(0.00012345), "0.00012345");
    }

    #[test]
    fn csv_round_trip() {
        let c = cfg(1.0, LeakageModel::HammingWeightDistance);
        let t = synthesize_traces(CryptoOp::Ssm3P1, TVLA_FIXED_INPUT, 10, false, MaskPolicy::default(), &c, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("group,seed,s0,s1,s2,s3,s4,s5,s6,s7\n"));
        let back: Vec<Trace<f64>> = read_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 10);
        for (a, b) in t.iter().zip(&back) {
            assert_eq!((a.group, a.seed), (b.group, b.seed));
            for (x, y) in a.samples.iter().zip(&b.samples) {
                assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
            }
        }
        assert!(read_csv::<f64, _>(&b"group,seed,s0\n2,1,0.5\n"[..]).is_err());
    }
}
