use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crypto_isa::{CryptoOp, Reg};
use crate::error::Result;
use crate::fdl::MaskPolicy;
use crate::mcu::{derive_seed, Stream};
use crate::pipeline::Asm;
use crate::power::{capture, format_sig9, synthesize_traces, Group, LeakageConfig, LeakageModel, TVLA_FIXED_INPUT};
use crate::Scalar;

use super::cpa::{cpa, sbox_hw, CpaReport};
use super::welch::welch_t;

pub const TVLA_THRESHOLD: f64 = 4.5;
pub const CPA_P_THRESHOLD: f64 = 0.05;

/// AES key attacked by CPA campaigns.
pub const CPA_KEY: [u8; 16] =
    [0x2b, 0x7e, 0x15, 0x16, 0x28, 0xae, 0xd2, 0xa6, 0xab, 0xf7, 0x15, 0x88, 0x09, 0xcf, 0x4f, 0x3c];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig<T> {
    pub n_traces: usize,
    pub masked: bool,
    pub sigma: T,
    pub model: LeakageModel,
    pub seed: u64,
    pub policy: MaskPolicy,
}

impl<T: Scalar> CampaignConfig<T> {
    pub fn new(n_traces: usize, masked: bool, sigma: T, seed: u64) -> Self {
        CampaignConfig {
            n_traces,
            masked,
            sigma,
            model: LeakageModel::HammingWeightDistance,
            seed,
            policy: MaskPolicy::default(),
        }
    }

    fn leakage(&self) -> Result<LeakageConfig<T>> {
        LeakageConfig::new(self.sigma, self.model, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvlaReport<T> {
    pub instruction: String,
    pub masked: bool,
    pub t_values: Vec<T>,
    pub max_abs_t: T,
    pub threshold: T,
    pub verdict: Verdict,
    pub n_traces: usize,
    pub seed: u64,
    pub sigma: T,
    pub model: LeakageModel,
    pub policy: MaskPolicy,
}

pub fn tvla_campaign<T: Scalar>(op: CryptoOp, cfg: &CampaignConfig<T>) -> Result<TvlaReport<T>> {
    let traces =
        synthesize_traces(op, TVLA_FIXED_INPUT, cfg.n_traces, cfg.masked, cfg.policy, &cfg.leakage()?, cfg.seed)?;
    let (fixed, random): (Vec<_>, Vec<_>) = traces.into_iter().partition(|t| t.group == Group::Fixed);
    let fixed: Vec<Vec<T>> = fixed.into_iter().map(|t| t.samples).collect();
    let random: Vec<Vec<T>> = random.into_iter().map(|t| t.samples).collect();
    let t_values = welch_t(&fixed, &random)?;
    let max_abs_t = t_values.iter().fold(T::zero(), |m, t| m.max(t.abs()));
    let threshold = T::of(TVLA_THRESHOLD);
    Ok(TvlaReport {
        instruction: op.mnemonic().to_string(),
        masked: cfg.masked,
        verdict: if max_abs_t < threshold { Verdict::Pass } else { Verdict::Fail },
        t_values,
        max_abs_t,
        threshold,
        n_traces: cfg.n_traces,
        seed: cfg.seed,
        sigma: cfg.sigma,
        model: cfg.model,
        policy: cfg.policy,
    })
}

/// Plot-ready `sample_index,t_value` rows.
pub fn write_t_csv<T: Scalar, W: Write>(report: &TvlaReport<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "sample_index,t_value")?;
    for (i, t) in report.t_values.iter().enumerate() {
        writeln!(out, "{i},{}", format_sig9(t.as_f64()))?;
    }
    Ok(())
}

/// CPA on the first-round S-box of `saes64.encs` with key [`CPA_KEY`] and
/// random plaintexts. Registers x1/x2 hold the low/high halves of
/// plaintext ⊕ key; the attacked byte is byte 0.
pub fn cpa_campaign<T: Scalar>(cfg: &CampaignConfig<T>) -> Result<CpaReport<T>> {
    let leakage = cfg.leakage()?;
    let mut a = Asm::new();
    a.crypto(CryptoOp::Saes64Encs, 3, 1, 2);
    let program = a.finish()?;
    let key_lo = u64::from_le_bytes(CPA_KEY[..8].try_into().unwrap());
    let key_hi = u64::from_le_bytes(CPA_KEY[8..].try_into().unwrap());
    let runs: Vec<(u8, Vec<T>)> = (0..cfg.n_traces)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed ^ i as u64;
            let mut r = derive_seed(seed, Stream::Input);
            let (pt_lo, pt_hi) = (r.next_u64(), r.next_u64());
            let inputs = [(Reg::x(1), pt_lo ^ key_lo), (Reg::x(2), pt_hi ^ key_hi)];
            let samples = capture(&program, &inputs, cfg.masked, cfg.policy, &leakage, seed)?;
            Ok((pt_lo as u8, samples))
        })
        .collect::<Result<_>>()?;
    let (inputs, traces): (Vec<u8>, Vec<Vec<T>>) = runs.into_iter().unzip();
    cpa(&traces, &inputs, sbox_hw, Some(CPA_KEY[0]))
}

/// TVLA on `saes64.encs` plus CPA; passes when neither finds leakage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakdownReport<T> {
    #[serde(flatten)]
    pub tvla: TvlaReport<T>,
    #[serde(flatten)]
    pub cpa: CpaReport<T>,
    pub leakdown: Verdict,
}

pub fn leakdown_campaign<T: Scalar>(cfg: &CampaignConfig<T>) -> Result<LeakdownReport<T>> {
    let tvla = tvla_campaign(CryptoOp::Saes64Encs, cfg)?;
    let cpa = cpa_campaign(cfg)?;
    let pass = tvla.verdict == Verdict::Pass && cpa.p_value > CPA_P_THRESHOLD;
    Ok(LeakdownReport { tvla, cpa, leakdown: if pass { Verdict::Pass } else { Verdict::Fail } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_masked_passes() {
        let cfg = CampaignConfig::new(100, true, 0.0, 3);
        let rep = tvla_campaign(CryptoOp::Saes64Encs, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "max |t| = {}", rep.max_abs_t);
    }

    #[test]
    fn noiseless_unmasked_fails_with_sentinel() {
        let cfg = CampaignConfig::new(100, false, 0.0, 3);
        let rep = tvla_campaign(CryptoOp::Saes64Encs, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.max_abs_t > 4.5);
    }

    #[test]
    fn t_csv_rows() {
        let rep = tvla_campaign(CryptoOp::Ssm3P0, &CampaignConfig::new(40, false, 1.0, 1)).unwrap();
        let mut buf = Vec::new();
        write_t_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + rep.t_values.len());
        assert!(text.starts_with("sample_index,t_value\n0,"));
    }

    #[test]
    fn small_cpa_is_deterministic() {
        let cfg = CampaignConfig::new(300, false, 2.0, 11);
        let a = cpa_campaign(&cfg).unwrap();
        let b = cpa_campaign(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(cpa_campaign(&CampaignConfig::new(2, false, 2.0, 11)).is_err());
    }
}
