//! Leakage evaluation: fixed-vs-random Welch t-tests and correlation power analysis.

mod campaign;
mod cpa;
mod welch;

pub use campaign::{
    cpa_campaign, leakdown_campaign, tvla_campaign, write_t_csv, CampaignConfig, LeakdownReport, TvlaReport, Verdict,
    CPA_KEY, CPA_P_THRESHOLD, TVLA_THRESHOLD,
};
pub use cpa::{cpa, fisher_p_value, pearson, sbox_hw, sidak, CpaReport, CHECKPOINT_STEP};
pub use welch::{welch_t, welch_t_column};
