//! Cycle-level model of a RISC-V core with scalar cryptography instructions,
//! field-aware operand masking, synthetic power traces and leakage tests.

pub mod bench;
pub mod crypto_isa;
pub mod error;
pub mod fdl;
pub mod fields;
pub mod mcu;
pub mod pipeline;
pub mod power;
pub mod reference;
pub mod sca;
pub mod scalar;
pub mod selftest;
pub mod tables;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision instantiations used by the command-line front end.
pub type Trace64 = power::Trace<f64>;
pub type LeakageConfig64 = power::LeakageConfig<f64>;
pub type CampaignConfig64 = sca::CampaignConfig<f64>;
pub type TvlaReport64 = sca::TvlaReport<f64>;
pub type CpaReport64 = sca::CpaReport<f64>;
