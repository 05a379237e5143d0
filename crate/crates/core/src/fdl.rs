//! Decode-stage field detection: opcode → field tag → masking metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::crypto_isa::{CryptoOp, Opcode};
use crate::error::{Error, Result};

const STANDARD_LUT: &str = include_str!("../data/fdl.lut");

/// Environment variable naming a policy override file.
pub const POLICY_ENV: &str = "CRYPTRISC_POLICY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "FIELD_GF2")]
    Gf2,
    #[serde(rename = "FIELD_GF2N")]
    Gf2n,
    #[serde(rename = "FIELD_Z2N")]
    Z2n,
    #[serde(rename = "DEFAULT")]
    Default,
}

impl FieldTag {
    pub const ALL: [FieldTag; 4] = [FieldTag::Gf2, FieldTag::Gf2n, FieldTag::Z2n, FieldTag::Default];

    pub fn name(self) -> &'static str {
        match self {
            FieldTag::Gf2 => "FIELD_GF2",
            FieldTag::Gf2n => "FIELD_GF2N",
            FieldTag::Z2n => "FIELD_Z2N",
            FieldTag::Default => "DEFAULT",
        }
    }

    pub fn mask_mode(self) -> MaskMode {
        match self {
            FieldTag::Gf2 => MaskMode::Boolean,
            FieldTag::Gf2n => MaskMode::Affine,
            FieldTag::Z2n => MaskMode::Arithmetic,
            FieldTag::Default => MaskMode::None,
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldTag::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::BadLookupTable(format!("unknown field tag `{s}`")))
    }
}

/// Two-bit MASK_MODE code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskMode {
    None,
    Boolean,
    /// Affine or multiplicative masking over GF(2^8) lanes.
    Affine,
    Arithmetic,
}

impl MaskMode {
    pub fn bits(self) -> u8 {
        match self {
            MaskMode::None => 0b00,
            MaskMode::Boolean => 0b01,
            MaskMode::Affine => 0b10,
            MaskMode::Arithmetic => 0b11,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            0b00 => Some(MaskMode::None),
            0b01 => Some(MaskMode::Boolean),
            0b10 => Some(MaskMode::Affine),
            0b11 => Some(MaskMode::Arithmetic),
            _ => None,
        }
    }
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.bits())
    }
}

/// Metadata attached to a decoded instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskMetadata {
    pub mode: MaskMode,
    /// Number of random shares; 0 means unmasked.
    pub shares: u8,
}

impl MaskMetadata {
    pub const NONE: MaskMetadata = MaskMetadata { mode: MaskMode::None, shares: 0 };

    pub fn is_masked(self) -> bool {
        self.mode != MaskMode::None
    }
}

/// Share count per field tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPolicy {
    gf2: u8,
    gf2n: u8,
    z2n: u8,
}

impl Default for MaskPolicy {
    fn default() -> Self {
        MaskPolicy { gf2: 1, gf2n: 1, z2n: 1 }
    }
}

impl MaskPolicy {
    /// The same share count for every tag.
    pub fn uniform(shares: u8) -> Result<Self> {
        MaskPolicy::default()
            .with_shares(FieldTag::Gf2, shares)?
            .with_shares(FieldTag::Gf2n, shares)?
            .with_shares(FieldTag::Z2n, shares)
    }

    pub fn with_shares(mut self, tag: FieldTag, shares: u8) -> Result<Self> {
        if !(1..=3).contains(&shares) {
            return Err(Error::BadPolicy(format!("{tag}: share count {shares} outside 1..=3")));
        }
        match tag {
            FieldTag::Gf2 => self.gf2 = shares,
            FieldTag::Gf2n => self.gf2n = shares,
            FieldTag::Z2n => self.z2n = shares,
            FieldTag::Default => return Err(Error::BadPolicy("DEFAULT is never masked".into())),
        }
        Ok(self)
    }

    pub fn shares(&self, tag: FieldTag) -> u8 {
        match tag {
            FieldTag::Gf2 => self.gf2,
            FieldTag::Gf2n => self.gf2n,
            FieldTag::Z2n => self.z2n,
            FieldTag::Default => 0,
        }
    }

    /// Parse `KEY=VALUE` lines; `#` starts a comment. Unlisted tags keep one share.
    pub fn parse(text: &str) -> Result<Self> {
        let mut policy = MaskPolicy::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::BadPolicy(format!("line {}: expected KEY=VALUE", n + 1)))?;
            let tag: FieldTag = key
                .trim()
                .parse()
                .map_err(|_| Error::BadPolicy(format!("line {}: unknown key `{}`", n + 1, key.trim())))?;
            let shares: u8 = value
                .trim()
                .parse()
                .map_err(|_| Error::BadPolicy(format!("line {}: bad share count `{}`", n + 1, value.trim())))?;
            policy = policy.with_shares(tag, shares)?;
        }
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::BadPolicy(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Policy from the file named by `CRYPTRISC_POLICY`, or the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(POLICY_ENV) {
            Some(path) if !path.is_empty() => Self::load(Path::new(&path)),
            _ => Ok(Self::default()),
        }
    }
}

/// The opcode → tag lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDetector {
    table: BTreeMap<CryptoOp, FieldTag>,
}

impl FieldDetector {
    /// Build from LUT text: `mnemonic TAG` per line, `#` comments.
    /// Every crypto opcode must be listed exactly once.
    pub fn from_lut(text: &str) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(tag), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::BadLookupTable(format!("line {}: expected `opcode TAG`", n + 1)));
            };
            let op = CryptoOp::from_mnemonic(name)
                .ok_or_else(|| Error::BadLookupTable(format!("line {}: unknown opcode `{name}`", n + 1)))?;
            let tag: FieldTag = tag.parse()?;
            if table.insert(op, tag).is_some() {
                return Err(Error::BadLookupTable(format!("line {}: `{op}` listed twice", n + 1)));
            }
        }
        if let Some(missing) = CryptoOp::ALL.into_iter().find(|op| !table.contains_key(op)) {
            return Err(Error::BadLookupTable(format!("`{missing}` has no entry")));
        }
        Ok(FieldDetector { table })
    }

    /// The built-in table.
    pub fn standard() -> &'static FieldDetector {
        static STANDARD: OnceLock<FieldDetector> = OnceLock::new();
        STANDARD.get_or_init(|| FieldDetector::from_lut(STANDARD_LUT).expect("built-in LUT is valid"))
    }

    pub fn classify(&self, op: Opcode) -> FieldTag {
        match op {
            Opcode::Crypto(c) => self.table[&c],
            Opcode::Base(_) => FieldTag::Default,
        }
    }
}

pub fn classify(op: Opcode) -> FieldTag {
    FieldDetector::standard().classify(op)
}

pub fn derive_metadata(tag: FieldTag, policy: &MaskPolicy) -> MaskMetadata {
    MaskMetadata { mode: tag.mask_mode(), shares: policy.shares(tag) }
}
