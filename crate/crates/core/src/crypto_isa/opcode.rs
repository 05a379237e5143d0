use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The 64-bit scalar cryptography instructions.
///
/// Canonical names use the `saes64.*`/`ssha*`/`ssm*` spelling; the ratified
/// `aes64es`-style mnemonics are accepted as aliases when parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CryptoOp {
    Saes64Encs,
    Saes64Encsm,
    Saes64Ds,
    Saes64Dsm,
    Saes64Im,
    Saes64Ks1,
    Saes64Ks2,
    Ssm4Ed,
    Ssm4Ks,
    Ssm3P0,
    Ssm3P1,
    Ssha256Sig0,
    Ssha256Sig1,
    Ssha256Sum0,
    Ssha256Sum1,
    Ssha512Sig0,
    Ssha512Sig1,
    Ssha512Sum0,
    Ssha512Sum1,
}

use CryptoOp::*;

impl CryptoOp {
    pub const ALL: [CryptoOp; 19] = [
        Saes64Encs,
        Saes64Encsm,
        Saes64Ds,
        Saes64Dsm,
        Saes64Im,
        Saes64Ks1,
        Saes64Ks2,
        Ssm4Ed,
        Ssm4Ks,
        Ssm3P0,
        Ssm3P1,
        Ssha256Sig0,
        Ssha256Sig1,
        Ssha256Sum0,
        Ssha256Sum1,
        Ssha512Sig0,
        Ssha512Sig1,
        Ssha512Sum0,
        Ssha512Sum1,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            Saes64Encs => "saes64.encs",
            Saes64Encsm => "saes64.encsm",
            Saes64Ds => "saes64.ds",
            Saes64Dsm => "saes64.dsm",
            Saes64Im => "saes64.im",
            Saes64Ks1 => "saes64.ks1",
            Saes64Ks2 => "saes64.ks2",
            Ssm4Ed => "ssm4.ed",
            Ssm4Ks => "ssm4.ks",
            Ssm3P0 => "ssm3.p0",
            Ssm3P1 => "ssm3.p1",
            Ssha256Sig0 => "ssha256.sig0",
            Ssha256Sig1 => "ssha256.sig1",
            Ssha256Sum0 => "ssha256.sum0",
            Ssha256Sum1 => "ssha256.sum1",
            Ssha512Sig0 => "ssha512.sig0",
            Ssha512Sig1 => "ssha512.sig1",
            Ssha512Sum0 => "ssha512.sum0",
            Ssha512Sum1 => "ssha512.sum1",
        }
    }

    /// Mnemonic in the ratified Zkn/Zks spelling.
    pub fn ratified_mnemonic(self) -> &'static str {
        match self {
            Saes64Encs => "aes64es",
            Saes64Encsm => "aes64esm",
            Saes64Ds => "aes64ds",
            Saes64Dsm => "aes64dsm",
            Saes64Im => "aes64im",
            Saes64Ks1 => "aes64ks1i",
            Saes64Ks2 => "aes64ks2",
            Ssm4Ed => "sm4ed",
            Ssm4Ks => "sm4ks",
            Ssm3P0 => "sm3p0",
            Ssm3P1 => "sm3p1",
            Ssha256Sig0 => "sha256sig0",
            Ssha256Sig1 => "sha256sig1",
            Ssha256Sum0 => "sha256sum0",
            Ssha256Sum1 => "sha256sum1",
            Ssha512Sig0 => "sha512sig0",
            Ssha512Sig1 => "sha512sig1",
            Ssha512Sum0 => "sha512sum0",
            Ssha512Sum1 => "sha512sum1",
        }
    }

    pub fn from_mnemonic(name: &str) -> Option<Self> {
        let name = name.trim().to_ascii_lowercase();
        let alias = match name.as_str() {
            "saes64.imix" => Some(Saes64Im),
            "saes64.ks11" => Some(Saes64Ks1),
            "saes64.decsm" => Some(Saes64Dsm),
            "sm4.ed" => Some(Ssm4Ed),
            "sm4.ks" => Some(Ssm4Ks),
            _ => None,
        };
        alias.or_else(|| Self::ALL.into_iter().find(|op| op.mnemonic() == name || op.ratified_mnemonic() == name))
    }

    /// Legal immediate range, for the two instruction groups that take one.
    pub fn imm_range(self) -> Option<RangeInclusive<i64>> {
        match self {
            Saes64Ks1 => Some(0..=10),
            Ssm4Ed | Ssm4Ks => Some(0..=3),
            _ => None,
        }
    }

    pub fn reads_rs2(self) -> bool {
        matches!(self, Saes64Encs | Saes64Encsm | Saes64Ds | Saes64Dsm | Saes64Ks2 | Ssm4Ed | Ssm4Ks)
    }

    /// Width of the architectural word the instruction computes on.
    pub fn word_bits(self) -> u32 {
        match self {
            Ssm4Ed | Ssm4Ks | Ssm3P0 | Ssm3P1 | Ssha256Sig0 | Ssha256Sig1 | Ssha256Sum0 | Ssha256Sum1 => 32,
            _ => 64,
        }
    }

    pub fn algorithm(self) -> &'static str {
        match self {
            Saes64Encs | Saes64Encsm | Saes64Ds | Saes64Dsm | Saes64Im | Saes64Ks1 | Saes64Ks2 => "AES",
            Ssm4Ed | Ssm4Ks => "SM4",
            Ssm3P0 | Ssm3P1 => "SM3",
            Ssha256Sig0 | Ssha256Sig1 | Ssha256Sum0 | Ssha256Sum1 => "SHA-256",
            Ssha512Sig0 | Ssha512Sig1 | Ssha512Sum0 | Ssha512Sum1 => "SHA-512",
        }
    }
}

impl fmt::Display for CryptoOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for CryptoOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Self::from_mnemonic(s).ok_or_else(|| Error::UnknownMnemonic(s.to_string()))
    }
}

/// How a base instruction uses its operand fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseForm {
    RegReg,
    RegImm,
    LoadImm,
    Load(usize),
    Store(usize),
    Branch,
}

/// Base-ISA operations: RV64I arithmetic, logic and memory access plus the
/// Zbkb rotates and `andn` that ship with the scalar crypto extension.
///
/// `*w` operations work on the low 32 bits and zero-extend their result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseOp {
    Add,
    Sub,
    Xor,
    And,
    Or,
    Andn,
    Sll,
    Srl,
    Sra,
    Addw,
    Sllw,
    Srlw,
    Ror,
    Rol,
    Rorw,
    Rolw,
    Addi,
    Xori,
    Andi,
    Ori,
    Slli,
    Srli,
    Srai,
    Slliw,
    Srliw,
    Rori,
    Roriw,
    Li,
    Ld,
    Lwu,
    Lbu,
    Sd,
    Sw,
    Sb,
    Beq,
    Bne,
    Bltu,
}

impl BaseOp {
    pub fn mnemonic(self) -> &'static str {
        use BaseOp::*;
        match self {
            Add => "add",
            Sub => "sub",
            Xor => "xor",
            And => "and",
            Or => "or",
            Andn => "andn",
            Sll => "sll",
            Srl => "srl",
            Sra => "sra",
            Addw => "addw",
            Sllw => "sllw",
            Srlw => "srlw",
            Ror => "ror",
            Rol => "rol",
            Rorw => "rorw",
            Rolw => "rolw",
            Addi => "addi",
            Xori => "xori",
            Andi => "andi",
            Ori => "ori",
            Slli => "slli",
            Srli => "srli",
            Srai => "srai",
            Slliw => "slliw",
            Srliw => "srliw",
            Rori => "rori",
            Roriw => "roriw",
            Li => "li",
            Ld => "ld",
            Lwu => "lwu",
            Lbu => "lbu",
            Sd => "sd",
            Sw => "sw",
            Sb => "sb",
            Beq => "beq",
            Bne => "bne",
            Bltu => "bltu",
        }
    }

    pub fn form(self) -> BaseForm {
        use BaseOp::*;
        match self {
            Add | Sub | Xor | And | Or | Andn | Sll | Srl | Sra | Addw | Sllw | Srlw | Ror | Rol | Rorw | Rolw => {
                BaseForm::RegReg
            }
            Addi | Xori | Andi | Ori | Slli | Srli | Srai | Slliw | Srliw | Rori | Roriw => BaseForm::RegImm,
            Li => BaseForm::LoadImm,
            Ld => BaseForm::Load(8),
            Lwu => BaseForm::Load(4),
            Lbu => BaseForm::Load(1),
            Sd => BaseForm::Store(8),
            Sw => BaseForm::Store(4),
            Sb => BaseForm::Store(1),
            Beq | Bne | Bltu => BaseForm::Branch,
        }
    }

    /// Legal range of a shift/rotate immediate.
    pub fn shamt_range(self) -> Option<RangeInclusive<i64>> {
        use BaseOp::*;
        match self {
            Slli | Srli | Srai | Rori => Some(0..=63),
            Slliw | Srliw | Roriw => Some(0..=31),
            _ => None,
        }
    }
}

impl fmt::Display for BaseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opcode {
    Crypto(CryptoOp),
    Base(BaseOp),
}

impl Opcode {
    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Crypto(op) => op.mnemonic(),
            Opcode::Base(op) => op.mnemonic(),
        }
    }

    pub fn is_crypto(self) -> bool {
        matches!(self, Opcode::Crypto(_))
    }
}

impl From<CryptoOp> for Opcode {
    fn from(op: CryptoOp) -> Self {
        Opcode::Crypto(op)
    }
}

impl From<BaseOp> for Opcode {
    fn from(op: BaseOp) -> Self {
        Opcode::Base(op)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}
