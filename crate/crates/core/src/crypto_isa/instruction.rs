use std::fmt;

use crate::error::{Error, Result};

use super::opcode::{BaseForm, Opcode};

/// Architectural register index, `x0`..`x31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Reg(u8);

impl Reg {
    pub const ZERO: Reg = Reg(0);

    pub fn new(index: u8) -> Result<Self> {
        if index < 32 {
            Ok(Reg(index))
        } else {
            Err(Error::BadRegister(index))
        }
    }

    /// Panics on an out-of-range index; for statically known registers.
    pub const fn x(index: u8) -> Self {
        assert!(index < 32);
        Reg(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A decoded instruction. Binary encodings are not modelled.
///
/// `imm` carries the round-constant index for `saes64.ks1`, the byte select
/// for `ssm4.*`, shift amounts and offsets for base operations, and the
/// resolved target index for branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub rd: Reg,
    pub rs1: Reg,
    pub rs2: Reg,
    pub imm: Option<i64>,
}

impl Instruction {
    pub fn new(opcode: Opcode, rd: Reg, rs1: Reg, rs2: Reg, imm: Option<i64>) -> Result<Self> {
        let name = opcode.mnemonic();
        let needs_imm = match opcode {
            Opcode::Crypto(op) => op.imm_range().is_some(),
            Opcode::Base(op) => op.form() != BaseForm::RegReg,
        };
        match (needs_imm, imm) {
            (true, None) => return Err(Error::MalformedInstruction { op: name, detail: "requires an immediate" }),
            (false, Some(_)) => return Err(Error::MalformedInstruction { op: name, detail: "takes no immediate" }),
            _ => {}
        }
        if let Some(imm) = imm {
            let range = match opcode {
                Opcode::Crypto(op) => op.imm_range(),
                Opcode::Base(op) => op.shamt_range(),
            };
            if let Some(range) = range {
                if !range.contains(&imm) {
                    return Err(Error::IllegalImmediate { op: name, imm });
                }
            }
        }
        Ok(Instruction { opcode, rd, rs1, rs2, imm })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}, {}, {}", self.opcode, self.rd, self.rs1, self.rs2)?;
        if let Some(imm) = self.imm {
            write!(f, ", {imm}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto_isa::{BaseOp, CryptoOp};

    #[test]
    fn register_bounds() {
        assert!(Reg::new(31).is_ok());
        assert_eq!(Reg::new(32), Err(Error::BadRegister(32)));
    }

    #[test]
    fn immediate_presence_is_checked() {
        let r = Reg::x(1);
        assert!(Instruction::new(CryptoOp::Saes64Ks1.into(), r, r, r, None).is_err());
        assert!(Instruction::new(CryptoOp::Saes64Encs.into(), r, r, r, Some(0)).is_err());
        assert!(Instruction::new(CryptoOp::Saes64Ks1.into(), r, r, r, Some(10)).is_ok());
        assert_eq!(
            Instruction::new(CryptoOp::Saes64Ks1.into(), r, r, r, Some(11)),
            Err(Error::IllegalImmediate { op: "saes64.ks1", imm: 11 })
        );
        assert!(Instruction::new(CryptoOp::Ssm4Ed.into(), r, r, r, Some(4)).is_err());
        assert!(Instruction::new(BaseOp::Add.into(), r, r, r, None).is_ok());
        assert!(Instruction::new(BaseOp::Slliw.into(), r, r, r, Some(32)).is_err());
        assert!(Instruction::new(BaseOp::Li.into(), r, r, r, Some(-1)).is_ok());
    }
}
