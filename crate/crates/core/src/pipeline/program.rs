use std::collections::HashMap;

use crate::crypto_isa::{BaseForm, BaseOp, CryptoOp, Instruction, Opcode, Reg};
use crate::error::{Error, Result};

/// A straight list of instructions; branch immediates are absolute
/// instruction indices. Execution halts when the pc reaches the end.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    instrs: Vec<Instruction>,
}

impl Program {
    pub fn new(instrs: Vec<Instruction>) -> Result<Self> {
        for i in &instrs {
            if let Opcode::Base(op) = i.opcode {
                if op.form() == BaseForm::Branch {
                    let target = i.imm.unwrap_or(-1);
                    if target < 0 || target as usize > instrs.len() {
                        return Err(Error::BadBranchTarget(target));
                    }
                }
            }
        }
        Ok(Program { instrs })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }
}

enum Pending {
    Ready(Instruction),
    Branch { op: BaseOp, rs1: Reg, rs2: Reg, label: String },
}

/// Program builder with labels. Errors are deferred to [`Asm::finish`].
#[derive(Default)]
pub struct Asm {
    items: Vec<Pending>,
    labels: HashMap<String, usize>,
    error: Option<Error>,
}

impl Asm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn fail(&mut self, e: Error) {
        self.error.get_or_insert(e);
    }

    fn reg(&mut self, r: u8) -> Reg {
        Reg::new(r).unwrap_or_else(|e| {
            self.fail(e);
            Reg::ZERO
        })
    }

    fn push(&mut self, opcode: Opcode, rd: u8, rs1: u8, rs2: u8, imm: Option<i64>) -> &mut Self {
        let (rd, rs1, rs2) = (self.reg(rd), self.reg(rs1), self.reg(rs2));
        match Instruction::new(opcode, rd, rs1, rs2, imm) {
            Ok(i) => self.items.push(Pending::Ready(i)),
            Err(e) => self.fail(e),
        }
        self
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        if self.labels.insert(name.to_string(), self.items.len()).is_some() {
            self.fail(Error::MalformedInstruction { op: "label", detail: "defined twice" });
        }
        self
    }

    pub fn rr(&mut self, op: BaseOp, rd: u8, rs1: u8, rs2: u8) -> &mut Self {
        self.push(op.into(), rd, rs1, rs2, None)
    }

    pub fn ri(&mut self, op: BaseOp, rd: u8, rs1: u8, imm: i64) -> &mut Self {
        self.push(op.into(), rd, rs1, 0, Some(imm))
    }

    pub fn li(&mut self, rd: u8, value: u64) -> &mut Self {
        self.push(BaseOp::Li.into(), rd, 0, 0, Some(value as i64))
    }

    /// `op rd, offset(base)`
    pub fn load(&mut self, op: BaseOp, rd: u8, base: u8, offset: i64) -> &mut Self {
        self.push(op.into(), rd, base, 0, Some(offset))
    }

    /// `op src, offset(base)`
    pub fn store(&mut self, op: BaseOp, src: u8, base: u8, offset: i64) -> &mut Self {
        self.push(op.into(), 0, base, src, Some(offset))
    }

    pub fn branch(&mut self, op: BaseOp, rs1: u8, rs2: u8, label: &str) -> &mut Self {
        let (rs1, rs2) = (self.reg(rs1), self.reg(rs2));
        self.items.push(Pending::Branch { op, rs1, rs2, label: label.to_string() });
        self
    }

    pub fn crypto(&mut self, op: CryptoOp, rd: u8, rs1: u8, rs2: u8) -> &mut Self {
        self.push(op.into(), rd, rs1, rs2, None)
    }

    pub fn crypto_imm(&mut self, op: CryptoOp, rd: u8, rs1: u8, rs2: u8, imm: i64) -> &mut Self {
        self.push(op.into(), rd, rs1, rs2, Some(imm))
    }

    pub fn finish(self) -> Result<Program> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let mut instrs = Vec::with_capacity(self.items.len());
        for item in self.items {
            let i = match item {
                Pending::Ready(i) => i,
                Pending::Branch { op, rs1, rs2, label } => {
                    let target = *self.labels.get(&label).ok_or(Error::UndefinedLabel(label))?;
                    Instruction::new(op.into(), Reg::ZERO, rs1, rs2, Some(target as i64))?
                }
            };
            instrs.push(i);
        }
        Program::new(instrs)
    }
}
