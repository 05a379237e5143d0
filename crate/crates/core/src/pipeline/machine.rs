use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto_isa::{exec_base, exec_crypto, BaseForm, CryptoOp, Instruction, Opcode, Reg};
use crate::error::{Error, Result};
use crate::fdl::{derive_metadata, FieldDetector, MaskMetadata, MaskPolicy};
use crate::mcu::{domain_width_for, mask, unmask, PrngState};

use super::memory::Memory;
use super::program::Program;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Cycles an instruction occupies: memory access takes two, everything else one.
pub fn latency(opcode: Opcode) -> u64 {
    match opcode {
        Opcode::Base(op) if matches!(op.form(), BaseForm::Load(_) | BaseForm::Store(_)) => 2,
        _ => 1,
    }
}

/// Values on the operand and result buses during EX for one instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerEvent {
    pub cycle: u64,
    pub op1: u64,
    pub op2: u64,
    pub result: u64,
    pub prev_rd: u64,
}

/// Unmasked operands and result, for instrumentation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawBus {
    pub op1: u64,
    pub op2: u64,
    pub result: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Retired {
    pub instruction: Instruction,
    pub meta: MaskMetadata,
    pub event: PowerEvent,
    pub raw: RawBus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    pub cycles: u64,
    pub instret: u64,
    pub histogram: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct Machine {
    regs: [u64; 32],
    mem: Memory,
    pc: usize,
    cycle_count: u64,
    instret: u64,
    masking: bool,
    policy: MaskPolicy,
    prng: PrngState,
    detector: &'static FieldDetector,
    histogram: BTreeMap<Opcode, u64>,
}

impl Machine {
    pub fn new(masking: bool, policy: MaskPolicy, prng: PrngState) -> Self {
        Machine {
            regs: [0; 32],
            mem: Memory::new(),
            pc: 0,
            cycle_count: 0,
            instret: 0,
            masking,
            policy,
            prng,
            detector: FieldDetector::standard(),
            histogram: BTreeMap::new(),
        }
    }

    pub fn reg(&self, r: Reg) -> u64 {
        self.regs[r.index()]
    }

    pub fn regs(&self) -> &[u64; 32] {
        &self.regs
    }

    pub fn set_reg(&mut self, r: Reg, value: u64) {
        if r != Reg::ZERO {
            self.regs[r.index()] = value;
        }
    }

    pub fn memory(&self) -> &Memory {
        &self.mem
    }

    pub fn memory_mut(&mut self) -> &mut Memory {
        &mut self.mem
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn cycle_count(&self) -> u64 {
        self.cycle_count
    }

    pub fn instret(&self) -> u64 {
        self.instret
    }

    pub fn masking_enabled(&self) -> bool {
        self.masking
    }

    pub fn stats(&self) -> ExecStats {
        ExecStats {
            cycles: self.cycle_count,
            instret: self.instret,
            histogram: self.histogram.iter().map(|(op, &n)| (op.mnemonic().to_string(), n)).collect(),
        }
    }

    /// Retire one instruction.
    pub fn step(&mut self, program: &Program) -> Result<Retired> {
        // IF
        let instr = *program.instructions().get(self.pc).ok_or(Error::PcOutOfRange(self.pc))?;
        // ID: field tag and masking metadata.
        let meta = match instr.opcode {
            Opcode::Crypto(_) if self.masking => derive_metadata(self.detector.classify(instr.opcode), &self.policy),
            _ => MaskMetadata::NONE,
        };
        // RR
        let a = self.regs[instr.rs1.index()];
        let b = self.regs[instr.rs2.index()];
        let prev_rd = self.regs[instr.rd.index()];
        let mut next_pc = self.pc + 1;
        let (event, raw, writeback) = match instr.opcode {
            Opcode::Crypto(op) => self.execute_crypto(op, &instr, meta, a, b, prev_rd)?,
            Opcode::Base(op) => {
                let imm = instr.imm.unwrap_or(0) as u64;
                match op.form() {
                    BaseForm::RegReg => {
                        let r = exec_base(op, a, b);
                        (bus(a, b, r, prev_rd), RawBus { op1: a, op2: b, result: r }, Some(r))
                    }
                    BaseForm::RegImm | BaseForm::LoadImm => {
                        let r = exec_base(op, a, imm);
                        (bus(a, imm, r, prev_rd), RawBus { op1: a, op2: imm, result: r }, Some(r))
                    }
                    // EX computes the address, MEM accesses it.
                    BaseForm::Load(size) => {
                        let addr = exec_base(op, a, imm);
                        let v = self.mem.load(addr, size)?;
                        (bus(addr, 0, v, prev_rd), RawBus { op1: addr, op2: 0, result: v }, Some(v))
                    }
                    BaseForm::Store(size) => {
                        let addr = exec_base(op, a, imm);
                        self.mem.store(addr, size, b)?;
                        (bus(addr, b, 0, 0), RawBus { op1: addr, op2: b, result: 0 }, None)
                    }
                    BaseForm::Branch => {
                        let taken = exec_base(op, a, b);
                        if taken == 1 {
                            next_pc = imm as usize;
                        }
                        (bus(a, b, taken, 0), RawBus { op1: a, op2: b, result: taken }, None)
                    }
                }
            }
        };
        // WB
        if let Some(v) = writeback {
            self.set_reg(instr.rd, v);
        }
        let event = PowerEvent { cycle: self.cycle_count, ..event };
        self.cycle_count += latency(instr.opcode);
        self.instret += 1;
        *self.histogram.entry(instr.opcode).or_default() += 1;
        self.pc = next_pc;
        Ok(Retired { instruction: instr, meta, event, raw })
    }

    fn execute_crypto(
        &mut self,
        op: CryptoOp,
        instr: &Instruction,
        meta: MaskMetadata,
        a: u64,
        b: u64,
        prev_rd: u64,
    ) -> Result<(PowerEvent, RawBus, Option<u64>)> {
        let b = if op.reads_rs2() { b } else { 0 };
        if !meta.is_masked() {
            let r = exec_crypto(op, a, b, instr.imm)?;
            return Ok((bus(a, b, r, prev_rd), RawBus { op1: a, op2: b, result: r }, Some(r)));
        }
        let width = domain_width_for(meta.mode, op.word_bits());
        // Operand masking overlaps register read; no extra cycle.
        let m1 = mask(a, meta, width, &mut self.prng)?;
        let m2 = mask(b, meta, width, &mut self.prng)?;
        // CFU: the unmasked values exist only inside the unit.
        let r = exec_crypto(op, unmask(&m1)?, unmask(&m2)?, instr.imm)?;
        let mr = mask(r, meta, width, &mut self.prng)?;
        let event = bus(m1.bus_value(), m2.bus_value(), mr.bus_value(), prev_rd);
        // Shares are recombined before write-back.
        let wb = unmask(&mr)?;
        Ok((event, RawBus { op1: a, op2: b, result: r }, Some(wb)))
    }

    /// Run to the end of the program, calling `observe` for each retired instruction.
    pub fn run_with(&mut self, program: &Program, budget: u64, mut observe: impl FnMut(&Retired)) -> Result<()> {
        let mut steps = 0;
        while self.pc < program.len() {
            if steps == budget {
                return Err(Error::StepBudgetExhausted(budget));
            }
            let retired = self.step(program)?;
            observe(&retired);
            steps += 1;
        }
        Ok(())
    }
}

fn bus(op1: u64, op2: u64, result: u64, prev_rd: u64) -> PowerEvent {
    PowerEvent { cycle: 0, op1, op2, result, prev_rd }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub regs: [u64; 32],
    pub stats: ExecStats,
    pub events: Vec<PowerEvent>,
}

/// Run `program` on a fresh machine with the given register inputs.
pub fn run(program: &Program, inputs: &[(Reg, u64)], masking: bool, seed: u64) -> Result<RunOutput> {
    let mut m = Machine::new(masking, MaskPolicy::default(), PrngState::new(seed)?);
    for &(r, v) in inputs {
        m.set_reg(r, v);
    }
    let mut events = Vec::new();
    m.run_with(program, DEFAULT_STEP_BUDGET, |r| events.push(r.event))?;
    Ok(RunOutput { regs: m.regs, stats: m.stats(), events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto_isa::BaseOp;
    use crate::pipeline::Asm;

    #[test]
    fn add_program() {
        let mut a = Asm::new();
        a.li(1, 5).li(2, 7).rr(BaseOp::Add, 3, 1, 2);
        let out = run(&a.finish().unwrap(), &[], false, 1).unwrap();
        assert_eq!(out.regs[3], 12);
        assert_eq!(out.stats.instret, 3);
        assert_eq!(out.stats.cycles, 3);
    }

    #[test]
    fn empty_program() {
        let out = run(&Program::default(), &[], true, 1).unwrap();
        assert_eq!((out.stats.instret, out.stats.cycles), (0, 0));
        assert!(out.events.is_empty());
    }

    #[test]
    fn x0_stays_zero() {
        let mut a = Asm::new();
        a.li(0, 9).ri(BaseOp::Addi, 0, 0, 1);
        let out = run(&a.finish().unwrap(), &[], false, 1).unwrap();
        assert_eq!(out.regs[0], 0);
    }

    #[test]
    fn memory_latency_and_values() {
        let mut a = Asm::new();
        a.li(1, 0x100).li(2, 0x1122_3344_5566_7788).store(BaseOp::Sd, 2, 1, 8).load(BaseOp::Lwu, 3, 1, 12);
        let out = run(&a.finish().unwrap(), &[], false, 1).unwrap();
        assert_eq!(out.regs[3], 0x1122_3344);
        assert_eq!(out.stats.cycles, 6);
        assert_eq!(out.events[3].op1, 0x10c);
        assert_eq!(out.events[3].result, 0x1122_3344);
        assert_eq!(out.events[3].cycle, 4);
    }

    #[test]
    fn out_of_range_access() {
        let mut a = Asm::new();
        a.li(1, 1 << 20).load(BaseOp::Ld, 2, 1, 0);
        assert!(matches!(run(&a.finish().unwrap(), &[], false, 1), Err(Error::MemoryOutOfRange { .. })));
    }

    #[test]
    fn loop_and_budget() {
        let mut a = Asm::new();
        a.li(1, 10).label("l").ri(BaseOp::Addi, 2, 2, 3).ri(BaseOp::Addi, 1, 1, -1).branch(BaseOp::Bne, 1, 0, "l");
        let p = a.finish().unwrap();
        assert_eq!(run(&p, &[], false, 1).unwrap().regs[2], 30);
        let mut spin = Asm::new();
        spin.label("s").branch(BaseOp::Beq, 0, 0, "s");
        let mut m = Machine::new(false, MaskPolicy::default(), PrngState::new(1).unwrap());
        assert_eq!(m.run_with(&spin.finish().unwrap(), 100, |_| {}), Err(Error::StepBudgetExhausted(100)));
    }

    #[test]
    fn crypto_masking_is_transparent_and_free() {
        let mut a = Asm::new();
        a.crypto(CryptoOp::Saes64Encs, 3, 1, 2)
            .crypto(CryptoOp::Ssha256Sum0, 4, 3, 0)
            .crypto_imm(CryptoOp::Ssm4Ed, 5, 4, 1, 2)
            .crypto(CryptoOp::Ssm3P0, 6, 5, 0);
        let p = a.finish().unwrap();
        let inputs = [(Reg::x(1), 0x0123_4567_89ab_cdef), (Reg::x(2), 0xfedc_ba98_7654_3210)];
        let plain = run(&p, &inputs, false, 7).unwrap();
        let masked = run(&p, &inputs, true, 7).unwrap();
        assert_eq!(plain.regs, masked.regs);
        assert_eq!(plain.stats, masked.stats);
        assert_eq!(masked.stats.cycles, 4);
        assert_ne!(plain.events, masked.events);
        assert_eq!(masked.events, run(&p, &inputs, true, 7).unwrap().events);
    }

    #[test]
    fn histogram_counts() {
        let mut a = Asm::new();
        a.li(1, 1).li(2, 2).crypto(CryptoOp::Ssha512Sig0, 3, 1, 0);
        let s = run(&a.finish().unwrap(), &[], true, 3).unwrap().stats;
        assert_eq!(s.histogram["li"], 2);
        assert_eq!(s.histogram["ssha512.sig0"], 1);
    }
}
