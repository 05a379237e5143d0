use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse in GF(2^8)")]
    ZeroInverse,
    #[error("ring width mismatch: {0} vs {1} bits")]
    WidthMismatch(u32, u32),
    #[error("unsupported ring width {0} (expected 32 or 64)")]
    UnsupportedWidth(u32),
    #[error("illegal immediate {imm} for {op}")]
    IllegalImmediate { op: &'static str, imm: i64 },
    #[error("{op} {detail}")]
    MalformedInstruction { op: &'static str, detail: &'static str },
    #[error("register index {0} out of range")]
    BadRegister(u8),
    #[error("unknown instruction mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("expected {expected} bytes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("field lookup table: {0}")]
    BadLookupTable(String),
    #[error("mask policy: {0}")]
    BadPolicy(String),
    #[error("PRNG state must be nonzero")]
    ZeroPrngState,
    #[error("mask mode 00 selects no masking; the operand must bypass the MCU")]
    MaskingBypassed,
    #[error("masked operand violates its invariants: {0}")]
    CorruptedOperand(&'static str),
    #[error("memory access at {addr:#x} ({size} bytes) is out of range")]
    MemoryOutOfRange { addr: u64, size: usize },
    #[error("branch target {0} outside program")]
    BadBranchTarget(i64),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("program counter {0} is past the end of the program")]
    PcOutOfRange(usize),
    #[error("step budget of {0} instructions exhausted")]
    StepBudgetExhausted(u64),
    #[error("statistics: {0}")]
    Statistics(String),
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
}
