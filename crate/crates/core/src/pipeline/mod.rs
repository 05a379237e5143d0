//! In-order six-stage core model: IF, ID, RR, EX, MEM, WB.

mod machine;
mod memory;
mod program;

pub use machine::{latency, run, ExecStats, Machine, PowerEvent, RawBus, Retired, RunOutput, DEFAULT_STEP_BUDGET};
pub use memory::{Memory, MEMORY_SIZE};
pub use program::{Asm, Program};
