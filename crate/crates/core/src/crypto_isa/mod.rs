//! Instruction set: opcodes, decoded instructions and their semantics.

mod compose;
mod instruction;
mod opcode;
mod semantics;

pub use compose::{
    aes_decrypt, aes_encrypt, aes_round_keys, compose_aes128, compose_sha256, compose_sha512, compose_sm3, compose_sm4,
    compose_sm4_decrypt, sm4_round_keys,
};
pub use instruction::{Instruction, Reg};
pub use opcode::{BaseForm, BaseOp, CryptoOp, Opcode};
pub use semantics::{exec_base, exec_crypto, Word64};
pub use semantics::{inv_mix_columns, mix_columns};
