//! Bit-level semantics of the crypto instructions and base ALU operations.

use crate::error::{Error, Result};
use crate::fields::gf_mul;
use crate::tables::{AES_INV_SBOX, AES_RCON, AES_SBOX, SM4_SBOX};

use super::opcode::{BaseOp, CryptoOp};

/// 64-bit architectural value.
pub type Word64 = u64;

fn state_bytes(lo: u64, hi: u64) -> [u8; 16] {
    let mut s = [0u8; 16];
    s[..8].copy_from_slice(&lo.to_le_bytes());
    s[8..].copy_from_slice(&hi.to_le_bytes());
    s
}

// The 128-bit state is column-major: byte (row r, column c) sits at
// index r + 4c, columns 0-1 in the first operand and 2-3 in the second.
fn shift_rows_lo(lo: u64, hi: u64, inverse: bool) -> u64 {
    let s = state_bytes(lo, hi);
    let mut out = [0u8; 8];
    for (j, byte) in out.iter_mut().enumerate() {
        let (r, c) = (j % 4, j / 4);
        let src_col = if inverse { (c + 4 - r) % 4 } else { (c + r) % 4 };
        *byte = s[r + 4 * src_col];
    }
    u64::from_le_bytes(out)
}

fn sub_bytes(x: u64, table: &[u8; 256]) -> u64 {
    u64::from_le_bytes(x.to_le_bytes().map(|b| table[b as usize]))
}

fn mix_column(col: u32, coeffs: [u8; 4]) -> u32 {
    let a = col.to_le_bytes();
    let mut out = [0u8; 4];
    for (r, byte) in out.iter_mut().enumerate() {
        for k in 0..4 {
            *byte ^= gf_mul(coeffs[(k + 4 - r) % 4], a[k]);
        }
    }
    u32::from_le_bytes(out)
}

/// MixColumns on the two state columns packed in a 64-bit word.
pub fn mix_columns(x: u64) -> u64 {
    let c = [2, 3, 1, 1];
    (mix_column(x as u32, c) as u64) | (mix_column((x >> 32) as u32, c) as u64) << 32
}

pub fn inv_mix_columns(x: u64) -> u64 {
    let c = [0x0e, 0x0b, 0x0d, 0x09];
    (mix_column(x as u32, c) as u64) | (mix_column((x >> 32) as u32, c) as u64) << 32
}

fn sub_word(w: u32) -> u32 {
    u32::from_le_bytes(w.to_le_bytes().map(|b| AES_SBOX[b as usize]))
}

fn sm4_sbox_byte(x: u32, bs: u32) -> u32 {
    SM4_SBOX[((x >> (8 * bs)) & 0xff) as usize] as u32
}

fn sm4_linear(b: u32) -> u32 {
    b ^ b.rotate_left(2) ^ b.rotate_left(10) ^ b.rotate_left(18) ^ b.rotate_left(24)
}

fn sm4_linear_key(b: u32) -> u32 {
    b ^ b.rotate_left(13) ^ b.rotate_left(23)
}

fn check_imm(op: CryptoOp, imm: Option<i64>) -> Result<i64> {
    let range = op.imm_range().expect("caller checked");
    match imm {
        Some(v) if range.contains(&v) => Ok(v),
        Some(v) => Err(Error::IllegalImmediate { op: op.mnemonic(), imm: v }),
        None => Err(Error::MalformedInstruction { op: op.mnemonic(), detail: "requires an immediate" }),
    }
}

/// Architectural result of a crypto instruction.
///
/// 32-bit instructions read the low word of their operands and zero-extend
/// the result into the 64-bit destination.
pub fn exec_crypto(op: CryptoOp, rs1: Word64, rs2: Word64, imm: Option<i64>) -> Result<Word64> {
    use CryptoOp::*;
    if op.imm_range().is_none() && imm.is_some() {
        return Err(Error::MalformedInstruction { op: op.mnemonic(), detail: "takes no immediate" });
    }
    let lo32 = rs1 as u32;
    let r = match op {
        Saes64Encs => sub_bytes(shift_rows_lo(rs1, rs2, false), &AES_SBOX),
        Saes64Encsm => mix_columns(sub_bytes(shift_rows_lo(rs1, rs2, false), &AES_SBOX)),
        Saes64Ds => sub_bytes(shift_rows_lo(rs1, rs2, true), &AES_INV_SBOX),
        Saes64Dsm => inv_mix_columns(sub_bytes(shift_rows_lo(rs1, rs2, true), &AES_INV_SBOX)),
        Saes64Im => inv_mix_columns(rs1),
        Saes64Ks1 => {
            let rnum = check_imm(op, imm)? as usize;
            let hi = (rs1 >> 32) as u32;
            let (rotated, rc) = if rnum == 10 { (hi, 0) } else { (hi.rotate_right(8), AES_RCON[rnum] as u32) };
            let w = (sub_word(rotated) ^ rc) as u64;
            w << 32 | w
        }
        Saes64Ks2 => {
            let w0 = ((rs1 >> 32) as u32) ^ (rs2 as u32);
            let w1 = w0 ^ ((rs2 >> 32) as u32);
            (w1 as u64) << 32 | w0 as u64
        }
        Ssm4Ed | Ssm4Ks => {
            let bs = check_imm(op, imm)? as u32;
            let x = sm4_sbox_byte(rs2 as u32, bs);
            let y = if op == Ssm4Ed { sm4_linear(x) } else { sm4_linear_key(x) };
            (lo32 ^ y.rotate_left(8 * bs)) as u64
        }
        Ssm3P0 => (lo32 ^ lo32.rotate_left(9) ^ lo32.rotate_left(17)) as u64,
        Ssm3P1 => (lo32 ^ lo32.rotate_left(15) ^ lo32.rotate_left(23)) as u64,
        Ssha256Sig0 => (lo32.rotate_right(7) ^ lo32.rotate_right(18) ^ (lo32 >> 3)) as u64,
        Ssha256Sig1 => (lo32.rotate_right(17) ^ lo32.rotate_right(19) ^ (lo32 >> 10)) as u64,
        Ssha256Sum0 => (lo32.rotate_right(2) ^ lo32.rotate_right(13) ^ lo32.rotate_right(22)) as u64,
        Ssha256Sum1 => (lo32.rotate_right(6) ^ lo32.rotate_right(11) ^ lo32.rotate_right(25)) as u64,
        Ssha512Sig0 => rs1.rotate_right(1) ^ rs1.rotate_right(8) ^ (rs1 >> 7),
        Ssha512Sig1 => rs1.rotate_right(19) ^ rs1.rotate_right(61) ^ (rs1 >> 6),
        Ssha512Sum0 => rs1.rotate_right(28) ^ rs1.rotate_right(34) ^ rs1.rotate_right(39),
        Ssha512Sum1 => rs1.rotate_right(14) ^ rs1.rotate_right(18) ^ rs1.rotate_right(41),
    };
    Ok(r)
}

/// Result of a base operation given its first source and its second source
/// or immediate.
///
/// Loads and stores return the effective address `rs1 + imm`; branches
/// return 1 when taken and 0 otherwise. Memory and control transfer are
/// carried out by the pipeline.
pub fn exec_base(op: BaseOp, rs1: Word64, rs2_or_imm: Word64) -> Word64 {
    use BaseOp::*;
    let b = rs2_or_imm;
    let lo = rs1 as u32;
    match op {
        Add | Addi => rs1.wrapping_add(b),
        Sub => rs1.wrapping_sub(b),
        Xor | Xori => rs1 ^ b,
        And | Andi => rs1 & b,
        Or | Ori => rs1 | b,
        Andn => rs1 & !b,
        Sll | Slli => rs1 << (b & 63),
        Srl | Srli => rs1 >> (b & 63),
        Sra | Srai => ((rs1 as i64) >> (b & 63)) as u64,
        Addw => lo.wrapping_add(b as u32) as u64,
        Sllw | Slliw => (lo << (b & 31)) as u64,
        Srlw | Srliw => (lo >> (b & 31)) as u64,
        Ror | Rori => rs1.rotate_right((b & 63) as u32),
        Rol => rs1.rotate_left((b & 63) as u32),
        Rorw | Roriw => lo.rotate_right((b & 31) as u32) as u64,
        Rolw => lo.rotate_left((b & 31) as u32) as u64,
        Li => b,
        Ld | Lwu | Lbu | Sd | Sw | Sb => rs1.wrapping_add(b),
        Beq => (rs1 == b) as u64,
        Bne => (rs1 != b) as u64,
        Bltu => (rs1 < b) as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CryptoOp::*;

    #[test]
    fn zero_inputs() {
        assert_eq!(exec_crypto(Ssha256Sig0, 0, 0, None), Ok(0));
        assert_eq!(exec_crypto(Ssha512Sum0, 0, 0, None), Ok(0));
    }

    #[test]
    fn base_examples() {
        let x = 0x0123_4567_89ab_cdef;
        assert_eq!(exec_base(BaseOp::Xor, x, x), 0);
        assert_eq!(exec_base(BaseOp::Add, u64::MAX, 1), 0);
        assert_eq!(exec_base(BaseOp::Rorw, 1, 1), 0x8000_0000);
        assert_eq!(exec_base(BaseOp::Roriw, 0xffff_ffff_0000_0001, 1), 0x8000_0000);
        assert_eq!(exec_base(BaseOp::Addw, 0xffff_ffff, 1), 0);
        assert_eq!(exec_base(BaseOp::Andn, 0b1100, 0b1010), 0b0100);
        assert_eq!(exec_base(BaseOp::Sra, 0x8000_0000_0000_0000, 63), u64::MAX);
        assert_eq!(exec_base(BaseOp::Bltu, 1, 2), 1);
    }

    #[test]
    fn illegal_immediates() {
        assert!(matches!(exec_crypto(Saes64Ks1, 0, 0, Some(11)), Err(Error::IllegalImmediate { .. })));
        assert!(matches!(exec_crypto(Ssm4Ed, 0, 0, Some(-1)), Err(Error::IllegalImmediate { .. })));
        assert!(exec_crypto(Ssm4Ks, 0, 0, None).is_err());
        assert!(exec_crypto(Ssha256Sum0, 0, 0, Some(1)).is_err());
    }

    #[test]
    fn thirty_two_bit_ops_ignore_high_word_and_zero_extend() {
        for op in CryptoOp::ALL.into_iter().filter(|op| op.word_bits() == 32) {
            let imm = op.imm_range().map(|r| *r.start());
            let a = exec_crypto(op, 0xdead_beef_1234_5678, 0x0bad_f00d_9abc_def0, imm).unwrap();
            let b = exec_crypto(op, 0x1234_5678, 0x0bad_f00d_9abc_def0, imm).unwrap();
            assert_eq!(a, b, "{op}");
            assert_eq!(a >> 32, 0, "{op}");
        }
    }

    #[test]
    fn deterministic() {
        for op in CryptoOp::ALL {
            let imm = op.imm_range().map(|r| *r.end());
            let first = exec_crypto(op, 0x0f1e2d3c4b5a6978, 0x8796a5b4c3d2e1f0, imm);
            for _ in 0..100 {
                assert_eq!(exec_crypto(op, 0x0f1e2d3c4b5a6978, 0x8796a5b4c3d2e1f0, imm), first);
            }
        }
    }

    #[test]
    fn encsm_is_mixcolumns_of_encs() {
        let mut s = 1u64;
        for _ in 0..200 {
            s = s.wrapping_mul(0x5851f42d4c957f2d).wrapping_add(0x14057b7ef767814f);
            let (a, b) = (s, s.rotate_left(29) ^ 0xa5a5_5a5a_0f0f_f0f0);
            let plain = exec_crypto(Saes64Encs, a, b, None).unwrap();
            assert_eq!(exec_crypto(Saes64Encsm, a, b, None).unwrap(), mix_columns(plain));
            let inv = exec_crypto(Saes64Ds, a, b, None).unwrap();
            assert_eq!(exec_crypto(Saes64Dsm, a, b, None).unwrap(), inv_mix_columns(inv));
            assert_eq!(inv_mix_columns(mix_columns(a)), a);
        }
    }
}
