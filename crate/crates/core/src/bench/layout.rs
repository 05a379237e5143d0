//! Data memory layout shared by all benchmark programs, and the constant
//! tables the baseline variants read.

use crate::error::Result;
use crate::fields::gf_mul;
use crate::pipeline::Memory;
use crate::tables::{sm3_t, AES_SBOX, SHA256_K, SHA512_K, SM4_CK, SM4_SBOX};

pub const KEY: u64 = 0x1000;
pub const IN: u64 = 0x1100;
/// Output buffer, addressed as `IN + OUT_OFFSET`.
pub const OUT_OFFSET: i64 = 0x100;
pub const OUT: u64 = IN + OUT_OFFSET as u64;
pub const RK: u64 = 0x2000;

/// AES encryption T-tables Te0..Te3, 1 KiB apart.
pub const AES_TE: u64 = 0x10000;
pub const AES_SBOX_TABLE: u64 = 0x11000;
/// SM4 round tables, L∘S rotated per byte position, 1 KiB apart.
pub const SM4_T: u64 = 0x12000;
/// SM4 key-schedule tables, L'∘S rotated per byte position.
pub const SM4_KT: u64 = 0x13000;
pub const SHA256_KT: u64 = 0x14000;
pub const SHA512_KT: u64 = 0x14400;
/// SM3 round constants pre-rotated: rotl(T_j, j).
pub const SM3_TT: u64 = 0x14800;
pub const SM4_CKT: u64 = 0x14a00;

pub const TABLE_SPACING: u64 = 0x400;

fn sm4_l(b: u32) -> u32 {
    b ^ b.rotate_left(2) ^ b.rotate_left(10) ^ b.rotate_left(18) ^ b.rotate_left(24)
}

fn sm4_l_key(b: u32) -> u32 {
    b ^ b.rotate_left(13) ^ b.rotate_left(23)
}

/// Constant tables placed in data memory before a benchmark runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableImage {
    regions: Vec<(u64, Vec<u8>)>,
}

impl TableImage {
    pub fn standard() -> Self {
        Self::with_aes_sbox(&AES_SBOX)
    }

    /// Tables derived from an arbitrary AES S-box, e.g. a corrupted one for
    /// fault-injection tests.
    pub fn with_aes_sbox(sbox: &[u8; 256]) -> Self {
        let words32 = |f: &dyn Fn(usize) -> u32| -> Vec<u8> { (0..256).flat_map(|i| f(i).to_le_bytes()).collect() };
        let mut regions = Vec::new();
        for r in 0..4u32 {
            let te = words32(&|i| {
                let s = sbox[i];
                let col = u32::from_le_bytes([gf_mul(s, 2), s, s, gf_mul(s, 3)]);
                col.rotate_left(8 * r)
            });
            regions.push((AES_TE + r as u64 * TABLE_SPACING, te));
        }
        regions.push((AES_SBOX_TABLE, sbox.to_vec()));
        for bs in 0..4u32 {
            let t = words32(&|i| sm4_l(SM4_SBOX[i] as u32).rotate_left(8 * bs));
            regions.push((SM4_T + bs as u64 * TABLE_SPACING, t));
            let k = words32(&|i| sm4_l_key(SM4_SBOX[i] as u32).rotate_left(8 * bs));
            regions.push((SM4_KT + bs as u64 * TABLE_SPACING, k));
        }
        regions.push((SHA256_KT, SHA256_K.iter().flat_map(|k| k.to_le_bytes()).collect()));
        regions.push((SHA512_KT, SHA512_K.iter().flat_map(|k| k.to_le_bytes()).collect()));
        regions.push((SM3_TT, (0..64).flat_map(|j| sm3_t(j).rotate_left(j as u32 % 32).to_le_bytes()).collect()));
        regions.push((SM4_CKT, SM4_CK.iter().flat_map(|k| k.to_le_bytes()).collect()));
        TableImage { regions }
    }

    pub fn load(&self, mem: &mut Memory) -> Result<()> {
        for (addr, bytes) in &self.regions {
            mem.write_bytes(*addr, bytes)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_do_not_overlap() {
        let img = TableImage::standard();
        let mut spans: Vec<(u64, u64)> = img.regions.iter().map(|(a, b)| (*a, a + b.len() as u64)).collect();
        spans.sort();
        for w in spans.windows(2) {
            assert!(w[0].1 <= w[1].0, "{:x?} overlaps {:x?}", w[0], w[1]);
        }
        assert!(spans.last().unwrap().1 <= crate::pipeline::MEMORY_SIZE);
        const { assert!(RK + 60 * 4 <= AES_TE && OUT + 64 <= RK) };
    }

    #[test]
    fn te0_entry() {
        // S(0x00) = 0x63: column (c6, 63, 63, a5).
        let img = TableImage::standard();
        assert_eq!(&img.regions[0].1[..4], &[0xc6, 0x63, 0x63, 0xa5]);
    }
}
