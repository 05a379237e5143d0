//! Whole algorithms expressed through the crypto instructions.
//!
//! These are the functional counterparts of the accelerated benchmark
//! programs: every S-box, MixColumns, sigma/sum and P0/P1 evaluation on the
//! hot path goes through [`exec_crypto`]. Padding and byte-order handling
//! are ordinary Rust.

use crate::error::{Error, Result};
use crate::tables::{sm3_t, SHA256_IV, SHA256_K, SHA512_IV, SHA512_K, SM3_IV, SM4_CK, SM4_FK};

use super::opcode::CryptoOp::{self, *};
use super::semantics::exec_crypto;

fn x(op: CryptoOp, rs1: u64, rs2: u64) -> u64 {
    exec_crypto(op, rs1, rs2, None).expect("immediate-free instruction")
}

fn xi(op: CryptoOp, rs1: u64, rs2: u64, imm: i64) -> u64 {
    exec_crypto(op, rs1, rs2, Some(imm)).expect("immediate in range")
}

fn check_len(bytes: &[u8], expected: usize) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::LengthMismatch { expected, actual: bytes.len() });
    }
    Ok(())
}

fn le64(bytes: &[u8]) -> u64 {
    u64::from_le_bytes(bytes.try_into().expect("8 bytes"))
}

/// AES round keys as (low, high) 64-bit halves, expanded with
/// `saes64.ks1`/`saes64.ks2`.
pub fn aes_round_keys(key: &[u8]) -> Result<Vec<[u64; 2]>> {
    let rounds = match key.len() {
        16 => 10,
        24 => 12,
        32 => 14,
        n => return Err(Error::LengthMismatch { expected: 16, actual: n }),
    };
    let mut k: Vec<u64> = key.chunks(8).map(le64).collect();
    let nk = k.len();
    let needed = 2 * (rounds + 1);
    let mut stream = k.clone();
    let mut rnum = 0;
    while stream.len() < needed {
        let t = xi(Saes64Ks1, k[nk - 1], 0, rnum);
        rnum += 1;
        for j in 0..nk {
            let prev = match j {
                0 => t,
                2 if nk == 4 => xi(Saes64Ks1, k[1], 0, 10),
                _ => k[j - 1],
            };
            k[j] = x(Saes64Ks2, prev, k[j]);
        }
        stream.extend_from_slice(&k);
    }
    stream.truncate(needed);
    Ok(stream.chunks(2).map(|c| [c[0], c[1]]).collect())
}

pub fn aes_encrypt(key: &[u8], block: &[u8]) -> Result<[u8; 16]> {
    check_len(block, 16)?;
    let rk = aes_round_keys(key)?;
    let nr = rk.len() - 1;
    let mut s0 = le64(&block[..8]) ^ rk[0][0];
    let mut s1 = le64(&block[8..]) ^ rk[0][1];
    for k in &rk[1..nr] {
        let n0 = x(Saes64Encsm, s0, s1);
        let n1 = x(Saes64Encsm, s1, s0);
        s0 = n0 ^ k[0];
        s1 = n1 ^ k[1];
    }
    let n0 = x(Saes64Encs, s0, s1) ^ rk[nr][0];
    let n1 = x(Saes64Encs, s1, s0) ^ rk[nr][1];
    Ok(join(n0, n1))
}

pub fn aes_decrypt(key: &[u8], block: &[u8]) -> Result<[u8; 16]> {
    check_len(block, 16)?;
    let rk = aes_round_keys(key)?;
    let nr = rk.len() - 1;
    let mut s0 = le64(&block[..8]) ^ rk[nr][0];
    let mut s1 = le64(&block[8..]) ^ rk[nr][1];
    for k in rk[1..nr].iter().rev() {
        let n0 = x(Saes64Dsm, s0, s1);
        let n1 = x(Saes64Dsm, s1, s0);
        s0 = n0 ^ x(Saes64Im, k[0], 0);
        s1 = n1 ^ x(Saes64Im, k[1], 0);
    }
    let n0 = x(Saes64Ds, s0, s1) ^ rk[0][0];
    let n1 = x(Saes64Ds, s1, s0) ^ rk[0][1];
    Ok(join(n0, n1))
}

fn join(lo: u64, hi: u64) -> [u8; 16] {
    let mut out = [0u8; 16];
    out[..8].copy_from_slice(&lo.to_le_bytes());
    out[8..].copy_from_slice(&hi.to_le_bytes());
    out
}

pub fn compose_aes128(key: &[u8], block: &[u8]) -> Result<[u8; 16]> {
    check_len(key, 16)?;
    aes_encrypt(key, block)
}

/// Merkle-Damgard padding with a big-endian bit length of `len_bytes` bytes.
fn md_pad(message: &[u8], block: usize, len_bytes: usize) -> Vec<u8> {
    let mut m = message.to_vec();
    m.push(0x80);
    while m.len() % block != block - len_bytes {
        m.push(0);
    }
    let bits = (message.len() as u128) * 8;
    m.extend_from_slice(&bits.to_be_bytes()[16 - len_bytes..]);
    m
}

pub fn compose_sha256(message: &[u8]) -> [u8; 32] {
    let mut h = SHA256_IV;
    for block in md_pad(message, 64, 8).chunks(64) {
        let mut w = [0u32; 64];
        for (i, c) in block.chunks(4).enumerate() {
            w[i] = u32::from_be_bytes(c.try_into().unwrap());
        }
        for t in 16..64 {
            let s0 = x(Ssha256Sig0, w[t - 15] as u64, 0) as u32;
            let s1 = x(Ssha256Sig1, w[t - 2] as u64, 0) as u32;
            w[t] = w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for t in 0..64 {
            let ch = (e & f) ^ (!e & g);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t1 = hh
                .wrapping_add(x(Ssha256Sum1, e as u64, 0) as u32)
                .wrapping_add(ch)
                .wrapping_add(SHA256_K[t])
                .wrapping_add(w[t]);
            let t2 = (x(Ssha256Sum0, a as u64, 0) as u32).wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (hi, v) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *hi = hi.wrapping_add(v);
        }
    }
    let mut out = [0u8; 32];
    for (chunk, v) in out.chunks_mut(4).zip(h) {
        chunk.copy_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn compose_sha512(message: &[u8]) -> [u8; 64] {
    let mut h = SHA512_IV;
    for block in md_pad(message, 128, 16).chunks(128) {
        let mut w = [0u64; 80];
        for (i, c) in block.chunks(8).enumerate() {
            w[i] = u64::from_be_bytes(c.try_into().unwrap());
        }
        for t in 16..80 {
            let s0 = x(Ssha512Sig0, w[t - 15], 0);
            let s1 = x(Ssha512Sig1, w[t - 2], 0);
            w[t] = w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for t in 0..80 {
            let ch = (e & f) ^ (!e & g);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t1 =
                hh.wrapping_add(x(Ssha512Sum1, e, 0)).wrapping_add(ch).wrapping_add(SHA512_K[t]).wrapping_add(w[t]);
            let t2 = x(Ssha512Sum0, a, 0).wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (hi, v) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *hi = hi.wrapping_add(v);
        }
    }
    let mut out = [0u8; 64];
    for (chunk, v) in out.chunks_mut(8).zip(h) {
        chunk.copy_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn compose_sm3(message: &[u8]) -> [u8; 32] {
    let p0 = |v: u32| x(Ssm3P0, v as u64, 0) as u32;
    let p1 = |v: u32| x(Ssm3P1, v as u64, 0) as u32;
    let mut v = SM3_IV;
    for block in md_pad(message, 64, 8).chunks(64) {
        let mut w = [0u32; 68];
        for (i, c) in block.chunks(4).enumerate() {
            w[i] = u32::from_be_bytes(c.try_into().unwrap());
        }
        for j in 16..68 {
            w[j] = p1(w[j - 16] ^ w[j - 9] ^ w[j - 3].rotate_left(15)) ^ w[j - 13].rotate_left(7) ^ w[j - 6];
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] = v;
        for j in 0..64 {
            let a12 = a.rotate_left(12);
            let ss1 = a12.wrapping_add(e).wrapping_add(sm3_t(j).rotate_left(j as u32 % 32)).rotate_left(7);
            let ss2 = ss1 ^ a12;
            let (ff, gg) =
                if j < 16 { (a ^ b ^ c, e ^ f ^ g) } else { ((a & b) | (a & c) | (b & c), (e & f) | (!e & g)) };
            let tt1 = ff.wrapping_add(d).wrapping_add(ss2).wrapping_add(w[j] ^ w[j + 4]);
            let tt2 = gg.wrapping_add(h).wrapping_add(ss1).wrapping_add(w[j]);
            d = c;
            c = b.rotate_left(9);
            b = a;
            a = tt1;
            h = g;
            g = f.rotate_left(19);
            f = e;
            e = p0(tt2);
        }
        for (vi, n) in v.iter_mut().zip([a, b, c, d, e, f, g, h]) {
            *vi ^= n;
        }
    }
    let mut out = [0u8; 32];
    for (chunk, word) in out.chunks_mut(4).zip(v) {
        chunk.copy_from_slice(&word.to_be_bytes());
    }
    out
}

fn be_words(bytes: &[u8]) -> [u32; 4] {
    let mut w = [0u32; 4];
    for (i, c) in bytes.chunks(4).enumerate() {
        w[i] = u32::from_be_bytes(c.try_into().unwrap());
    }
    w
}

fn sm4_t(op: CryptoOp, acc: u32, t: u32) -> u32 {
    let mut acc = acc as u64;
    for bs in 0..4 {
        acc = xi(op, acc, t as u64, bs);
    }
    acc as u32
}

pub fn sm4_round_keys(key: &[u8]) -> Result<[u32; 32]> {
    check_len(key, 16)?;
    let mk = be_words(key);
    let mut k = [mk[0] ^ SM4_FK[0], mk[1] ^ SM4_FK[1], mk[2] ^ SM4_FK[2], mk[3] ^ SM4_FK[3]];
    let mut rk = [0u32; 32];
    for (i, out) in rk.iter_mut().enumerate() {
        let t = k[1] ^ k[2] ^ k[3] ^ SM4_CK[i];
        let next = sm4_t(Ssm4Ks, k[0], t);
        k = [k[1], k[2], k[3], next];
        *out = next;
    }
    Ok(rk)
}

fn sm4_crypt(rk: impl Iterator<Item = u32>, block: &[u8]) -> Result<[u8; 16]> {
    check_len(block, 16)?;
    let mut s = be_words(block);
    for k in rk {
        let t = s[1] ^ s[2] ^ s[3] ^ k;
        s = [s[1], s[2], s[3], sm4_t(Ssm4Ed, s[0], t)];
    }
    let mut out = [0u8; 16];
    for (chunk, word) in out.chunks_mut(4).zip(s.iter().rev()) {
        chunk.copy_from_slice(&word.to_be_bytes());
    }
    Ok(out)
}

pub fn compose_sm4(key: &[u8], block: &[u8]) -> Result<[u8; 16]> {
    let rk = sm4_round_keys(key)?;
    sm4_crypt(rk.into_iter(), block)
}

pub fn compose_sm4_decrypt(key: &[u8], block: &[u8]) -> Result<[u8; 16]> {
    let rk = sm4_round_keys(key)?;
    sm4_crypt(rk.into_iter().rev(), block)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(s: &str) -> Vec<u8> {
        (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
    }

    #[test]
    fn aes128_known_answer() {
        let ct =
            compose_aes128(&hex("000102030405060708090a0b0c0d0e0f"), &hex("00112233445566778899aabbccddeeff")).unwrap();
        assert_eq!(ct.to_vec(), hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
    }

    #[test]
    fn length_checks() {
        assert_eq!(compose_aes128(&[0; 15], &[0; 16]), Err(Error::LengthMismatch { expected: 16, actual: 15 }));
        assert!(aes_encrypt(&[0; 16], &[0; 17]).is_err());
        assert!(compose_sm4(&[0; 16], &[0; 3]).is_err());
        assert!(aes_round_keys(&[0; 20]).is_err());
    }

    #[test]
    fn padding_lengths() {
        assert_eq!(md_pad(b"", 64, 8).len(), 64);
        assert_eq!(md_pad(&[0; 55], 64, 8).len(), 64);
        assert_eq!(md_pad(&[0; 56], 64, 8).len(), 128);
        assert_eq!(md_pad(&[0; 111], 128, 16).len(), 128);
        assert_eq!(md_pad(&[0; 112], 128, 16).len(), 256);
    }
}
