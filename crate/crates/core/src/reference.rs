//! Straightforward software implementations used as oracles.
//!
//! Nothing here touches the instruction semantics or the shared constant
//! tables for AES: the S-box is rebuilt from the field inverse and the
//! affine map, and MixColumns uses `xtime`.

use crate::tables::{SHA256_IV, SHA256_K, SHA512_IV, SHA512_K, SM3_IV, SM4_CK, SM4_FK, SM4_SBOX};

fn xtime(a: u8) -> u8 {
    (a << 1) ^ if a & 0x80 != 0 { 0x1b } else { 0 }
}

pub fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    p
}

fn ginv(a: u8) -> u8 {
    // a^254 by square-and-multiply; maps 0 to 0.
    let mut result = 1u8;
    let mut base = a;
    let mut e = 254u32;
    while e != 0 {
        if e & 1 != 0 {
            result = gmul(result, base);
        }
        base = gmul(base, base);
        e >>= 1;
    }
    result
}

pub fn aes_sbox(x: u8) -> u8 {
    let b = ginv(x);
    b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63
}

pub fn aes_inv_sbox(y: u8) -> u8 {
    (0..=255u8).find(|&x| aes_sbox(x) == y).expect("bijective")
}

/// State bytes in input order; column `c` is `s[4c..4c+4]`.
pub type AesState = [u8; 16];

pub fn sub_bytes(s: &mut AesState) {
    s.iter_mut().for_each(|b| *b = aes_sbox(*b));
}

pub fn shift_rows(s: &mut AesState) {
    let t = *s;
    for c in 0..4 {
        for r in 0..4 {
            s[4 * c + r] = t[4 * ((c + r) % 4) + r];
        }
    }
}

pub fn mix_columns(s: &mut AesState) {
    for c in 0..4 {
        let a = [s[4 * c], s[4 * c + 1], s[4 * c + 2], s[4 * c + 3]];
        for r in 0..4 {
            s[4 * c + r] = gmul(a[r], 2) ^ gmul(a[(r + 1) % 4], 3) ^ a[(r + 2) % 4] ^ a[(r + 3) % 4];
        }
    }
}

pub fn inv_mix_columns(s: &mut AesState) {
    for c in 0..4 {
        let a = [s[4 * c], s[4 * c + 1], s[4 * c + 2], s[4 * c + 3]];
        for r in 0..4 {
            s[4 * c + r] =
                gmul(a[r], 0x0e) ^ gmul(a[(r + 1) % 4], 0x0b) ^ gmul(a[(r + 2) % 4], 0x0d) ^ gmul(a[(r + 3) % 4], 0x09);
        }
    }
}

pub fn aes_expand_key(key: &[u8]) -> Vec<AesState> {
    let nk = key.len() / 4;
    assert!(matches!(nk, 4 | 6 | 8), "AES key must be 16, 24 or 32 bytes");
    let nr = nk + 6;
    let mut w: Vec<[u8; 4]> = key.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    let mut rcon = 1u8;
    for i in nk..4 * (nr + 1) {
        let mut t = w[i - 1];
        if i % nk == 0 {
            t = [aes_sbox(t[1]) ^ rcon, aes_sbox(t[2]), aes_sbox(t[3]), aes_sbox(t[0])];
            rcon = xtime(rcon);
        } else if nk > 6 && i % nk == 4 {
            t = t.map(aes_sbox);
        }
        let prev = w[i - nk];
        w.push([prev[0] ^ t[0], prev[1] ^ t[1], prev[2] ^ t[2], prev[3] ^ t[3]]);
    }
    w.chunks(4)
        .map(|c| {
            let mut k = [0u8; 16];
            for (j, word) in c.iter().enumerate() {
                k[4 * j..4 * j + 4].copy_from_slice(word);
            }
            k
        })
        .collect()
}

fn add_round_key(s: &mut AesState, k: &AesState) {
    s.iter_mut().zip(k).for_each(|(a, b)| *a ^= b);
}

pub fn aes_encrypt(key: &[u8], block: &[u8; 16]) -> [u8; 16] {
    let rk = aes_expand_key(key);
    let nr = rk.len() - 1;
    let mut s = *block;
    add_round_key(&mut s, &rk[0]);
    for k in &rk[1..nr] {
        sub_bytes(&mut s);
        shift_rows(&mut s);
        mix_columns(&mut s);
        add_round_key(&mut s, k);
    }
    sub_bytes(&mut s);
    shift_rows(&mut s);
    add_round_key(&mut s, &rk[nr]);
    s
}

pub fn aes_decrypt(key: &[u8], block: &[u8; 16]) -> [u8; 16] {
    let rk = aes_expand_key(key);
    let nr = rk.len() - 1;
    let mut s = *block;
    add_round_key(&mut s, &rk[nr]);
    for r in (0..nr).rev() {
        let t = s;
        for c in 0..4 {
            for row in 0..4 {
                s[4 * ((c + row) % 4) + row] = t[4 * c + row];
            }
        }
        s.iter_mut().for_each(|b| *b = aes_inv_sbox(*b));
        add_round_key(&mut s, &rk[r]);
        if r > 0 {
            inv_mix_columns(&mut s);
        }
    }
    s
}

fn pad(message: &[u8], block: usize, len_bytes: usize) -> Vec<u8> {
    let bits = (message.len() as u128) * 8;
    let mut m = message.to_vec();
    m.push(0x80);
    let zeros = (2 * block - (m.len() + len_bytes) % block) % block;
    m.resize(m.len() + zeros, 0);
    m.extend_from_slice(&bits.to_be_bytes()[16 - len_bytes..]);
    m
}

pub fn sha256(message: &[u8]) -> [u8; 32] {
    let mut h = SHA256_IV;
    for block in pad(message, 64, 8).chunks(64) {
        let mut w: Vec<u32> = block.chunks(4).map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]])).collect();
        for t in 16..64 {
            let s0 = w[t - 15].rotate_right(7) ^ w[t - 15].rotate_right(18) ^ (w[t - 15] >> 3);
            let s1 = w[t - 2].rotate_right(17) ^ w[t - 2].rotate_right(19) ^ (w[t - 2] >> 10);
            w.push(w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1));
        }
        let mut v = h;
        for t in 0..64 {
            let [a, b, c, d, e, f, g, hh] = v;
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(SHA256_K[t]).wrapping_add(w[t]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let t2 = s0.wrapping_add((a & b) ^ (a & c) ^ (b & c));
            v = [t1.wrapping_add(t2), a, b, c, d.wrapping_add(t1), e, f, g];
        }
        for i in 0..8 {
            h[i] = h[i].wrapping_add(v[i]);
        }
    }
    let mut out = [0u8; 32];
    for i in 0..8 {
        out[4 * i..4 * i + 4].copy_from_slice(&h[i].to_be_bytes());
    }
    out
}

pub fn sha512(message: &[u8]) -> [u8; 64] {
    let mut h = SHA512_IV;
    for block in pad(message, 128, 16).chunks(128) {
        let mut w: Vec<u64> = block.chunks(8).map(|c| u64::from_be_bytes(c.try_into().unwrap())).collect();
        for t in 16..80 {
            let s0 = w[t - 15].rotate_right(1) ^ w[t - 15].rotate_right(8) ^ (w[t - 15] >> 7);
            let s1 = w[t - 2].rotate_right(19) ^ w[t - 2].rotate_right(61) ^ (w[t - 2] >> 6);
            w.push(w[t - 16].wrapping_add(s0).wrapping_add(w[t - 7]).wrapping_add(s1));
        }
        let mut v = h;
        for t in 0..80 {
            let [a, b, c, d, e, f, g, hh] = v;
            let s1 = e.rotate_right(14) ^ e.rotate_right(18) ^ e.rotate_right(41);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(SHA512_K[t]).wrapping_add(w[t]);
            let s0 = a.rotate_right(28) ^ a.rotate_right(34) ^ a.rotate_right(39);
            let t2 = s0.wrapping_add((a & b) ^ (a & c) ^ (b & c));
            v = [t1.wrapping_add(t2), a, b, c, d.wrapping_add(t1), e, f, g];
        }
        for i in 0..8 {
            h[i] = h[i].wrapping_add(v[i]);
        }
    }
    let mut out = [0u8; 64];
    for i in 0..8 {
        out[8 * i..8 * i + 8].copy_from_slice(&h[i].to_be_bytes());
    }
    out
}

pub fn sm3(message: &[u8]) -> [u8; 32] {
    let p0 = |x: u32| x ^ x.rotate_left(9) ^ x.rotate_left(17);
    let p1 = |x: u32| x ^ x.rotate_left(15) ^ x.rotate_left(23);
    let mut v = SM3_IV;
    for block in pad(message, 64, 8).chunks(64) {
        let mut w: Vec<u32> = block.chunks(4).map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]])).collect();
        for j in 16..68 {
            let n = p1(w[j - 16] ^ w[j - 9] ^ w[j - 3].rotate_left(15)) ^ w[j - 13].rotate_left(7) ^ w[j - 6];
            w.push(n);
        }
        let w1: Vec<u32> = (0..64).map(|j| w[j] ^ w[j + 4]).collect();
        let mut r = v;
        for j in 0..64 {
            let [a, b, c, d, e, f, g, h] = r;
            let tj: u32 = if j < 16 { 0x79cc4519 } else { 0x7a879d8a };
            let ss1 = a.rotate_left(12).wrapping_add(e).wrapping_add(tj.rotate_left(j as u32 % 32)).rotate_left(7);
            let ss2 = ss1 ^ a.rotate_left(12);
            let ff = if j < 16 { a ^ b ^ c } else { (a & b) | (a & c) | (b & c) };
            let gg = if j < 16 { e ^ f ^ g } else { (e & f) | (!e & g) };
            let tt1 = ff.wrapping_add(d).wrapping_add(ss2).wrapping_add(w1[j]);
            let tt2 = gg.wrapping_add(h).wrapping_add(ss1).wrapping_add(w[j]);
            r = [tt1, a, b.rotate_left(9), c, p0(tt2), e, f.rotate_left(19), g];
        }
        for i in 0..8 {
            v[i] ^= r[i];
        }
    }
    let mut out = [0u8; 32];
    for i in 0..8 {
        out[4 * i..4 * i + 4].copy_from_slice(&v[i].to_be_bytes());
    }
    out
}

fn sm4_tau(x: u32) -> u32 {
    u32::from_be_bytes(x.to_be_bytes().map(|b| SM4_SBOX[b as usize]))
}

fn sm4_rounds(rk: &[u32; 32], block: &[u8; 16], decrypt: bool) -> [u8; 16] {
    let mut x: Vec<u32> = block.chunks(4).map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]])).collect();
    for i in 0..32 {
        let k = if decrypt { rk[31 - i] } else { rk[i] };
        let b = sm4_tau(x[i + 1] ^ x[i + 2] ^ x[i + 3] ^ k);
        x.push(x[i] ^ b ^ b.rotate_left(2) ^ b.rotate_left(10) ^ b.rotate_left(18) ^ b.rotate_left(24));
    }
    let mut out = [0u8; 16];
    for i in 0..4 {
        out[4 * i..4 * i + 4].copy_from_slice(&x[35 - i].to_be_bytes());
    }
    out
}

pub fn sm4_round_keys(key: &[u8; 16]) -> [u32; 32] {
    let mut k: Vec<u32> =
        key.chunks(4).zip(SM4_FK).map(|(c, fk)| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) ^ fk).collect();
    for i in 0..32 {
        let b = sm4_tau(k[i + 1] ^ k[i + 2] ^ k[i + 3] ^ SM4_CK[i]);
        k.push(k[i] ^ b ^ b.rotate_left(13) ^ b.rotate_left(23));
    }
    k[4..].try_into().unwrap()
}

pub fn sm4_encrypt(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    sm4_rounds(&sm4_round_keys(key), block, false)
}

pub fn sm4_decrypt(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    sm4_rounds(&sm4_round_keys(key), block, true)
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn from_hex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok()).collect()
}
