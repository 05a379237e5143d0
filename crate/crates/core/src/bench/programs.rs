//! Straight-line benchmark programs. Every round is unrolled; the two
//! variants share structure and differ only where a crypto instruction (or
//! a Zbkb rotate/andn) replaces a base-ISA sequence.

use crate::crypto_isa::{BaseOp::*, CryptoOp::*};
use crate::error::Result;
use crate::pipeline::{Asm, Program};
use crate::tables::{AES_RCON, SHA256_IV, SHA512_IV, SM3_IV, SM4_FK};

use super::layout::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Baseline,
    Accelerated,
}

struct Gen {
    a: Asm,
    accel: bool,
}

impl Gen {
    fn new(variant: Variant) -> Self {
        Gen { a: Asm::new(), accel: variant == Variant::Accelerated }
    }

    /// 32-bit rotate right; `tmp` must differ from `d` and `s`.
    fn rotr32(&mut self, d: u8, s: u8, n: u32, tmp: u8) {
        if self.accel {
            self.a.ri(Roriw, d, s, n as i64);
        } else {
            self.a.ri(Srliw, tmp, s, n as i64).ri(Slliw, d, s, 32 - n as i64).rr(Or, d, d, tmp);
        }
    }

    fn rotl32(&mut self, d: u8, s: u8, n: u32, tmp: u8) {
        self.rotr32(d, s, 32 - n, tmp);
    }

    fn rotr64(&mut self, d: u8, s: u8, n: u32, tmp: u8) {
        if self.accel {
            self.a.ri(Rori, d, s, n as i64);
        } else {
            self.a.ri(Srli, tmp, s, n as i64).ri(Slli, d, s, 64 - n as i64).rr(Or, d, d, tmp);
        }
    }

    /// d = a & !b
    fn andnot(&mut self, d: u8, a: u8, b: u8, tmp: u8) {
        if self.accel {
            self.a.rr(Andn, d, a, b);
        } else {
            self.a.ri(Xori, tmp, b, -1).rr(And, d, a, tmp);
        }
    }

    /// Load the table entry indexed by byte `k` of the 32-bit value in `src`.
    fn lookup(&mut self, dst: u8, src: u8, k: u32, base: u8, word: bool, addr: u8) {
        match k {
            0 => self.a.ri(Andi, addr, src, 0xff),
            3 => self.a.ri(Srliw, addr, src, 24),
            _ => self.a.ri(Srliw, addr, src, 8 * k as i64).ri(Andi, addr, addr, 0xff),
        };
        if word {
            self.a.ri(Slli, addr, addr, 2).rr(Add, addr, addr, base).load(Lwu, dst, addr, 0);
        } else {
            self.a.rr(Add, addr, addr, base).load(Lbu, dst, addr, 0);
        }
    }

    fn finish(self) -> Result<Program> {
        self.a.finish()
    }
}

/// SHA-256 σ/Σ: rotr(a) ^ rotr(b) ^ (rotr(c) or shr(c)).
fn sha256_fn(g: &mut Gen, d: u8, x: u8, (ra, rb, c, shift): (u32, u32, u32, bool), t1: u8, t2: u8) {
    g.rotr32(d, x, ra, t1);
    g.rotr32(t2, x, rb, t1);
    g.a.rr(Xor, d, d, t2);
    if shift {
        g.a.ri(Srliw, t2, x, c as i64);
    } else {
        g.rotr32(t2, x, c, t1);
    }
    g.a.rr(Xor, d, d, t2);
}

fn sha512_fn(g: &mut Gen, d: u8, x: u8, (ra, rb, c, shift): (u32, u32, u32, bool), t1: u8, t2: u8) {
    g.rotr64(d, x, ra, t1);
    g.rotr64(t2, x, rb, t1);
    g.a.rr(Xor, d, d, t2);
    if shift {
        g.a.ri(Srli, t2, x, c as i64);
    } else {
        g.rotr64(t2, x, c, t1);
    }
    g.a.rr(Xor, d, d, t2);
}

const IN_BASE: u8 = 31;
const K_BASE: u8 = 30;

/// Shared SHA-2 compression. W[0..16] are native words at IN; the digest
/// words are written to OUT.
fn sha2(variant: Variant, wide: bool) -> Result<Program> {
    let mut g = Gen::new(variant);
    let (rounds, bytes, kt) = if wide { (80, 8, SHA512_KT) } else { (64, 4, SHA256_KT) };
    let (load, store, add) = if wide { (Ld, Sd, Add) } else { (Lwu, Sw, Addw) };
    let w = |t: usize| 9 + (t % 16) as u8;
    let (s, u, v, k) = (25u8, 26u8, 27u8, 28u8);
    let (sig0, sig1, sum0, sum1) = if wide {
        (Ssha512Sig0, Ssha512Sig1, Ssha512Sum0, Ssha512Sum1)
    } else {
        (Ssha256Sig0, Ssha256Sig1, Ssha256Sum0, Ssha256Sum1)
    };
    let shape = |op| match (op, wide) {
        (Ssha256Sig0, _) => (7, 18, 3, true),
        (Ssha256Sig1, _) => (17, 19, 10, true),
        (Ssha256Sum0, _) => (2, 13, 22, false),
        (Ssha256Sum1, _) => (6, 11, 25, false),
        (Ssha512Sig0, _) => (1, 8, 7, true),
        (Ssha512Sig1, _) => (19, 61, 6, true),
        (Ssha512Sum0, _) => (28, 34, 39, false),
        _ => (14, 18, 41, false),
    };
    let f = |g: &mut Gen, op, d: u8, x: u8| {
        if g.accel {
            g.a.crypto(op, d, x, 0);
        } else if wide {
            sha512_fn(g, d, x, shape(op), u, v);
        } else {
            sha256_fn(g, d, x, shape(op), u, v);
        }
    };

    g.a.li(IN_BASE, IN).li(K_BASE, kt);
    for t in 0..16 {
        g.a.load(load, w(t), IN_BASE, (bytes * t) as i64);
    }
    let iv: Vec<u64> = if wide { SHA512_IV.to_vec() } else { SHA256_IV.iter().map(|&x| x as u64).collect() };
    let mut r: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
    for i in 0..8 {
        g.a.li(r[i], iv[i]);
    }
    for t in 0..rounds {
        if t >= 16 {
            f(&mut g, sig1, s, w(t - 2));
            g.a.rr(add, w(t), w(t), s).rr(add, w(t), w(t), w(t - 7));
            f(&mut g, sig0, s, w(t - 15));
            g.a.rr(add, w(t), w(t), s);
        }
        g.a.load(load, k, K_BASE, (bytes * t) as i64);
        let [a, b, c, d, e, ff, gg, h] = r;
        f(&mut g, sum1, s, e);
        g.a.rr(add, h, h, s);
        g.a.rr(And, s, e, ff);
        g.andnot(u, gg, e, v);
        g.a.rr(Xor, s, s, u).rr(add, h, h, s).rr(add, h, h, k).rr(add, h, h, w(t));
        g.a.rr(add, d, d, h);
        f(&mut g, sum0, s, a);
        g.a.rr(Xor, u, a, b).rr(And, u, u, c).rr(And, v, a, b).rr(Xor, u, u, v);
        g.a.rr(add, s, s, u).rr(add, h, h, s);
        r = [h, a, b, c, d, e, ff, gg];
    }
    for i in 0..8 {
        g.a.li(s, iv[i]).rr(add, s, s, r[i]).store(store, s, IN_BASE, OUT_OFFSET + (bytes * i) as i64);
    }
    g.finish()
}

pub fn sha256(variant: Variant) -> Result<Program> {
    sha2(variant, false)
}

pub fn sha512(variant: Variant) -> Result<Program> {
    sha2(variant, true)
}

pub fn sm3(variant: Variant) -> Result<Program> {
    let mut g = Gen::new(variant);
    let w = |j: usize| 9 + (j % 16) as u8;
    let (a12, ss1, ss2, t, u) = (25u8, 26u8, 27u8, 28u8, 29u8);
    g.a.li(IN_BASE, IN).li(K_BASE, SM3_TT);
    for j in 0..16 {
        g.a.load(Lwu, w(j), IN_BASE, 4 * j as i64);
    }
    let mut r: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
    for i in 0..8 {
        g.a.li(r[i], SM3_IV[i] as u64);
    }
    let p0 = |g: &mut Gen, x: u8| {
        if g.accel {
            g.a.crypto(Ssm3P0, x, x, 0);
        } else {
            g.rotl32(t, x, 9, u);
            g.rotl32(a12, x, 17, u);
            g.a.rr(Xor, x, x, t).rr(Xor, x, x, a12);
        }
    };
    let p1 = |g: &mut Gen, x: u8| {
        if g.accel {
            g.a.crypto(Ssm3P1, x, x, 0);
        } else {
            g.rotl32(t, x, 15, u);
            g.rotl32(a12, x, 23, u);
            g.a.rr(Xor, x, x, t).rr(Xor, x, x, a12);
        }
    };
    for j in 0..64 {
        let idx = j + 4;
        if idx >= 16 {
            let dst = w(idx);
            g.rotl32(t, w(idx - 3), 15, u);
            g.a.rr(Xor, dst, dst, w(idx - 9)).rr(Xor, dst, dst, t);
            p1(&mut g, dst);
            g.rotl32(t, w(idx - 13), 7, u);
            g.a.rr(Xor, dst, dst, t).rr(Xor, dst, dst, w(idx - 6));
        }
        let [a, b, c, d, e, f, gg, h] = r;
        g.rotl32(a12, a, 12, u);
        g.a.load(Lwu, t, K_BASE, 4 * j as i64);
        g.a.rr(Addw, ss1, a12, e).rr(Addw, ss1, ss1, t);
        g.rotl32(ss1, ss1, 7, u);
        g.a.rr(Xor, ss2, ss1, a12);
        if j < 16 {
            g.a.rr(Xor, t, a, b).rr(Xor, t, t, c);
        } else {
            g.a.rr(And, t, a, b).rr(Or, u, a, b).rr(And, u, u, c).rr(Or, t, t, u);
        }
        g.a.rr(Addw, d, d, t).rr(Addw, d, d, ss2).rr(Xor, t, w(j), w(j + 4)).rr(Addw, d, d, t);
        if j < 16 {
            g.a.rr(Xor, t, e, f).rr(Xor, t, t, gg);
        } else {
            g.a.rr(And, t, e, f);
            g.andnot(u, gg, e, a12);
            g.a.rr(Or, t, t, u);
        }
        g.a.rr(Addw, h, h, t).rr(Addw, h, h, ss1).rr(Addw, h, h, w(j));
        g.rotl32(b, b, 9, u);
        g.rotl32(f, f, 19, u);
        p0(&mut g, h);
        r = [d, a, b, c, h, e, f, gg];
    }
    for i in 0..8 {
        g.a.li(t, SM3_IV[i] as u64).rr(Xor, t, t, r[i]).store(Sw, t, IN_BASE, OUT_OFFSET + 4 * i as i64);
    }
    g.finish()
}

fn aes_rounds(key_len: usize) -> usize {
    key_len / 4 + 6
}

pub fn aes(variant: Variant, key_len: usize) -> Result<Program> {
    match variant {
        Variant::Accelerated => aes_accelerated(key_len),
        Variant::Baseline => aes_baseline(key_len),
    }
}

const KEY_BASE: u8 = 31;
const RK_BASE: u8 = 30;
const DATA_BASE: u8 = 29;

fn aes_accelerated(key_len: usize) -> Result<Program> {
    let mut g = Gen::new(Variant::Accelerated);
    let nr = aes_rounds(key_len);
    let nk = key_len / 8;
    let needed = 2 * (nr + 1);
    let k = |j: usize| 1 + j as u8;
    let tmp = 5u8;
    g.a.li(KEY_BASE, KEY).li(RK_BASE, RK).li(DATA_BASE, IN);
    for j in 0..nk {
        g.a.load(Ld, k(j), KEY_BASE, 8 * j as i64).store(Sd, k(j), RK_BASE, 8 * j as i64);
    }
    let mut s = nk;
    let mut rnum = 0;
    while s < needed {
        g.a.crypto_imm(Saes64Ks1, tmp, k(nk - 1), 0, rnum);
        rnum += 1;
        for j in 0..nk {
            if s >= needed {
                break;
            }
            let prev = match j {
                0 => tmp,
                2 if nk == 4 => {
                    g.a.crypto_imm(Saes64Ks1, tmp, k(1), 0, 10);
                    tmp
                }
                _ => k(j - 1),
            };
            g.a.crypto(Saes64Ks2, k(j), prev, k(j));
            g.a.store(Sd, k(j), RK_BASE, 8 * s as i64);
            s += 1;
        }
    }
    let (s0, s1, n0, n1, k0, k1) = (6u8, 7u8, 8u8, 9u8, 10u8, 11u8);
    g.a.load(Ld, s0, DATA_BASE, 0).load(Ld, s1, DATA_BASE, 8);
    g.a.load(Ld, k0, RK_BASE, 0).load(Ld, k1, RK_BASE, 8);
    g.a.rr(Xor, s0, s0, k0).rr(Xor, s1, s1, k1);
    for r in 1..=nr {
        let op = if r == nr { Saes64Encs } else { Saes64Encsm };
        g.a.crypto(op, n0, s0, s1).crypto(op, n1, s1, s0);
        g.a.load(Ld, k0, RK_BASE, 16 * r as i64).load(Ld, k1, RK_BASE, 16 * r as i64 + 8);
        g.a.rr(Xor, s0, n0, k0).rr(Xor, s1, n1, k1);
    }
    g.a.store(Sd, s0, DATA_BASE, OUT_OFFSET).store(Sd, s1, DATA_BASE, OUT_OFFSET + 8);
    g.finish()
}

fn aes_baseline(key_len: usize) -> Result<Program> {
    let mut g = Gen::new(Variant::Baseline);
    let nr = aes_rounds(key_len);
    let nk = key_len / 4;
    let sbox = 28u8;
    let te = |r: usize| 24 + r as u8;
    let w = |i: usize| 1 + (i % nk) as u8;
    let (acc, addr, byte) = (17u8, 18u8, 19u8);
    g.a.li(KEY_BASE, KEY).li(RK_BASE, RK).li(DATA_BASE, IN).li(sbox, AES_SBOX_TABLE);
    for r in 0..4 {
        g.a.li(te(r), AES_TE + r as u64 * TABLE_SPACING);
    }
    for i in 0..nk {
        g.a.load(Lwu, w(i), KEY_BASE, 4 * i as i64).store(Sw, w(i), RK_BASE, 4 * i as i64);
    }
    for i in nk..4 * (nr + 1) {
        let prev = w(i - 1);
        let dst = w(i);
        let rot = i % nk == 0;
        if rot || (nk == 8 && i % 8 == 4) {
            // SubWord, with RotWord folded into the byte selection.
            for b in 0..4u32 {
                let from = if rot { (b + 1) % 4 } else { b };
                let target = if b == 0 { acc } else { byte };
                g.lookup(target, prev, from, sbox, false, addr);
                if b > 0 {
                    g.a.ri(Slli, byte, byte, 8 * b as i64).rr(Or, acc, acc, byte);
                }
            }
            if rot {
                g.a.ri(Xori, acc, acc, AES_RCON[i / nk - 1] as i64);
            }
            g.a.rr(Xor, dst, dst, acc);
        } else {
            g.a.rr(Xor, dst, dst, prev);
        }
        g.a.store(Sw, dst, RK_BASE, 4 * i as i64);
    }

    let mut cols: [u8; 4] = [9, 10, 11, 12];
    let mut next: [u8; 4] = [13, 14, 15, 16];
    for (c, &col) in cols.iter().enumerate() {
        g.a.load(Lwu, col, DATA_BASE, 4 * c as i64).load(Lwu, acc, RK_BASE, 4 * c as i64);
        g.a.rr(Xor, col, col, acc);
    }
    for r in 1..=nr {
        let last = r == nr;
        for c in 0..4 {
            for row in 0..4 {
                let src = cols[(c + row) % 4];
                let target = if row == 0 { next[c] } else { byte };
                if last {
                    g.lookup(target, src, row as u32, sbox, false, addr);
                    if row > 0 {
                        g.a.ri(Slli, byte, byte, 8 * row as i64).rr(Or, next[c], next[c], byte);
                    }
                } else {
                    g.lookup(target, src, row as u32, te(row), true, addr);
                    if row > 0 {
                        g.a.rr(Xor, next[c], next[c], byte);
                    }
                }
            }
            g.a.load(Lwu, acc, RK_BASE, (16 * r + 4 * c) as i64).rr(Xor, next[c], next[c], acc);
        }
        std::mem::swap(&mut cols, &mut next);
    }
    for (c, &col) in cols.iter().enumerate() {
        g.a.store(Sw, col, DATA_BASE, OUT_OFFSET + 4 * c as i64);
    }
    g.finish()
}

/// SM4 on big-endian words stored natively: key at KEY, block at IN,
/// output words (X35, X34, X33, X32) at OUT.
pub fn sm4(variant: Variant) -> Result<Program> {
    let mut g = Gen::new(variant);
    let ck = 28u8;
    let table = |bs: u32| 24 + bs as u8;
    let (t, u, addr) = (17u8, 18u8, 19u8);
    g.a.li(KEY_BASE, KEY).li(RK_BASE, RK).li(DATA_BASE, IN).li(ck, SM4_CKT);

    let transform = |g: &mut Gen, x: u8, key: bool| {
        for bs in 0..4u32 {
            if g.accel {
                g.a.crypto_imm(if key { Ssm4Ks } else { Ssm4Ed }, x, x, t, bs as i64);
            } else {
                g.lookup(u, t, bs, table(bs), true, addr);
                g.a.rr(Xor, x, x, u);
            }
        }
    };

    if !g.accel {
        for bs in 0..4 {
            g.a.li(table(bs), SM4_KT + bs as u64 * TABLE_SPACING);
        }
    }
    let mut k: [u8; 4] = [1, 2, 3, 4];
    for i in 0..4 {
        g.a.load(Lwu, k[i], KEY_BASE, 4 * i as i64).li(t, SM4_FK[i] as u64).rr(Xor, k[i], k[i], t);
    }
    for i in 0..32 {
        g.a.rr(Xor, t, k[1], k[2]).rr(Xor, t, t, k[3]);
        g.a.load(Lwu, u, ck, 4 * i as i64).rr(Xor, t, t, u);
        transform(&mut g, k[0], true);
        g.a.store(Sw, k[0], RK_BASE, 4 * i as i64);
        k = [k[1], k[2], k[3], k[0]];
    }

    if !g.accel {
        for bs in 0..4 {
            g.a.li(table(bs), SM4_T + bs as u64 * TABLE_SPACING);
        }
    }
    let mut x: [u8; 4] = [5, 6, 7, 8];
    for (i, &xi) in x.iter().enumerate() {
        g.a.load(Lwu, xi, DATA_BASE, 4 * i as i64);
    }
    for i in 0..32 {
        g.a.rr(Xor, t, x[1], x[2]).rr(Xor, t, t, x[3]);
        g.a.load(Lwu, u, RK_BASE, 4 * i as i64).rr(Xor, t, t, u);
        transform(&mut g, x[0], false);
        x = [x[1], x[2], x[3], x[0]];
    }
    for i in 0..4 {
        g.a.store(Sw, x[3 - i], DATA_BASE, OUT_OFFSET + 4 * i as i64);
    }
    g.finish()
}
