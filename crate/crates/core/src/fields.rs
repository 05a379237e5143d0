//! Arithmetic over the algebraic domains crypto instructions live in.
//!
//! GF(2) needs no type of its own: XOR, AND and rotations on `u64` are the
//! field operations and are used directly by the instruction semantics and
//! the masking engine. This module supplies the binary extension field
//! GF(2^8) (AES polynomial `x^8 + x^4 + x^3 + x + 1`) and the modular rings
//! Z/2^32 and Z/2^64.

use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Reduction polynomial with the x^8 term included.
pub const AES_POLY: u16 = 0x11b;

const fn xtime(a: u8) -> u8 {
    (a << 1) ^ if a & 0x80 != 0 { 0x1b } else { 0 }
}

// Powers of the generator 0x03. EXP is doubled so that log sums never need
// a modular reduction.
const EXP: [u8; 512] = {
    let mut exp = [0u8; 512];
    let mut x: u8 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x;
        exp[i + 255] = x;
        x ^= xtime(x);
        i += 1;
    }
    exp[510] = exp[0];
    exp[511] = exp[1];
    exp
};

const LOG: [u8; 256] = {
    let mut log = [0u8; 256];
    let mut i = 0;
    while i < 255 {
        log[EXP[i] as usize] = i as u8;
        i += 1;
    }
    log
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FieldElement8(pub u8);

impl FieldElement8 {
    pub const ZERO: Self = FieldElement8(0);
    pub const ONE: Self = FieldElement8(1);

    pub fn inv(self) -> Result<Self> {
        gf_inv(self.0).map(FieldElement8)
    }
}

// Addition in GF(2^8) is XOR.
impl Add for FieldElement8 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Self) -> Self {
        FieldElement8(self.0 ^ rhs.0)
    }
}

impl Mul for FieldElement8 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        FieldElement8(gf_mul(self.0, rhs.0))
    }
}

impl fmt::LowerHex for FieldElement8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

#[inline]
pub fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    EXP[LOG[a as usize] as usize + LOG[b as usize] as usize]
}

#[inline]
pub fn gf_inv(a: u8) -> Result<u8> {
    if a == 0 {
        return Err(Error::ZeroInverse);
    }
    Ok(EXP[255 - LOG[a as usize] as usize])
}

/// Lane-wise GF(2^8) product of two packed 64-bit words.
pub fn gf_mul_lanes(a: u64, b: u64) -> u64 {
    let (a, b) = (a.to_le_bytes(), b.to_le_bytes());
    let mut out = [0u8; 8];
    for i in 0..8 {
        out[i] = gf_mul(a[i], b[i]);
    }
    u64::from_le_bytes(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingWidth {
    W32,
    W64,
}

impl RingWidth {
    pub fn bits(self) -> u32 {
        match self {
            RingWidth::W32 => 32,
            RingWidth::W64 => 64,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            32 => Ok(RingWidth::W32),
            64 => Ok(RingWidth::W64),
            other => Err(Error::UnsupportedWidth(other)),
        }
    }

    pub fn modulus_mask(self) -> u64 {
        match self {
            RingWidth::W32 => u32::MAX as u64,
            RingWidth::W64 => u64::MAX,
        }
    }
}

/// Element of Z/2^n Z for n in {32, 64}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingElement {
    value: u64,
    width: RingWidth,
}

impl RingElement {
    /// Reduces `value` into range.
    pub fn new(value: u64, width: RingWidth) -> Self {
        RingElement { value: value & width.modulus_mask(), width }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn width(self) -> RingWidth {
        self.width
    }
}

fn same_width(a: RingElement, b: RingElement) -> Result<RingWidth> {
    if a.width != b.width {
        return Err(Error::WidthMismatch(a.width.bits(), b.width.bits()));
    }
    Ok(a.width)
}

pub fn ring_add(a: RingElement, b: RingElement) -> Result<RingElement> {
    let w = same_width(a, b)?;
    Ok(RingElement::new(a.value.wrapping_add(b.value), w))
}

pub fn ring_sub(a: RingElement, b: RingElement) -> Result<RingElement> {
    let w = same_width(a, b)?;
    Ok(RingElement::new(a.value.wrapping_sub(b.value), w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Schoolbook carry-less multiply followed by polynomial long division.
    fn gf_mul_oracle(a: u8, b: u8) -> u8 {
        let mut prod: u16 = 0;
        for i in 0..8 {
            if b >> i & 1 == 1 {
                prod ^= (a as u16) << i;
            }
        }
        for bit in (8..16).rev() {
            if prod >> bit & 1 == 1 {
                prod ^= AES_POLY << (bit - 8);
            }
        }
        prod as u8
    }

    #[test]
    fn gf_mul_examples() {
        assert_eq!(gf_mul(0x00, 0x7f), 0x00);
        assert_eq!(gf_mul(0x01, 0xc3), 0xc3);
        assert_eq!(gf_mul_oracle(0x57, 0x83), 0xc1);
        assert_eq!(gf_mul(0x57, 0x83), 0xc1);
    }

    #[test]
    fn gf_mul_matches_oracle_exhaustively() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(gf_mul(a, b), gf_mul_oracle(a, b), "{a:#x} * {b:#x}");
            }
        }
    }

    #[test]
    fn gf_inv_examples() {
        assert_eq!(gf_inv(0x01), Ok(0x01));
        // exhaustive search for the inverse of 0x02
        let found = (1..=255u8).find(|&x| gf_mul_oracle(0x02, x) == 1).unwrap();
        assert_eq!(found, 0x8d);
        assert_eq!(gf_inv(0x02), Ok(0x8d));
        assert_eq!(gf_inv(0x00), Err(Error::ZeroInverse));
        assert_eq!(FieldElement8(0).inv(), Err(Error::ZeroInverse));
    }

    #[test]
    fn gf_inv_exhaustive() {
        for a in 1..=255u8 {
            assert_eq!(gf_mul(a, gf_inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn field_laws_on_random_triples() {
        let mut s = 0x9e3779b97f4a7c15u64;
        for _ in 0..10_000 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let [a, b, c, ..] = s.to_le_bytes();
            let (a, b, c) = (FieldElement8(a), FieldElement8(b), FieldElement8(c));
            assert_eq!(a * (b * c), (a * b) * c);
            assert_eq!(a * (b + c), a * b + a * c);
        }
    }

    #[test]
    fn ring_examples() {
        let w64 = RingWidth::W64;
        let w32 = RingWidth::W32;
        let r = |v, w| RingElement::new(v, w);
        assert_eq!(ring_add(r(u64::MAX, w64), r(1, w64)).unwrap().value(), 0);
        assert_eq!(ring_add(r(0, w32), r(0, w32)).unwrap().value(), 0);
        // wide-integer oracle: exact sum in u128, then reduce
        let wide = (0x7fff_ffffu128 + 0x7fff_ffffu128) & 0xffff_ffff;
        assert_eq!(wide, 0xffff_fffe);
        assert_eq!(ring_add(r(0x7fff_ffff, w32), r(0x7fff_ffff, w32)).unwrap().value(), 0xffff_fffe);
        assert_eq!(ring_sub(r(0, w64), r(1, w64)).unwrap().value(), u64::MAX);
        assert_eq!(ring_sub(r(5, w32), r(3, w32)).unwrap().value(), 2);
        assert_eq!(ring_sub(r(0xdead, w32), r(0, w32)).unwrap().value(), 0xdead);
        assert_eq!(ring_add(r(1, w32), r(1, w64)), Err(Error::WidthMismatch(32, 64)));
        assert_eq!(ring_sub(r(1, w64), r(1, w32)), Err(Error::WidthMismatch(64, 32)));
        assert!(RingWidth::from_bits(16).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn ring_round_trip(x: u64, r: u64, wide: bool) {
            let w = if wide { RingWidth::W64 } else { RingWidth::W32 };
            let x = RingElement::new(x, w);
            let r = RingElement::new(r, w);
            prop_assert_eq!(ring_sub(ring_add(x, r).unwrap(), r).unwrap(), x);
            prop_assert!(x.value() <= w.modulus_mask());
        }
    }
}
