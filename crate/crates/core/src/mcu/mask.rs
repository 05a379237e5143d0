use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdl::{MaskMetadata, MaskMode};
use crate::fields::{gf_inv, gf_mul, gf_mul_lanes};

use super::prng::PrngState;

/// The concrete transform applied to each share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskScheme {
    /// x ⊕ r
    Boolean,
    /// x + r mod 2^w, lane-wise for w = 32
    Arithmetic,
    /// r·x in GF(2^8), per byte lane
    Multiplicative,
    /// A·x ⊕ B in GF(2^8), per byte lane
    Affine,
}

impl MaskScheme {
    pub fn for_mode(mode: MaskMode) -> Result<Self> {
        match mode {
            MaskMode::None => Err(Error::MaskingBypassed),
            MaskMode::Boolean => Ok(MaskScheme::Boolean),
            MaskMode::Affine => Ok(MaskScheme::Affine),
            MaskMode::Arithmetic => Ok(MaskScheme::Arithmetic),
        }
    }

    fn check_width(self, width: u32) -> Result<()> {
        let ok = match self {
            MaskScheme::Boolean => matches!(width, 8 | 32 | 64),
            MaskScheme::Arithmetic => matches!(width, 32 | 64),
            MaskScheme::Multiplicative | MaskScheme::Affine => width == 8,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedWidth(width))
        }
    }
}

/// Natural masking domain for an operand of `word_bits` under `mode`.
pub fn domain_width_for(mode: MaskMode, word_bits: u32) -> u32 {
    match mode {
        MaskMode::Affine => 8,
        MaskMode::Arithmetic => word_bits,
        MaskMode::Boolean | MaskMode::None => 64,
    }
}

/// A masked operand.
///
/// Shares are layered: `shares[0] = T_0(x)` and `shares[i] = T_i(shares[i-1])`,
/// with `masks[i] = (A_i, B_i)` describing `T_i`. The value driven onto the
/// bus is the outermost share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedOperand {
    pub meta: MaskMetadata,
    pub scheme: MaskScheme,
    pub domain_width: u32,
    pub shares: Vec<u64>,
    pub masks: Vec<(u64, u64)>,
}

impl MaskedOperand {
    /// Outermost share.
    pub fn bus_value(&self) -> u64 {
        *self.shares.last().expect("at least one share")
    }
}

pub fn affine_lane(x: u8, a: u8, b: u8) -> u8 {
    gf_mul(a, x) ^ b
}

pub fn unaffine_lane(y: u8, a: u8, b: u8) -> Result<u8> {
    Ok(gf_mul(gf_inv(a)?, y ^ b))
}

fn lane_add32(x: u64, r: u64, sub: bool) -> u64 {
    let f = |a: u32, b: u32| if sub { a.wrapping_sub(b) } else { a.wrapping_add(b) };
    let lo = f(x as u32, r as u32) as u64;
    let hi = f((x >> 32) as u32, (r >> 32) as u32) as u64;
    lo | hi << 32
}

fn lane_inverses(a: u64) -> Result<u64> {
    let mut inv = 0u64;
    for (i, &lane) in a.to_le_bytes().iter().enumerate() {
        let l = gf_inv(lane).map_err(|_| Error::CorruptedOperand("zero multiplicative mask lane"))?;
        inv |= (l as u64) << (8 * i);
    }
    Ok(inv)
}

fn apply(scheme: MaskScheme, width: u32, x: u64, (a, b): (u64, u64)) -> u64 {
    match scheme {
        MaskScheme::Boolean => x ^ b,
        MaskScheme::Arithmetic if width == 32 => lane_add32(x, b, false),
        MaskScheme::Arithmetic => x.wrapping_add(b),
        MaskScheme::Multiplicative | MaskScheme::Affine => gf_mul_lanes(a, x) ^ b,
    }
}

fn invert(scheme: MaskScheme, width: u32, y: u64, (a, b): (u64, u64)) -> Result<u64> {
    Ok(match scheme {
        MaskScheme::Boolean => y ^ b,
        MaskScheme::Arithmetic if width == 32 => lane_add32(y, b, true),
        MaskScheme::Arithmetic => y.wrapping_sub(b),
        MaskScheme::Multiplicative | MaskScheme::Affine => gf_mul_lanes(lane_inverses(a)?, y ^ b),
    })
}

fn sample(scheme: MaskScheme, rng: &mut PrngState) -> (u64, u64) {
    match scheme {
        MaskScheme::Boolean | MaskScheme::Arithmetic => (1, rng.next_u64()),
        MaskScheme::Multiplicative => (rng.next_nonzero_lanes(), 0),
        MaskScheme::Affine => {
            let a = rng.next_nonzero_lanes();
            (a, rng.next_u64())
        }
    }
}

/// Mask `x` with the scheme selected by `meta.mode`.
pub fn mask(x: u64, meta: MaskMetadata, domain_width: u32, rng: &mut PrngState) -> Result<MaskedOperand> {
    mask_with(x, MaskScheme::for_mode(meta.mode)?, meta, domain_width, rng)
}

/// Mask `x` with an explicit scheme, e.g. plain multiplicative masking.
pub fn mask_with(
    x: u64,
    scheme: MaskScheme,
    meta: MaskMetadata,
    domain_width: u32,
    rng: &mut PrngState,
) -> Result<MaskedOperand> {
    if !meta.is_masked() {
        return Err(Error::MaskingBypassed);
    }
    if !(1..=3).contains(&meta.shares) {
        return Err(Error::BadPolicy(format!("share count {} outside 1..=3", meta.shares)));
    }
    scheme.check_width(domain_width)?;
    let k = meta.shares as usize;
    let mut shares = Vec::with_capacity(k);
    let mut masks = Vec::with_capacity(k);
    let mut v = x;
    for _ in 0..k {
        let m = sample(scheme, rng);
        v = apply(scheme, domain_width, v, m);
        shares.push(v);
        masks.push(m);
    }
    Ok(MaskedOperand { meta, scheme, domain_width, shares, masks })
}

pub fn unmask(m: &MaskedOperand) -> Result<u64> {
    if m.shares.is_empty() || m.shares.len() != m.masks.len() {
        return Err(Error::CorruptedOperand("share and mask counts differ"));
    }
    match m.scheme {
        MaskScheme::Boolean | MaskScheme::Arithmetic if m.masks.iter().any(|&(a, _)| a != 1) => {
            return Err(Error::CorruptedOperand("additive mask with A != 1"));
        }
        MaskScheme::Multiplicative if m.masks.iter().any(|&(_, b)| b != 0) => {
            return Err(Error::CorruptedOperand("multiplicative mask with B != 0"));
        }
        _ => {}
    }
    let mut v = m.bus_value();
    for i in (0..m.shares.len()).rev() {
        v = invert(m.scheme, m.domain_width, v, m.masks[i])?;
        if i > 0 && v != m.shares[i - 1] {
            return Err(Error::CorruptedOperand("share layers disagree"));
        }
    }
    Ok(v)
}

/// Fresh masks over the same value.
pub fn remask(m: &MaskedOperand, rng: &mut PrngState) -> Result<MaskedOperand> {
    let x = unmask(m)?;
    mask_with(x, m.scheme, m.meta, m.domain_width, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gf_mul;
    use proptest::prelude::*;

    fn meta(mode: MaskMode, shares: u8) -> MaskMetadata {
        MaskMetadata { mode, shares }
    }

    fn rng() -> PrngState {
        PrngState::new(0x5eed).unwrap()
    }

    #[test]
    fn single_share_examples() {
        let boolean = apply(MaskScheme::Boolean, 64, 0xa5, (1, 0x0f));
        assert_eq!(boolean, 0xaa);
        assert_eq!(apply(MaskScheme::Arithmetic, 64, u64::MAX, (1, 1)), 0);
        assert_eq!(apply(MaskScheme::Arithmetic, 32, 0xffff_ffff, (1, 1)), 0);
        assert_eq!(affine_lane(0x57, 0x83, 0x00), gf_mul(0x57, 0x83));
        assert_eq!(affine_lane(0x57, 0x83, 0x00), 0xc1);
    }

    #[test]
    fn extremes_round_trip() {
        let mut r = rng();
        for x in [0, u64::MAX] {
            let m = mask(x, meta(MaskMode::Boolean, 1), 64, &mut r).unwrap();
            assert_eq!(unmask(&m).unwrap(), x);
        }
        let x = 0x0123_4567_89ab_cdef;
        let m = mask(x, meta(MaskMode::Arithmetic, 1), 64, &mut r).unwrap();
        assert_eq!(unmask(&m).unwrap(), x);
    }

    #[test]
    fn bypass_and_width_errors() {
        let mut r = rng();
        assert_eq!(mask(1, MaskMetadata::NONE, 64, &mut r), Err(Error::MaskingBypassed));
        assert_eq!(mask(1, meta(MaskMode::Affine, 1), 64, &mut r), Err(Error::UnsupportedWidth(64)));
        assert_eq!(mask(1, meta(MaskMode::Arithmetic, 1), 16, &mut r), Err(Error::UnsupportedWidth(16)));
        assert!(mask(1, meta(MaskMode::Boolean, 4), 64, &mut r).is_err());
    }

    #[test]
    fn corrupted_affine_mask() {
        let mut r = rng();
        let mut m = mask(7, meta(MaskMode::Affine, 1), 8, &mut r).unwrap();
        m.masks[0].0 &= !0xff00;
        assert_eq!(unmask(&m), Err(Error::CorruptedOperand("zero multiplicative mask lane")));
    }

    #[test]
    fn tampered_layers_detected() {
        let mut r = rng();
        let mut m = mask(7, meta(MaskMode::Boolean, 2), 64, &mut r).unwrap();
        m.shares[0] ^= 1;
        assert!(unmask(&m).is_err());
    }

    #[test]
    fn exhaustive_affine_lane() {
        for a in 1..=255u8 {
            let inv = gf_inv(a).unwrap();
            for b in 0..=255u8 {
                for x in 0..=255u8 {
                    let y = affine_lane(x, a, b);
                    assert_eq!(gf_mul(inv, y ^ b), x);
                }
            }
        }
        assert_eq!(unaffine_lane(0xc1, 0x83, 0).unwrap(), 0x57);
        assert!(unaffine_lane(1, 0, 0).is_err());
    }

    #[test]
    fn k_shares_reconstruct() {
        let mut r = rng();
        let cases = [
            (MaskScheme::Boolean, MaskMode::Boolean, 64),
            (MaskScheme::Arithmetic, MaskMode::Arithmetic, 32),
            (MaskScheme::Arithmetic, MaskMode::Arithmetic, 64),
            (MaskScheme::Multiplicative, MaskMode::Affine, 8),
            (MaskScheme::Affine, MaskMode::Affine, 8),
        ];
        for (scheme, mode, width) in cases {
            for k in 1..=3 {
                for _ in 0..2000 {
                    let x = r.next_u64();
                    let m = mask_with(x, scheme, meta(mode, k), width, &mut r).unwrap();
                    assert_eq!(m.shares.len(), k as usize);
                    assert_eq!(m.masks.len(), k as usize);
                    assert_eq!(unmask(&m).unwrap(), x);
                    let again = remask(&m, &mut r).unwrap();
                    assert_eq!(unmask(&again).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn fold_recombination() {
        let mut r = rng();
        let x = 0xfeed_face_cafe_beef;
        let b = mask(x, meta(MaskMode::Boolean, 3), 64, &mut r).unwrap();
        assert_eq!(b.masks.iter().fold(b.bus_value(), |v, &(_, m)| v ^ m), x);
        let a = mask(x, meta(MaskMode::Arithmetic, 3), 64, &mut r).unwrap();
        assert_eq!(a.masks.iter().fold(a.bus_value(), |v, &(_, m)| v.wrapping_sub(m)), x);
    }

    #[test]
    fn affine_a_never_zero() {
        let mut r = rng();
        for _ in 0..100_000 {
            let m = mask(0, meta(MaskMode::Affine, 1), 8, &mut r).unwrap();
            assert!(m.masks[0].0.to_le_bytes().iter().all(|&l| l != 0));
        }
    }

    #[test]
    fn remask_deterministic_and_fresh() {
        let m = mask(99, meta(MaskMode::Affine, 1), 8, &mut rng()).unwrap();
        let mut r1 = PrngState::new(3).unwrap();
        let mut r2 = PrngState::new(3).unwrap();
        assert_eq!(remask(&m, &mut r1).unwrap(), remask(&m, &mut r2).unwrap());
        let mut r = PrngState::new(4).unwrap();
        let same = (0..1000).filter(|_| remask(&m, &mut r).unwrap().masks == m.masks).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn boolean_share_byte_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut r = rng();
        let m = mask(0x1234, meta(MaskMode::Boolean, 1), 64, &mut r).unwrap();
        let n = 10_000;
        let mut counts = [0u32; 256];
        let mut cur = m;
        for _ in 0..n {
            cur = remask(&cur, &mut r).unwrap();
            counts[(cur.bus_value() & 0xff) as usize] += 1;
        }
        let e = n as f64 / 256.0;
        let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let bound = ChiSquared::new(255.0).unwrap().inverse_cdf(0.99);
        assert!(chi < bound, "chi-square {chi} >= {bound}");
    }

    #[test]
    fn boolean_share_weight_independent_of_value() {
        let mut r = rng();
        let weights = |x: u64, r: &mut PrngState| -> Vec<f64> {
            (0..10_000)
                .map(|_| mask(x, meta(MaskMode::Boolean, 1), 64, r).unwrap().bus_value().count_ones() as f64)
                .collect()
        };
        let a = weights(0, &mut r);
        let b = weights(u64::MAX, &mut r);
        let stats = |v: &[f64]| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0), n)
        };
        let (ma, va, na) = stats(&a);
        let (mb, vb, nb) = stats(&b);
        let t = (ma - mb) / (va / na + vb / nb).sqrt();
        assert!(t.abs() < 4.5, "t = {t}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn round_trip_any_mode(x: u64, seed in 1u64.., k in 1u8..=3, which in 0usize..4) {
            let (mode, width) = [
                (MaskMode::Boolean, 64),
                (MaskMode::Arithmetic, 32),
                (MaskMode::Arithmetic, 64),
                (MaskMode::Affine, 8),
            ][which];
            let mut r = PrngState::new(seed).unwrap();
            let m = mask(x, meta(mode, k), width, &mut r).unwrap();
            prop_assert_eq!(unmask(&m).unwrap(), x);
        }
    }
}
