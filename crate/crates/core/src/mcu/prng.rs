use crate::error::{Error, Result};

/// 64-bit Fibonacci LFSR with characteristic polynomial
/// x^64 + x^63 + x^61 + x^60 + 1.
///
/// Bit `i` of the state holds the sequence bit produced `i + 1` steps ago,
/// so each step shifts left and inserts the feedback at bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrngState {
    state: u64,
}

impl PrngState {
    pub fn new(seed: u64) -> Result<Self> {
        if seed == 0 {
            return Err(Error::ZeroPrngState);
        }
        Ok(PrngState { state: seed })
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// One shift; returns the new bit.
    pub fn step(&mut self) -> u64 {
        let s = self.state;
        let bit = (s ^ (s >> 2) ^ (s >> 3) ^ (s >> 63)) & 1;
        self.state = (s << 1) | bit;
        bit
    }

    /// 64 fresh bits: the register contents after 64 shifts.
    pub fn next_u64(&mut self) -> u64 {
        for _ in 0..64 {
            self.step();
        }
        self.state
    }

    /// A word whose every byte lane is nonzero, by per-lane rejection.
    pub fn next_nonzero_lanes(&mut self) -> u64 {
        let mut a = self.next_u64();
        while let Some(lanes) = zero_lanes(a) {
            let fill = self.next_u64();
            a |= fill & lanes;
        }
        a
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..n.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

/// Mask of the byte lanes of `a` that are zero, or `None` if there are none.
fn zero_lanes(a: u64) -> Option<u64> {
    let lanes = (0..8).filter(|i| (a >> (8 * i)) & 0xff == 0).fold(0u64, |m, i| m | (0xff << (8 * i)));
    (lanes != 0).then_some(lanes)
}

pub fn prng_next(mut s: PrngState) -> (u64, PrngState) {
    let v = s.next_u64();
    (v, s)
}

/// Independent randomness streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Mask,
    Noise,
    Input,
    Shuffle,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Mask => 0x6d61736b,
            Stream::Noise => 0x6e6f6973,
            Stream::Input => 0x696e7075,
            Stream::Shuffle => 0x73687566,
        }
    }
}

/// Seed for one stream. An LFSR is linear, so seeds that differ in a few
/// bits would otherwise give correlated streams; a SplitMix64 finalizer
/// decorrelates them first.
pub fn derive_seed(seed: u64, stream: Stream) -> PrngState {
    let mut z = seed ^ stream.tag().wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    PrngState::new(if z == 0 { 1 } else { z }).expect("nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-serial model kept as an explicit sequence a_0, a_1, ...
    struct SerialLfsr {
        bits: Vec<u8>,
    }

    impl SerialLfsr {
        fn new(seed: u64) -> Self {
            // state bit i = a_{t-1-i}: the oldest bit is bit 63.
            let bits = (0..64).rev().map(|i| ((seed >> i) & 1) as u8).collect();
            SerialLfsr { bits }
        }

        fn next_word(&mut self) -> u64 {
            for _ in 0..64 {
                let t = self.bits.len();
                let b = self.bits[t - 1] ^ self.bits[t - 3] ^ self.bits[t - 4] ^ self.bits[t - 64];
                self.bits.push(b);
            }
            let t = self.bits.len();
            (0..64).fold(0u64, |w, i| w | (self.bits[t - 1 - i] as u64) << i)
        }
    }

    #[test]
    fn zero_seed_rejected() {
        assert_eq!(PrngState::new(0), Err(Error::ZeroPrngState));
    }

    #[test]
    fn matches_serial_model() {
        for seed in [1u64, 0xdead_beef, u64::MAX, 0x8000_0000_0000_0000] {
            let mut fast = PrngState::new(seed).unwrap();
            let mut slow = SerialLfsr::new(seed);
            for _ in 0..50 {
                assert_eq!(fast.next_u64(), slow.next_word());
            }
        }
    }

    #[test]
    fn golden_first_output() {
        let (v, _) = prng_next(PrngState::new(1).unwrap());
        assert_eq!(v, SerialLfsr::new(1).next_word());
        assert_eq!(v, 0xc71c_71c7_1c71_c71d);
    }

    #[test]
    fn deterministic() {
        let s = PrngState::new(77).unwrap();
        let (a1, s1) = prng_next(s);
        let (a2, _) = prng_next(s1);
        let (b1, t1) = prng_next(PrngState::new(77).unwrap());
        let (b2, _) = prng_next(t1);
        assert_eq!((a1, a2), (b1, b2));
    }

    #[test]
    fn no_short_cycle() {
        let start = PrngState::new(0x0123_4567_89ab_cdef).unwrap();
        let mut s = start;
        for _ in 0..1_000_000 {
            s.step();
            assert_ne!(s, start);
            assert_ne!(s.state(), 0);
        }
    }

    fn clmul_mod(a: u128, b: u128, poly: u128) -> u128 {
        let mut r = 0u128;
        for i in (0..64).rev() {
            r <<= 1;
            if r >> 64 & 1 == 1 {
                r ^= poly;
            }
            if b >> i & 1 == 1 {
                r ^= a;
            }
        }
        r
    }

    fn xpow(e: u128, poly: u128) -> u128 {
        let mut result = 1u128;
        let mut base = 2u128;
        let mut e = e;
        while e != 0 {
            if e & 1 == 1 {
                result = clmul_mod(result, base, poly);
            }
            base = clmul_mod(base, base, poly);
            e >>= 1;
        }
        result
    }

    #[test]
    fn polynomial_is_primitive() {
        let poly: u128 = (1 << 64) | (1 << 63) | (1 << 61) | (1 << 60) | 1;
        let order: u128 = (1 << 64) - 1;
        let factors = [3u128, 5, 17, 257, 641, 65537, 6700417];
        assert_eq!(factors.iter().product::<u128>(), order);
        assert_eq!(xpow(order, poly), 1);
        for q in factors {
            assert_ne!(xpow(order / q, poly), 1, "x^((2^64-1)/{q}) = 1");
        }
    }

    #[test]
    fn nonzero_lanes_everywhere() {
        let mut s = PrngState::new(5).unwrap();
        for _ in 0..100_000 {
            let a = s.next_nonzero_lanes();
            assert!(a.to_le_bytes().iter().all(|&b| b != 0));
        }
    }

    #[test]
    fn derived_streams_differ() {
        let a = derive_seed(42, Stream::Mask);
        let b = derive_seed(42, Stream::Noise);
        let c = derive_seed(43, Stream::Mask);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, Stream::Mask));
    }

    #[test]
    fn below_is_in_range() {
        let mut s = PrngState::new(9).unwrap();
        assert!((0..1000).all(|_| s.below(7) < 7));
    }
}
