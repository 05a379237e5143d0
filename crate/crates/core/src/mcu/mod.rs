//! Masking control unit: operand masking transforms and their randomness source.

mod mask;
mod prng;

pub use mask::{
    affine_lane, domain_width_for, mask, mask_with, remask, unaffine_lane, unmask, MaskScheme, MaskedOperand,
};
pub use prng::{derive_seed, prng_next, PrngState, Stream};
