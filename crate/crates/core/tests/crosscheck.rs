//! Cross-checks against third-party and independent implementations.

use cryptrisc::bench::{run_benchmark, BenchInput, Benchmark, Variant};
use cryptrisc::crypto_isa::{compose_sha256, compose_sha512, exec_crypto, CryptoOp};
use cryptrisc::reference::{self, AesState};
use proptest::prelude::*;
use sha2::{Digest, Sha256, Sha512};

fn halves(s: &AesState) -> (u64, u64) {
    (u64::from_le_bytes(s[..8].try_into().unwrap()), u64::from_le_bytes(s[8..].try_into().unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sha2_crate_agrees(msg in proptest::collection::vec(any::<u8>(), 0..=200)) {
        let want256 = Sha256::digest(&msg);
        let want512 = Sha512::digest(&msg);
        prop_assert_eq!(&reference::sha256(&msg)[..], &want256[..]);
        prop_assert_eq!(&compose_sha256(&msg)[..], &want256[..]);
        prop_assert_eq!(&reference::sha512(&msg)[..], &want512[..]);
        prop_assert_eq!(&compose_sha512(&msg)[..], &want512[..]);
    }

    #[test]
    fn sha2_programs_agree_with_crate(msg in proptest::collection::vec(any::<u8>(), 0..=55)) {
        let input = BenchInput { key: Vec::new(), data: msg.clone() };
        for v in [Variant::Baseline, Variant::Accelerated] {
            let out = run_benchmark(Benchmark::Sha256, v, &input, false, 1).unwrap().output;
            prop_assert_eq!(&out[..], &Sha256::digest(&msg)[..]);
            let out = run_benchmark(Benchmark::Sha512, v, &input, true, 1).unwrap().output;
            prop_assert_eq!(&out[..], &Sha512::digest(&msg)[..]);
        }
    }

    #[test]
    fn encs_and_encsm_match_round_steps(state in any::<[u8; 16]>()) {
        let (lo, hi) = halves(&state);
        let mut s = state;
        reference::shift_rows(&mut s);
        reference::sub_bytes(&mut s);
        let last = halves(&s);
        prop_assert_eq!(exec_crypto(CryptoOp::Saes64Encs, lo, hi, None).unwrap(), last.0);
        prop_assert_eq!(exec_crypto(CryptoOp::Saes64Encs, hi, lo, None).unwrap(), last.1);
        reference::mix_columns(&mut s);
        let mid = halves(&s);
        prop_assert_eq!(exec_crypto(CryptoOp::Saes64Encsm, lo, hi, None).unwrap(), mid.0);
        prop_assert_eq!(exec_crypto(CryptoOp::Saes64Encsm, hi, lo, None).unwrap(), mid.1);
    }

    #[test]
    fn im_inverts_mix_columns(state in any::<[u8; 16]>()) {
        let mut s = state;
        reference::mix_columns(&mut s);
        let (lo, hi) = halves(&s);
        let back = (
            exec_crypto(CryptoOp::Saes64Im, lo, 0, None).unwrap(),
            exec_crypto(CryptoOp::Saes64Im, hi, 0, None).unwrap(),
        );
        prop_assert_eq!(back, halves(&state));
    }

    #[test]
    fn aes_decrypt_inverts_encrypt(key in any::<[u8; 32]>(), block in any::<[u8; 16]>(), len in 0usize..3) {
        let key = &key[..16 + 8 * len];
        let ct = cryptrisc::crypto_isa::aes_encrypt(key, &block).unwrap();
        prop_assert_eq!(ct, reference::aes_encrypt(key, &block));
        prop_assert_eq!(cryptrisc::crypto_isa::aes_decrypt(key, &ct).unwrap(), block);
    }
}
