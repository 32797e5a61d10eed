// SPDX-License-Identifier: Apache-2.0

//! DES checked against the RustCrypto implementation.

use ::des::cipher::generic_array::GenericArray;
use ::des::cipher::{BlockDecrypt, BlockEncrypt, KeyInit};
use proptest::prelude::*;

use scanlock_core::des::{
    self as ours, decrypt_block, derive_round_keys, encrypt_block, permute_word, tables, Block64, HalfBlock32, Key64,
};

fn reference_encrypt(key: u64, block: u64) -> u64 {
    let c = ::des::Des::new_from_slice(&key.to_be_bytes()).unwrap();
    let mut b = GenericArray::clone_from_slice(&block.to_be_bytes());
    c.encrypt_block(&mut b);
    u64::from_be_bytes(b.into())
}

fn reference_decrypt(key: u64, block: u64) -> u64 {
    let c = ::des::Des::new_from_slice(&key.to_be_bytes()).unwrap();
    let mut b = GenericArray::clone_from_slice(&block.to_be_bytes());
    c.decrypt_block(&mut b);
    u64::from_be_bytes(b.into())
}

#[test]
fn worked_key_matches_reference() {
    assert_eq!(reference_encrypt(0x096F2B878D906CA0, 0x0BADC0DEDEADC0DE), 0x5FB5CD14D3136003);
    let ours = encrypt_block(Key64::new(0x096F2B878D906CA0), Block64::new(0x0BADC0DEDEADC0DE));
    assert_eq!(ours.value(), 0x5FB5CD14D3136003);
}

#[test]
fn hundred_seeded_vectors_match_reference() {
    let mut rng = scanlock_core::prng::SplitMix64::new(0xDE5);
    for _ in 0..100 {
        let (k, p) = (rng.next_u64(), rng.next_u64());
        let c = encrypt_block(Key64::new(k), Block64::new(p)).value();
        assert_eq!(c, reference_encrypt(k, p), "key {k:016X} block {p:016X}");
        assert_eq!(decrypt_block(Key64::new(k), Block64::new(c)).value(), p);
    }
}

proptest! {
    #[test]
    fn encrypt_matches_reference(k in any::<u64>(), p in any::<u64>()) {
        prop_assert_eq!(encrypt_block(Key64::new(k), Block64::new(p)).value(), reference_encrypt(k, p));
    }

    #[test]
    fn decrypt_matches_reference(k in any::<u64>(), c in any::<u64>()) {
        prop_assert_eq!(decrypt_block(Key64::new(k), Block64::new(c)).value(), reference_decrypt(k, c));
    }

    #[test]
    fn decrypt_inverts_encrypt(k in any::<u64>(), p in any::<u64>()) {
        let key = Key64::new(k);
        prop_assert_eq!(decrypt_block(key, encrypt_block(key, Block64::new(p))).value(), p);
    }

    #[test]
    fn final_permutation_inverts_initial(x in any::<u64>()) {
        let b = Block64::new(x);
        prop_assert_eq!(ours::final_permutation(ours::initial_permutation(b)), b);
        prop_assert_eq!(ours::initial_permutation(ours::final_permutation(b)), b);
    }

    #[test]
    fn p_inverse_undoes_p(x in any::<u32>()) {
        let v = u64::from(x);
        prop_assert_eq!(permute_word(permute_word(v, &tables::P), &tables::P_INV), v);
        prop_assert_eq!(permute_word(permute_word(v, &tables::P_INV), &tables::P), v);
    }

    #[test]
    fn parity_bits_never_matter(k in any::<u64>(), flips in any::<u8>(), p in any::<u64>()) {
        // Bit 8 of every byte is the low bit of the byte.
        let mask = (0..8).filter(|i| flips >> i & 1 == 1).fold(0u64, |m, i| m | 1 << (8 * i));
        let a = Key64::new(k);
        let b = Key64::new(k ^ mask);
        prop_assert_eq!(derive_round_keys(a), derive_round_keys(b));
        prop_assert_eq!(encrypt_block(a, Block64::new(p)), encrypt_block(b, Block64::new(p)));
    }

    #[test]
    fn even_parity_is_idempotent(k in any::<u64>()) {
        let key = Key64::new(k).with_even_parity();
        prop_assert!(key.has_even_parity());
        prop_assert_eq!(key.with_even_parity(), key);
        for byte in key.value().to_be_bytes() {
            prop_assert_eq!(byte.count_ones() % 2, 0);
        }
    }

    #[test]
    fn hex_round_trip(x in any::<u64>()) {
        let b = Block64::new(x);
        let text = b.to_hex();
        prop_assert_eq!(text.len(), 16);
        prop_assert!(text.chars().all(|c| c.is_ascii_digit() || c.is_ascii_uppercase()));
        prop_assert_eq!(Block64::from_hex(&text).unwrap(), b);
        prop_assert_eq!(Block64::from_hex(&text.to_lowercase()).unwrap(), b);
    }

    #[test]
    fn split_join_round_trip(x in any::<u64>()) {
        let b = Block64::new(x);
        let (l, r) = b.split();
        prop_assert_eq!(Block64::join(l, r), b);
        prop_assert_eq!(l, HalfBlock32::new((x >> 32) as u32));
    }
}
