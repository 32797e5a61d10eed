// SPDX-License-Identifier: Apache-2.0

//! Emulator registers, scan frames and the chain attack, cross-checked
//! against the plain cipher.

use proptest::prelude::*;

use scanlock_core::des::{self, derive_round_keys, encrypt_block, Block64, Key64};
use scanlock_core::emulator::{
    input_bit_index, l_bit_index, r_bit_index, Emulator, Mode, ScanDevice, CHAIN_LEN, FULL_RUN_CYCLES,
};
use scanlock_core::scan_attack::{
    full_scan_attack, invert_key_schedule, map_scan_chain, recover_point_c, SPECIAL_INPUTS,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frames_are_registers_seen_through_the_chain(seed in any::<u64>(), key in any::<u64>(), input in any::<u64>(), cycles in 0usize..24) {
        let mut emu = Emulator::new(seed, Some(Key64::new(key)));
        emu.reset();
        for _ in 0..cycles {
            emu.clock(Block64::new(input));
            let regs = emu.registers().to_bits();
            let frame = emu.scan_out();
            for (idx, &bit) in regs.iter().enumerate() {
                prop_assert_eq!(frame.bit(emu.scan_permutation().position_of(idx)), bit);
            }
        }
    }

    #[test]
    fn chain_order_is_a_bijection(seed in any::<u64>()) {
        let emu = Emulator::with_seed(seed);
        let mut seen = vec![false; CHAIN_LEN];
        for idx in 0..CHAIN_LEN {
            let p = emu.scan_permutation().position_of(idx);
            prop_assert!(!seen[p]);
            seen[p] = true;
        }
    }

    #[test]
    fn full_run_matches_cipher(seed in any::<u64>(), key in any::<u64>(), input in any::<u64>()) {
        let k = Key64::new(key);
        let mut emu = Emulator::new(seed, Some(k));
        let enc = emu.run(&Block64::new(input).to_hex(), Mode::Encrypt, FULL_RUN_CYCLES).unwrap();
        prop_assert_eq!(enc.frames.len(), FULL_RUN_CYCLES);
        let expected = encrypt_block(k, Block64::new(input));
        prop_assert_eq!(&enc.output, &expected.to_hex());
        let dec = emu.run(&enc.output, Mode::Decrypt, FULL_RUN_CYCLES).unwrap();
        prop_assert_eq!(dec.output, Block64::new(input).to_hex());
    }

    #[test]
    fn generated_keys_have_even_parity(seed in any::<u64>()) {
        prop_assert!(Emulator::with_seed(seed).key().has_even_parity());
    }

    #[test]
    fn key_schedule_inversion_round_trips(key in any::<u64>()) {
        let k = Key64::new(key).with_even_parity();
        let rk1 = derive_round_keys(k).get(1);
        let candidates = invert_key_schedule(rk1);
        prop_assert_eq!(candidates.len(), 256);
        prop_assert!(candidates.contains(&k));
        prop_assert!(candidates.iter().all(|c| derive_round_keys(*c).get(1) == rk1));
    }
}

#[test]
fn hundred_keys_invert_through_round_key_one() {
    let mut rng = scanlock_core::prng::SplitMix64::new(42);
    for _ in 0..100 {
        let k = Key64::new(rng.next_u64()).with_even_parity();
        let candidates = invert_key_schedule(derive_round_keys(k).get(1));
        assert_eq!(candidates.len(), 256);
        assert!(candidates.contains(&k));
    }
}

#[test]
fn recovered_map_matches_the_true_chain() {
    for seed in [0, 1, 6, 77, 1 << 40] {
        let mut emu = Emulator::with_seed(seed);
        let map = map_scan_chain(&mut emu).unwrap();
        let pos = |idx| emu.scan_permutation().position_of(idx);
        for n in 1..=64 {
            assert_eq!(map.input_indices[n - 1], pos(input_bit_index(n)));
        }
        for n in 1..=32 {
            assert_eq!(map.l_indices[n - 1], pos(l_bit_index(n)));
            assert_eq!(map.r_indices[n - 1], pos(r_bit_index(n)));
        }
    }
}

#[test]
fn point_c_equals_sbox_output_of_round_one() {
    for seed in [3, 6, 9] {
        let mut emu = Emulator::with_seed(seed);
        let map = map_scan_chain(&mut emu).unwrap();
        let k1 = derive_round_keys(emu.key()).get(1);
        for input in SPECIAL_INPUTS {
            let c = recover_point_c(&mut emu, &map, input).unwrap();
            let (_, r0) = des::initial_permutation(Block64::from_hex(input).unwrap()).split();
            assert_eq!(c, des::sbox_substitute(des::expand(r0) ^ k1));
        }
    }
}

#[test]
fn twenty_generated_keys_are_recovered() {
    for seed in 100..120 {
        let mut emu = Emulator::with_seed(seed);
        let report = full_scan_attack(&mut emu).unwrap();
        assert_eq!(report.recovered_key, emu.key(), "seed {seed}");
        assert_eq!(report.round_key_1, derive_round_keys(emu.key()).get(1));
    }
}
