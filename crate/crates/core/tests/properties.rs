use proptest::prelude::*;

use modsum_broadcast::adversary::{exact_mutual_information, extract_view, Coalition, LeakageProtocol, Secret};
use modsum_broadcast::bits;
use modsum_broadcast::channel::{apply_channel_bit, phi, transmit_block, BroadcastCode, StateSequence, StateWord};
use modsum_broadcast::ledger::{ComplexityLedger, Phase};
use modsum_broadcast::mpc::{
    protocol1_modsum, protocol2_generate_zero_sum, run_zero_sum_strategy, setup_secure_channels,
};
use modsum_broadcast::rng::Tape;
use modsum_broadcast::transcript::{Transcript, Wire};

fn bit_vec(len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, len)
}

/// `(N, n, flat state bits)`.
fn states(max_n: usize, max_len: usize) -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
    (3..=max_n, 1..=max_len).prop_flat_map(|(n, len)| (Just(n), Just(len), bit_vec(n * len)))
}

fn modsum(inputs: &[u8], tape: Vec<u8>) -> u8 {
    let n = inputs.len();
    let mut ledger = ComplexityLedger::new();
    let setup = setup_secure_channels(n, &mut ledger).unwrap();
    let mut transcript = Transcript::new(n);
    let mut wire = Wire::new(&mut transcript, &mut ledger, Phase::Decode);
    protocol1_modsum(inputs, &setup, &mut Tape::new(tape), &mut wire, "", 1).unwrap().sum
}

proptest! {
    #[test]
    fn channel_is_an_involution(u in bit_vec(1..64), s in bit_vec(64)) {
        for (&ub, &sb) in u.iter().zip(&s) {
            prop_assert_eq!(apply_channel_bit(apply_channel_bit(ub, sb), sb), ub);
        }
    }

    #[test]
    fn one_flipped_share_flips_parity(word in bit_vec(3..20), k in any::<prop::sample::Index>()) {
        let before = phi(&StateWord::new(word.clone()).unwrap());
        let mut flipped = word;
        let k = k.index(flipped.len());
        flipped[k] ^= 1;
        prop_assert_eq!(phi(&StateWord::new(flipped).unwrap()), before ^ 1);
    }

    #[test]
    fn modsum_ignores_receiver_order(
        inputs in bit_vec(3..8),
        tape in bit_vec(32),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut permuted = inputs.clone();
        permuted.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let expected = bits::parity(&inputs);
        prop_assert_eq!(modsum(&inputs, tape.clone()), expected);
        prop_assert_eq!(modsum(&permuted, tape), expected);
    }

    #[test]
    fn known_states_decode_every_message((n, len, flat) in states(7, 16), seed in any::<u64>()) {
        use rand::SeedableRng;
        let code = BroadcastCode::raw(n, len).unwrap();
        let states = StateSequence::from_flat(n, len, &flat).unwrap();
        let messages = code.random_messages(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let out = transmit_block(&code, &messages, &states).unwrap();
        let gamma = states.states();
        for (i, &m) in messages.iter().enumerate() {
            prop_assert_eq!(code.decode(&out.streams[i], &gamma, i).unwrap(), Some(m));
        }
    }

    #[test]
    fn zero_sum_decoding_recovers_states((n, len, flat) in states(8, 12), tape in bit_vec(64)) {
        let states = StateSequence::from_flat(n, len, &flat).unwrap();
        let mut ledger = ComplexityLedger::new();
        let (gamma, transcript) = run_zero_sum_strategy(&states, &mut Tape::new(tape), &mut ledger).unwrap();
        prop_assert!(gamma.iter().all(|g| *g == states.states()));
        prop_assert!(transcript.validate().is_ok());
        prop_assert!(ledger.is_conserved());
    }

    #[test]
    fn zero_sum_masks_have_even_parity(n in 3usize..10, tape in bit_vec(64)) {
        let mut ledger = ComplexityLedger::new();
        let setup = setup_secure_channels(n, &mut ledger).unwrap();
        let mut transcript = Transcript::new(n);
        let mut wire = Wire::new(&mut transcript, &mut ledger, Phase::ZeroSum);
        let r = protocol2_generate_zero_sum(&setup, &mut Tape::new(tape), &mut wire).unwrap();
        prop_assert_eq!(bits::parity(r.masks()), 0);
    }

    #[test]
    fn smaller_coalitions_see_less(
        (n, len, flat) in states(6, 4),
        tape in bit_vec(64),
        members in proptest::collection::btree_set(0usize..6, 2..=4),
        protocol in prop::sample::select(LeakageProtocol::ALL.to_vec()),
    ) {
        let members: Vec<usize> = members.into_iter().filter(|&p| p < n).take(n - 2).collect();
        prop_assume!(members.len() >= 2);
        let big = Coalition::new(members.clone(), n).unwrap();
        let small = Coalition::new(members[..members.len() - 1].to_vec(), n).unwrap();
        let states = StateSequence::from_flat(n, len, &flat).unwrap();
        let transcript = protocol.run(&states, &mut Tape::new(tape)).unwrap();
        let big_view = extract_view(&transcript, &big).unwrap();
        let small_view = extract_view(&transcript, &small).unwrap();
        prop_assert_eq!(big_view.restrict(&small).unwrap(), small_view.clone());
        prop_assert!(small_view.received.iter().all(|m| big_view.received.contains(m)));
        prop_assert!(small_view.own_locals.iter().all(|l| big_view.own_locals.contains(l)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leakage_grows_with_the_coalition(
        members in proptest::collection::btree_set(1usize..4, 1..=2),
        protocol in prop::sample::select(LeakageProtocol::ALL.to_vec()),
        which in 0usize..3,
    ) {
        let members: Vec<usize> = members.into_iter().collect();
        let big = Coalition::new(members.clone(), 4).unwrap();
        let small = Coalition::new(members[..members.len() - 1].to_vec(), 4);
        let outsider = (1..4).find(|p| !members.contains(p)).unwrap();
        let secret = [Secret::Input(0), Secret::InputXor(0, outsider), Secret::Mask(0)][which];
        let big_mi = match exact_mutual_information(secret, &big, protocol, 1) {
            Ok(l) => l.mi_bits,
            // Strategy I has no masks.
            Err(_) => return Ok(()),
        };
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&big_mi));
        if let Ok(small) = small {
            let small_mi = exact_mutual_information(secret, &small, protocol, 1).unwrap().mi_bits;
            prop_assert!(small_mi <= big_mi + 1e-12, "{small_mi} > {big_mi}");
        }
    }
}
