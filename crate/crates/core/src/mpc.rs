//! Classical secure modulo summation among the receivers.
//!
//! [`protocol1_modsum`] is the chained share protocol: receivers `0..N-3` split their
//! input plus everything received so far into fresh shares for every later receiver,
//! receiver `N-2` forwards a single share to receiver `N-1`, and receiver `N-1` adds up
//! and broadcasts the sum. Every delivery travels over a secure point-to-point channel.
//!
//! [`protocol2_generate_zero_sum`] runs the summation on uniform coins `Y_i` and turns
//! the result into masks `r` with zero parity; [`protocol2_decode_states`] then lets each
//! receiver publish `x_{i,t} + r_i` for the whole block, from which everyone recovers
//! `s_t` while the masks cancel.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::bits::{self, add_mod, sub_mod};
use crate::channel::{check_receivers, StateSequence};
use crate::error::{Error, Result};
use crate::ledger::{ComplexityLedger, Counts, Phase, Resource};
use crate::rng::{BitSource, SeedTree};
use crate::transcript::{Transcript, Wire};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecurityLevel {
    /// Rests on the hardness assumptions of the public-key scheme used for setup.
    Conditional,
    Unconditional,
}

/// Pairwise secure channels.
///
/// Forward channels among receivers `0..N-2` are set up explicitly, one key transfer
/// each, giving `(N-1)(N-2)/2` channels. The links into the last receiver (which only
/// ever receives shares) are modelled as present without a separate key count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecureChannelSetup {
    receivers: usize,
    pairs: BTreeSet<(usize, usize)>,
    sink_links: bool,
    pub key_messages_sent: u64,
    pub security: SecurityLevel,
}

impl SecureChannelSetup {
    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn channel_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn covers(&self, from: usize, to: usize) -> bool {
        let (a, b) = if from < to { (from, to) } else { (to, from) };
        if b == self.receivers - 1 {
            return self.sink_links;
        }
        self.pairs.contains(&(a, b))
    }

    /// Copy of this setup with one channel torn down.
    pub fn without(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        let key = if a < b { (a, b) } else { (b, a) };
        if key.1 == self.receivers - 1 {
            out.sink_links = false;
        } else {
            out.pairs.remove(&key);
        }
        out
    }
}

/// Number of forward channels Protocol 1 needs with public-key setup.
pub fn secure_channel_count(receivers: usize) -> usize {
    (receivers - 1) * (receivers - 2) / 2
}

pub fn setup_secure_channels(receivers: usize, ledger: &mut ComplexityLedger) -> Result<SecureChannelSetup> {
    check_receivers(receivers)?;
    let mut pairs = BTreeSet::new();
    for a in 0..receivers - 1 {
        for b in a + 1..receivers - 1 {
            pairs.insert((a, b));
            ledger.record(Phase::Setup, Resource::KeySetupMessage, 1);
        }
    }
    debug_assert_eq!(pairs.len(), secure_channel_count(receivers));
    Ok(SecureChannelSetup {
        receivers,
        key_messages_sent: pairs.len() as u64,
        pairs,
        sink_links: true,
        security: SecurityLevel::Conditional,
    })
}

/// The shares `z_{i,j}` (sender `i`, recipient `j > i`) and partial sums `w_i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShareMatrix {
    pub z: BTreeMap<(usize, usize), u8>,
    pub w: Vec<u8>,
}

impl ShareMatrix {
    pub fn get(&self, from: usize, to: usize) -> u8 {
        self.z[&(from, to)]
    }

    /// Checks the share relations of the chained protocol against the inputs.
    pub fn satisfies_relations(&self, inputs: &[u8], sum: u8) -> bool {
        let n = inputs.len();
        if self.z.keys().any(|&(i, j)| j <= i) {
            return false;
        }
        if self.w.first() != Some(&0) {
            return false;
        }
        for i in 0..n - 2 {
            let w: u8 = (0..i).fold(0, |acc, j| add_mod(acc, self.get(j, i)));
            if self.w[i] != w {
                return false;
            }
            let out: u8 = (i + 1..n).fold(0, |acc, j| add_mod(acc, self.get(i, j)));
            if add_mod(inputs[i], w) != out {
                return false;
            }
        }
        let into_last_but_one = (0..n - 2).fold(inputs[n - 2], |acc, j| add_mod(acc, self.get(j, n - 2)));
        if self.get(n - 2, n - 1) != into_last_but_one {
            return false;
        }
        (0..n - 1).fold(inputs[n - 1], |acc, j| add_mod(acc, self.get(j, n - 1))) == sum
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModSumRun {
    pub sum: u8,
    /// The value each receiver ends up holding.
    pub held: Vec<u8>,
    pub shares: ShareMatrix,
}

/// Point-to-point deliveries made by one run: `sum_{i=1}^{N-2} (N-i) + 1`.
pub fn protocol1_p2p_count(receivers: usize) -> u64 {
    let n = receivers as u64;
    (1..=n - 2).map(|i| n - i).sum::<u64>() + 1
}

/// Message bound of the optimized collusion-threshold protocol, `N * ceil((t+1)/2)`.
pub fn threshold_protocol_message_bound(receivers: usize, threshold: usize) -> u64 {
    (receivers * (threshold + 1).div_ceil(2)) as u64
}

/// Secure modulo-2 sum of one input bit per receiver.
///
/// Tags are prefixed with `label` so that several runs can share one transcript.
/// Rounds start at `first_round`; receiver `i` sends in round `first_round + i` and the
/// final broadcast happens in round `first_round + N - 1`.
pub fn protocol1_modsum<B: BitSource + ?Sized>(
    inputs: &[u8],
    setup: &SecureChannelSetup,
    coins: &mut B,
    wire: &mut Wire<'_>,
    label: &str,
    first_round: u32,
) -> Result<ModSumRun> {
    let n = inputs.len();
    check_receivers(n)?;
    bits::check_bits(inputs, "protocol input")?;
    if setup.receivers() != n {
        return Err(Error::Shape(format!(
            "secure channels set up for {} receivers, inputs for {n}",
            setup.receivers()
        )));
    }
    if wire.parties() != n {
        return Err(Error::Shape(format!("transcript has {} parties, inputs for {n}", wire.parties())));
    }

    let mut shares = ShareMatrix { z: BTreeMap::new(), w: vec![0; n] };
    let deliver = |wire: &mut Wire<'_>, shares: &mut ShareMatrix, round: u32, from: usize, to: usize, value: u8| {
        if !setup.covers(from, to) {
            return Err(Error::MissingSecureChannel { from, to });
        }
        shares.z.insert((from, to), value);
        wire.send(round, from, to, format!("{label}z[{from},{to}]"), vec![value]);
        Ok(())
    };

    for i in 0..n - 2 {
        let round = first_round + i as u32;
        let w = (0..i).fold(0, |acc, j| add_mod(acc, shares.get(j, i)));
        shares.w[i] = w;
        let mut drawn = Vec::with_capacity(n - 2 - i);
        for _ in i + 1..n - 1 {
            drawn.push(coins.next_bit()?);
        }
        wire.local(i, format!("{label}coins"), drawn.clone());
        let drawn_sum = drawn.iter().fold(0, |acc, &b| add_mod(acc, b));
        let last = sub_mod(add_mod(inputs[i], w), drawn_sum);
        for (k, &value) in drawn.iter().enumerate() {
            deliver(wire, &mut shares, round, i, i + 1 + k, value)?;
        }
        deliver(wire, &mut shares, round, i, n - 1, last)?;
    }

    let penultimate = n - 2;
    let forwarded = (0..penultimate).fold(inputs[penultimate], |acc, j| add_mod(acc, shares.get(j, penultimate)));
    deliver(wire, &mut shares, first_round + penultimate as u32, penultimate, n - 1, forwarded)?;

    let sum = (0..n - 1).fold(inputs[n - 1], |acc, j| add_mod(acc, shares.get(j, n - 1)));
    wire.broadcast(first_round + (n - 1) as u32, n - 1, format!("{label}sum"), vec![sum]);

    Ok(ModSumRun { sum, held: vec![sum; n], shares })
}

/// Masks `r_1..r_N` with zero parity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroSumRandomness {
    r: Vec<u8>,
}

impl ZeroSumRandomness {
    pub fn new(r: Vec<u8>) -> Result<Self> {
        check_receivers(r.len())?;
        bits::check_bits(&r, "zero-sum mask")?;
        if bits::parity(&r) != 0 {
            return Err(Error::Domain(format!("mask {} does not sum to zero", bits::to_string(&r))));
        }
        Ok(Self { r })
    }

    pub fn masks(&self) -> &[u8] {
        &self.r
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.r
    }
}

/// Uniform coins `Y`, a secure sum of them, and `r_1 = Y_1 - sum Y`, `r_i = Y_i`.
pub fn protocol2_generate_zero_sum<B: BitSource + ?Sized>(
    setup: &SecureChannelSetup,
    coins: &mut B,
    wire: &mut Wire<'_>,
) -> Result<ZeroSumRandomness> {
    let n = setup.receivers();
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let bit = coins.next_bit()?;
        wire.local(i, "Y", vec![bit]);
        y.push(bit);
    }
    let previous = wire.phase();
    wire.set_phase(Phase::ZeroSum);
    let run = protocol1_modsum(&y, setup, coins, wire, "zs.", 1)?;
    wire.set_phase(previous);

    let mut r = y.clone();
    r[0] = sub_mod(y[0], run.held[0]);
    for (i, &ri) in r.iter().enumerate() {
        wire.local(i, "r", vec![ri]);
    }
    ZeroSumRandomness::new(r)
}

/// Each receiver broadcasts its masked state bits for the block once; every receiver
/// sums the broadcasts column by column. Returns each receiver's state estimates.
///
/// `masks` need not have zero parity here: with a non-zero-sum mask the estimates are
/// simply wrong, which is how a cheating entanglement source shows up.
pub fn masked_parity_broadcast(
    masks: &[u8],
    states: &StateSequence,
    wire: &mut Wire<'_>,
    round: u32,
) -> Result<Vec<Vec<u8>>> {
    let n = states.receivers();
    if masks.len() != n {
        return Err(Error::Shape(format!("{} masks for {n} receivers", masks.len())));
    }
    let previous = wire.phase();
    wire.set_phase(Phase::Decode);
    let published: Vec<Vec<u8>> =
        (0..n).map(|i| states.part(i).into_iter().map(|x| add_mod(x, masks[i])).collect()).collect();
    for (i, payload) in published.iter().enumerate() {
        wire.broadcast(round, i, "s_i", payload.clone());
    }
    wire.set_phase(previous);
    let estimate: Vec<u8> =
        (0..states.block_len()).map(|t| published.iter().fold(0, |acc, p| add_mod(acc, p[t]))).collect();
    Ok(vec![estimate; n])
}

/// Decode step of the zero-sum strategy: one broadcast per receiver covering all `n` uses.
pub fn protocol2_decode_states(
    r: &ZeroSumRandomness,
    states: &StateSequence,
    wire: &mut Wire<'_>,
) -> Result<Vec<Vec<u8>>> {
    masked_parity_broadcast(r.masks(), states, wire, states.receivers() as u32 + 1)
}

fn record_state_locals(states: &StateSequence, wire: &mut Wire<'_>) {
    for i in 0..states.receivers() {
        wire.local(i, "x", states.part(i));
    }
}

/// Strategy I: secure channels once, then one secure summation per channel use.
pub fn run_per_use_strategy<B: BitSource + ?Sized>(
    states: &StateSequence,
    coins: &mut B,
    ledger: &mut ComplexityLedger,
) -> Result<(Vec<Vec<u8>>, Transcript)> {
    let n = states.receivers();
    let mut transcript = Transcript::new(n);
    let setup = setup_secure_channels(n, ledger)?;
    let mut wire = Wire::new(&mut transcript, ledger, Phase::Decode);
    record_state_locals(states, &mut wire);
    let mut gamma = vec![Vec::with_capacity(states.block_len()); n];
    for t in 0..states.block_len() {
        let run = protocol1_modsum(
            states.word(t).bits(),
            &setup,
            coins,
            &mut wire,
            &format!("t{t}."),
            1 + t as u32 * n as u32,
        )?;
        for (i, g) in gamma.iter_mut().enumerate() {
            g.push(run.held[i]);
        }
    }
    Ok((gamma, transcript))
}

/// Strategy II: secure channels, one zero-sum generation, one masked broadcast per receiver.
pub fn run_zero_sum_strategy<B: BitSource + ?Sized>(
    states: &StateSequence,
    coins: &mut B,
    ledger: &mut ComplexityLedger,
) -> Result<(Vec<Vec<u8>>, Transcript)> {
    let (gamma, transcript, _) = run_zero_sum_strategy_with(states, coins, ledger, false)?;
    Ok((gamma, transcript))
}

/// Zero-sum strategy with an optional defect: `leak_masks` makes every receiver also
/// broadcast its mask in the clear. Used as a positive control for leakage analysis.
pub fn run_zero_sum_strategy_with<B: BitSource + ?Sized>(
    states: &StateSequence,
    coins: &mut B,
    ledger: &mut ComplexityLedger,
    leak_masks: bool,
) -> Result<(Vec<Vec<u8>>, Transcript, ZeroSumRandomness)> {
    let n = states.receivers();
    let mut transcript = Transcript::new(n);
    let setup = setup_secure_channels(n, ledger)?;
    let mut wire = Wire::new(&mut transcript, ledger, Phase::ZeroSum);
    record_state_locals(states, &mut wire);
    let r = protocol2_generate_zero_sum(&setup, coins, &mut wire)?;
    if leak_masks {
        wire.set_phase(Phase::Decode);
        for (i, &ri) in r.masks().iter().enumerate() {
            wire.broadcast(n as u32 + 1, i, "leaked-r", vec![ri]);
        }
    }
    let gamma = protocol2_decode_states(&r, states, &mut wire)?;
    Ok((gamma, transcript, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalStrategy {
    PerUse,
    ZeroSum,
}

/// Counted totals of one full run (the counts do not depend on the state values).
pub fn strategy_cost(strategy: ClassicalStrategy, receivers: usize, block_len: usize) -> Result<Counts> {
    let mut streams = SeedTree::new(0).trial(0);
    let states = StateSequence::random(receivers, block_len, &mut streams.state)?;
    let mut ledger = ComplexityLedger::new();
    match strategy {
        ClassicalStrategy::PerUse => run_per_use_strategy(&states, &mut streams.protocol, &mut ledger)?,
        ClassicalStrategy::ZeroSum => run_zero_sum_strategy(&states, &mut streams.protocol, &mut ledger)?,
    };
    Ok(ledger.totals())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{CountingSource, Tape};

    fn run(inputs: &[u8], coins: &mut impl BitSource) -> (ModSumRun, Transcript, ComplexityLedger) {
        let mut ledger = ComplexityLedger::new();
        let setup = setup_secure_channels(inputs.len(), &mut ledger).unwrap();
        let mut t = Transcript::new(inputs.len());
        let mut wire = Wire::new(&mut t, &mut ledger, Phase::Decode);
        let out = protocol1_modsum(inputs, &setup, coins, &mut wire, "", 1).unwrap();
        (out, t, ledger)
    }

    fn coin_count(receivers: usize) -> usize {
        let mut counter = CountingSource::default();
        run(&vec![0; receivers], &mut counter);
        counter.count
    }

    #[test]
    fn coin_usage_matches_share_layout() {
        for n in 3..=7 {
            assert_eq!(coin_count(n), (n - 1) * (n - 2) / 2);
        }
    }

    #[test]
    fn three_receivers_all_randomness() {
        let width = coin_count(3);
        for index in 0..1u64 << width {
            let (out, _, _) = run(&[1, 0, 1], &mut Tape::from_index(index, width));
            assert_eq!(out.sum, 0);
            assert!(out.held.iter().all(|&h| h == 0));
            assert!(out.shares.satisfies_relations(&[1, 0, 1], 0));
        }
    }

    #[test]
    fn exhaustive_correctness_small_n() {
        for n in 3..=5 {
            let width = coin_count(n);
            for x in bits::all_strings(n) {
                for index in 0..1u64 << width {
                    let (out, _, _) = run(&x, &mut Tape::from_index(index, width));
                    assert_eq!(out.sum, bits::parity(&x));
                    assert!(out.shares.satisfies_relations(&x, out.sum));
                }
            }
        }
    }

    #[test]
    fn four_receivers_message_count() {
        let (out, t, ledger) = run(&[1, 1, 1, 1], &mut Tape::from_index(0b101, 3));
        assert_eq!(out.sum, 0);
        let p2p = t.messages().iter().filter(|m| m.recipient != crate::transcript::Recipient::Broadcast).count();
        assert_eq!(p2p, 6);
        assert_eq!(t.broadcasts().count(), 1);
        assert_eq!(protocol1_p2p_count(4), 6);
        assert_eq!(ledger.totals().p2p_messages, 6);
        assert_eq!(threshold_protocol_message_bound(4, 2), 8);
    }

    #[test]
    fn missing_channel_is_a_setup_error() {
        let mut ledger = ComplexityLedger::new();
        let setup = setup_secure_channels(4, &mut ledger).unwrap().without(0, 2);
        let mut t = Transcript::new(4);
        let mut wire = Wire::new(&mut t, &mut ledger, Phase::Decode);
        let err = protocol1_modsum(&[0, 1, 0, 1], &setup, &mut Tape::new(vec![0; 3]), &mut wire, "", 1).unwrap_err();
        assert_eq!(err, Error::MissingSecureChannel { from: 0, to: 2 });
    }

    #[test]
    fn too_few_receivers() {
        let mut ledger = ComplexityLedger::new();
        assert!(matches!(setup_secure_channels(2, &mut ledger), Err(Error::Domain(_))));
    }

    #[test]
    fn secure_channel_counts() {
        for (n, expected) in [(3, 1), (4, 3), (10, 36)] {
            let mut ledger = ComplexityLedger::new();
            let setup = setup_secure_channels(n, &mut ledger).unwrap();
            assert_eq!(setup.channel_count(), expected);
            assert_eq!(setup.key_messages_sent, expected as u64);
            assert_eq!(ledger.totals().key_setup_messages, expected as u64);
            assert_eq!(setup.security, SecurityLevel::Conditional);
            assert_eq!(expected, (n * n - 3 * n + 2) / 2);
        }
    }

    #[test]
    fn zero_sum_hand_trace() {
        // Y = (1,1,0): sum Y = 0, so r = Y.
        let mut ledger = ComplexityLedger::new();
        let setup = setup_secure_channels(3, &mut ledger).unwrap();
        let mut t = Transcript::new(3);
        let mut wire = Wire::new(&mut t, &mut ledger, Phase::ZeroSum);
        let r = protocol2_generate_zero_sum(&setup, &mut Tape::new(vec![1, 1, 0, 0]), &mut wire).unwrap();
        assert_eq!(r.masks(), &[1, 1, 0]);
        assert!(t.messages().iter().any(|m| m.tag == "zs.sum"));
    }

    #[test]
    fn zero_sum_masks_have_uniform_marginals() {
        // Enumerate all Y and all summation coins for N=3.
        let mut ones = [0u32; 3];
        let mut total = 0u32;
        for index in 0..1u64 << 4 {
            let mut ledger = ComplexityLedger::new();
            let setup = setup_secure_channels(3, &mut ledger).unwrap();
            let mut t = Transcript::new(3);
            let mut wire = Wire::new(&mut t, &mut ledger, Phase::ZeroSum);
            let r = protocol2_generate_zero_sum(&setup, &mut Tape::from_index(index, 4), &mut wire).unwrap();
            assert_eq!(bits::parity(r.masks()), 0);
            for (k, &b) in r.masks().iter().enumerate() {
                ones[k] += b as u32;
            }
            total += 1;
        }
        assert!(ones.iter().all(|&c| 2 * c == total), "{ones:?}");
    }

    #[test]
    fn decode_hand_trace() {
        let states = StateSequence::from_parts(&[vec![1, 0], vec![0, 1], vec![0, 1]]).unwrap();
        let r = ZeroSumRandomness::new(vec![1, 1, 0]).unwrap();
        let mut ledger = ComplexityLedger::new();
        let mut t = Transcript::new(3);
        let mut wire = Wire::new(&mut t, &mut ledger, Phase::Decode);
        let est = protocol2_decode_states(&r, &states, &mut wire).unwrap();
        let payloads: Vec<_> = t.broadcasts().map(|m| m.payload.clone()).collect();
        assert_eq!(payloads, vec![vec![0, 1], vec![1, 0], vec![0, 1]]);
        assert!(est.iter().all(|e| e == &vec![1, 0]));
        assert_eq!(ledger.totals().broadcasts, 3);
    }

    #[test]
    fn zero_mask_reveals_parity() {
        let states = StateSequence::from_parts(&[vec![1, 1], vec![0, 1], vec![1, 1], vec![0, 0]]).unwrap();
        let r = ZeroSumRandomness::new(vec![0; 4]).unwrap();
        let mut ledger = ComplexityLedger::new();
        let mut t = Transcript::new(4);
        let est = protocol2_decode_states(&r, &states, &mut Wire::new(&mut t, &mut ledger, Phase::Decode)).unwrap();
        assert_eq!(est[2], states.states());
    }

    #[test]
    fn zero_sum_rejects_odd_masks() {
        assert!(ZeroSumRandomness::new(vec![1, 0, 0]).is_err());
    }

    #[test]
    fn decode_exhaustive_small() {
        for n in [3usize, 4] {
            for block in 1..=3usize {
                for flat in bits::all_strings(n * block) {
                    let states = StateSequence::from_flat(n, block, &flat).unwrap();
                    for r in bits::all_strings(n).filter(|r| bits::parity(r) == 0) {
                        let r = ZeroSumRandomness::new(r).unwrap();
                        let mut ledger = ComplexityLedger::new();
                        let mut t = Transcript::new(n);
                        let est =
                            protocol2_decode_states(&r, &states, &mut Wire::new(&mut t, &mut ledger, Phase::Decode))
                                .unwrap();
                        assert!(est.iter().all(|e| e == &states.states()));
                    }
                }
            }
        }
    }

    #[test]
    fn cost_formulas() {
        let two = strategy_cost(ClassicalStrategy::ZeroSum, 4, 17).unwrap();
        assert_eq!(two.key_setup_messages, 3);
        assert_eq!(two.p2p_messages, 6);
        assert_eq!(two.broadcasts, 1 + 4);

        let one = strategy_cost(ClassicalStrategy::PerUse, 4, 5).unwrap();
        assert_eq!(one.key_setup_messages, 3);
        assert_eq!(one.p2p_messages, 5 * 6);
        assert_eq!(one.broadcasts, 5);

        // At a single use both strategies run the summation exactly once; the zero-sum
        // strategy additionally spends N masked broadcasts.
        let one = strategy_cost(ClassicalStrategy::PerUse, 4, 1).unwrap();
        let two = strategy_cost(ClassicalStrategy::ZeroSum, 4, 1).unwrap();
        assert_eq!(one.p2p_messages, two.p2p_messages);
        assert_eq!(two.broadcasts - one.broadcasts, 4);
    }
}
