//! Honest-but-curious coalitions: what they see, and how much that tells them.
//!
//! A coalition's view is everything its members hold locally (inputs, coins, masks)
//! plus every message addressed to a member or broadcast. Leakage about a binary
//! secret is measured as mutual information with that view, either exactly by
//! enumerating all inputs and all protocol coins, or by sampling runs.

pub mod table;

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::bits;
use crate::channel::{check_receivers, StateSequence};
use crate::error::{Error, Result};
use crate::ghz::{decode_with_masks, run_entanglement_strategy, PhaseGhzSource};
use crate::ledger::{ComplexityLedger, Phase};
use crate::mpc::{run_per_use_strategy, run_zero_sum_strategy_with};
use crate::rng::{BitSource, CountingSource, SeedTree, Stream, Tape};
use crate::transcript::{LocalValue, Message, Recipient, Transcript, Wire};

pub use table::{entropy_bits, mutual_information, Interner, JointDistributionTable};

/// Largest number of enumerated bits (inputs, coins and any fresh secret coin).
pub const EXACT_LIMIT_BITS: u32 = 22;
/// Fewest sampled runs accepted by the estimator.
pub const MIN_SAMPLED_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    members: BTreeSet<usize>,
    receivers: usize,
}

impl Coalition {
    /// Requires `1 <= |Z| <= N - 2` and members in range.
    pub fn new<I: IntoIterator<Item = usize>>(members: I, receivers: usize) -> Result<Self> {
        check_receivers(receivers)?;
        let members: BTreeSet<usize> = members.into_iter().collect();
        if members.is_empty() || members.len() > receivers - 2 {
            return Err(Error::InvalidCoalition(format!(
                "coalition size {} outside 1..={} for {receivers} receivers",
                members.len(),
                receivers - 2
            )));
        }
        if let Some(&p) = members.iter().find(|&&p| p >= receivers) {
            return Err(Error::InvalidCoalition(format!("member {p} out of range")));
        }
        Ok(Self { members, receivers })
    }

    /// Every admissible coalition, smallest first.
    pub fn all(receivers: usize) -> Result<Vec<Coalition>> {
        check_receivers(receivers)?;
        let mut out = Vec::new();
        for mask in 1u64..(1 << receivers) {
            let size = mask.count_ones() as usize;
            if size <= receivers - 2 {
                out.push(Self::new((0..receivers).filter(|i| mask >> i & 1 == 1), receivers)?);
            }
        }
        out.sort_by_key(|c| (c.len(), c.members.iter().copied().collect::<Vec<_>>()));
        Ok(out)
    }

    /// Coalitions of exactly `size` members.
    pub fn of_size(receivers: usize, size: usize) -> Result<Vec<Coalition>> {
        Ok(Self::all(receivers)?.into_iter().filter(|c| c.len() == size).collect())
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn non_members(&self) -> Vec<usize> {
        (0..self.receivers).filter(|i| !self.members.contains(i)).collect()
    }

    pub fn contains(&self, party: usize) -> bool {
        self.members.contains(&party)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn is_subset(&self, other: &Coalition) -> bool {
        self.receivers == other.receivers && self.members.is_subset(&other.members)
    }

    /// Members joined by `|`, e.g. `2|3`.
    pub fn label(&self) -> String {
        self.members.iter().map(usize::to_string).collect::<Vec<_>>().join("|")
    }
}

/// How much of a view enters the leakage table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewScope {
    Full,
    /// Members' masks plus decode-phase traffic. Together with the masks, the masked
    /// broadcasts already determine the members' own inputs, so for the zero-sum
    /// strategies this loses nothing about the masks while keeping the view space small
    /// enough to sample.
    DecodePhase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionView {
    pub coalition: Coalition,
    pub own_locals: Vec<LocalValue>,
    pub received: Vec<Message>,
}

impl CoalitionView {
    /// A canonical byte string; equal views give equal keys.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for l in &self.own_locals {
            out.extend_from_slice(&(l.party as u32).to_le_bytes());
            out.extend_from_slice(l.tag.as_bytes());
            out.push(0xff);
            out.extend_from_slice(&l.bits);
            out.push(0xfe);
        }
        out.push(0xfd);
        for m in &self.received {
            out.extend_from_slice(&m.round.to_le_bytes());
            out.extend_from_slice(&(m.sender as u32).to_le_bytes());
            match m.recipient {
                Recipient::Party(p) => out.extend_from_slice(&(p as u32).to_le_bytes()),
                Recipient::Broadcast => out.extend_from_slice(&u32::MAX.to_le_bytes()),
            }
            out.extend_from_slice(m.tag.as_bytes());
            out.push(0xff);
            out.extend_from_slice(&m.payload);
            out.push(0xfe);
        }
        out
    }

    /// The view of a sub-coalition, obtained without going back to the transcript.
    pub fn restrict(&self, sub: &Coalition) -> Result<CoalitionView> {
        if !sub.is_subset(&self.coalition) {
            return Err(Error::InvalidCoalition(format!("{} is not inside {}", sub.label(), self.coalition.label())));
        }
        Ok(CoalitionView {
            coalition: sub.clone(),
            own_locals: self.own_locals.iter().filter(|l| sub.contains(l.party)).cloned().collect(),
            received: self
                .received
                .iter()
                .filter(|m| match m.recipient {
                    Recipient::Party(p) => sub.contains(p),
                    Recipient::Broadcast => true,
                })
                .cloned()
                .collect(),
        })
    }

    pub fn scoped(&self, scope: ViewScope) -> CoalitionView {
        match scope {
            ViewScope::Full => self.clone(),
            ViewScope::DecodePhase => CoalitionView {
                coalition: self.coalition.clone(),
                own_locals: self.own_locals.iter().filter(|l| l.tag == "r").cloned().collect(),
                received: self.received.iter().filter(|m| m.phase == Phase::Decode).cloned().collect(),
            },
        }
    }

    pub fn local(&self, party: usize, tag: &str) -> Option<&[u8]> {
        self.own_locals.iter().find(|l| l.party == party && l.tag == tag).map(|l| l.bits.as_slice())
    }
}

/// Projects a transcript onto a coalition: members' locals, messages to members, broadcasts.
pub fn extract_view(transcript: &Transcript, coalition: &Coalition) -> Result<CoalitionView> {
    transcript.validate()?;
    if transcript.parties() != coalition.receivers() {
        return Err(Error::MalformedTranscript(format!(
            "transcript has {} parties, coalition expects {}",
            transcript.parties(),
            coalition.receivers()
        )));
    }
    Ok(CoalitionView {
        coalition: coalition.clone(),
        own_locals: transcript.locals().iter().filter(|l| coalition.contains(l.party)).cloned().collect(),
        received: transcript
            .messages()
            .iter()
            .filter(|m| match m.recipient {
                Recipient::Party(p) => coalition.contains(p),
                Recipient::Broadcast => true,
            })
            .cloned()
            .collect(),
    })
}

/// Protocols whose leakage can be analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakageProtocol {
    /// Strategy I.
    PerUse,
    /// Strategy II.
    ZeroSum,
    /// Masked broadcasts with masks from a verified phase-GHZ copy.
    EntanglementAssisted,
    /// Strategy II with every mask also broadcast in the clear.
    LeakyZeroSum,
}

impl LeakageProtocol {
    pub const ALL: [LeakageProtocol; 4] = [
        LeakageProtocol::PerUse,
        LeakageProtocol::ZeroSum,
        LeakageProtocol::EntanglementAssisted,
        LeakageProtocol::LeakyZeroSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LeakageProtocol::PerUse => "strategy-i",
            LeakageProtocol::ZeroSum => "strategy-ii",
            LeakageProtocol::EntanglementAssisted => "entanglement",
            LeakageProtocol::LeakyZeroSum => "leaky-strategy-ii",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown protocol {name:?}")))
    }

    /// Runs the protocol with coins drawn from `coins`.
    ///
    /// For the entanglement-assisted protocol the coins stand in for the Z outcomes of
    /// the consumed copy: `N - 1` fair bits and a last bit fixing even parity. The
    /// validation transcript is left out; it concerns copies independent of the one
    /// that is consumed.
    pub fn run<B: BitSource + ?Sized>(self, states: &StateSequence, coins: &mut B) -> Result<Transcript> {
        let mut ledger = ComplexityLedger::new();
        match self {
            LeakageProtocol::PerUse => Ok(run_per_use_strategy(states, coins, &mut ledger)?.1),
            LeakageProtocol::ZeroSum => Ok(run_zero_sum_strategy_with(states, coins, &mut ledger, false)?.1),
            LeakageProtocol::LeakyZeroSum => Ok(run_zero_sum_strategy_with(states, coins, &mut ledger, true)?.1),
            LeakageProtocol::EntanglementAssisted => {
                let n = states.receivers();
                let mut masks = Vec::with_capacity(n);
                for _ in 0..n - 1 {
                    masks.push(coins.next_bit()?);
                }
                masks.push(bits::parity(&masks));
                let mut transcript = Transcript::new(n);
                let mut wire = Wire::new(&mut transcript, &mut ledger, Phase::Decode);
                for i in 0..n {
                    wire.local(i, "x", states.part(i));
                }
                decode_with_masks(&masks, states, &mut wire)?;
                Ok(transcript)
            }
        }
    }

    /// Coins one run consumes.
    pub fn coin_count(self, receivers: usize, block_len: usize) -> Result<usize> {
        let states = StateSequence::from_flat(receivers, block_len, &vec![0; receivers * block_len])?;
        let mut counter = CountingSource::default();
        self.run(&states, &mut counter)?;
        Ok(counter.count)
    }
}

/// A binary secret. State bits refer to the first channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Secret {
    Mask(usize),
    Input(usize),
    InputXor(usize, usize),
    /// A coin that never enters the protocol.
    FreshCoin,
}

impl Secret {
    pub fn label(&self) -> String {
        match self {
            Secret::Mask(i) => format!("r{i}"),
            Secret::Input(i) => format!("x{i}"),
            Secret::InputXor(a, b) => format!("x{a}^x{b}"),
            Secret::FreshCoin => "fresh-coin".into(),
        }
    }

    /// Inverse of [`Secret::label`].
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown secret {text:?}; expected r<i>, x<i>, x<a>^x<b> or fresh-coin"));
        let index = |s: &str, prefix: char| s.strip_prefix(prefix).and_then(|d| d.parse::<usize>().ok());
        if text == "fresh-coin" {
            return Ok(Secret::FreshCoin);
        }
        if let Some((a, b)) = text.split_once('^') {
            return match (index(a, 'x'), index(b, 'x')) {
                (Some(a), Some(b)) => Ok(Secret::InputXor(a, b)),
                _ => Err(bad()),
            };
        }
        if let Some(i) = index(text, 'r') {
            return Ok(Secret::Mask(i));
        }
        index(text, 'x').map(Secret::Input).ok_or_else(bad)
    }

    fn check(&self, receivers: usize) -> Result<()> {
        let bad = match *self {
            Secret::Mask(i) | Secret::Input(i) => i >= receivers,
            Secret::InputXor(a, b) => a >= receivers || b >= receivers || a == b,
            Secret::FreshCoin => false,
        };
        if bad {
            return Err(Error::Domain(format!("secret {} invalid for {receivers} receivers", self.label())));
        }
        Ok(())
    }

    fn value(&self, transcript: &Transcript, states: &StateSequence, fresh: u8) -> Result<u8> {
        match *self {
            Secret::Mask(i) => transcript
                .local(i, "r")
                .map(|r| r[0])
                .ok_or_else(|| Error::Domain(format!("protocol holds no mask for receiver {i}"))),
            Secret::Input(i) => Ok(states.word(0).bits()[i]),
            Secret::InputXor(a, b) => {
                let w = states.word(0).bits();
                Ok(w[a] ^ w[b])
            }
            Secret::FreshCoin => Ok(fresh),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactLeakage {
    pub mi_bits: f64,
    /// Conditioned on the state sequence `phi(x)`, which the protocol announces anyway.
    pub conditional_mi_bits: f64,
    pub secret_entropy: f64,
    pub outcomes: u64,
    pub distinct_views: usize,
}

/// Exact `I(secret; view)` by enumerating every input and every protocol coin.
pub fn exact_mutual_information(
    secret: Secret,
    coalition: &Coalition,
    protocol: LeakageProtocol,
    block_len: usize,
) -> Result<ExactLeakage> {
    let n = coalition.receivers();
    secret.check(n)?;
    if block_len == 0 {
        return Err(Error::Domain("block length must be at least 1".into()));
    }
    let coins = protocol.coin_count(n, block_len)?;
    let extra = usize::from(secret == Secret::FreshCoin);
    let bits = n * block_len + coins + extra;
    if bits > EXACT_LIMIT_BITS as usize {
        return Err(Error::StateSpaceTooLarge { bits: bits as u32, limit: EXACT_LIMIT_BITS });
    }
    let mut table = JointDistributionTable::new();
    let mut views = Interner::new();
    for x in 0u64..1 << (n * block_len) {
        let states = StateSequence::from_flat(n, block_len, &bits::index_to_bits(x, n * block_len))?;
        let condition = bits::bits_to_index(&states.states());
        for tape in 0u64..1 << coins {
            let transcript = protocol.run(&states, &mut Tape::from_index(tape, coins))?;
            let view = views.id(extract_view(&transcript, coalition)?.key());
            for fresh in 0..=extra as u8 {
                table.add(secret.value(&transcript, &states, fresh)? as u64, view, condition);
            }
        }
    }
    table.probabilities()?;
    Ok(ExactLeakage {
        mi_bits: table.mutual_information(),
        conditional_mi_bits: table.conditional_mutual_information(),
        secret_entropy: table.secret_entropy(),
        outcomes: table.total(),
        distinct_views: views.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub trials: usize,
    pub block_len: usize,
    pub scope: ViewScope,
    /// Security parameter of the validated copies in entanglement-assisted runs.
    pub security: usize,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            trials: 10_000,
            block_len: 1,
            scope: ViewScope::DecodePhase,
            security: 1,
            bootstrap_resamples: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledLeakage {
    /// Plug-in estimate; biased upward.
    pub estimate: f64,
    /// 2.5% and 97.5% bootstrap percentiles, shifted so the bootstrap mean equals the estimate.
    pub ci_low: f64,
    pub ci_high: f64,
    /// First-order (Miller-Madow) bias of the plug-in estimate: `(|S|-1)(|V|-1) / (2 T ln 2)`.
    pub bias_estimate: f64,
    pub trials: usize,
    pub distinct_views: usize,
}

/// Plug-in `I(secret; view)` over sampled runs, with a bootstrap interval.
///
/// Entanglement-assisted runs go through the full validated protocol with an honest
/// source; aborted runs are impossible in that case.
pub fn sampled_mutual_information(
    secret: Secret,
    coalition: &Coalition,
    protocol: LeakageProtocol,
    plan: &SamplingPlan,
) -> Result<SampledLeakage> {
    let n = coalition.receivers();
    secret.check(n)?;
    if plan.trials < MIN_SAMPLED_TRIALS {
        return Err(Error::Domain(format!("need at least {MIN_SAMPLED_TRIALS} trials, got {}", plan.trials)));
    }
    if plan.block_len == 0 {
        return Err(Error::Domain("block length must be at least 1".into()));
    }
    let tree = SeedTree::new(plan.seed);
    let mut views = Interner::new();
    let mut records = Vec::with_capacity(plan.trials);
    for k in 0..plan.trials {
        let mut streams = tree.trial(k as u64);
        let states = StateSequence::random(n, plan.block_len, &mut streams.state)?;
        let transcript = match protocol {
            LeakageProtocol::EntanglementAssisted => {
                let mut ledger = ComplexityLedger::new();
                let (_, t) = run_entanglement_strategy(
                    &PhaseGhzSource::Honest,
                    &states,
                    plan.security,
                    &mut streams.protocol,
                    &mut streams.adversary,
                    &mut ledger,
                )?;
                t
            }
            _ => protocol.run(&states, &mut streams.protocol)?,
        };
        let fresh = streams.messages.gen::<bool>() as u8;
        let view = extract_view(&transcript, coalition)?.scoped(plan.scope);
        let v = views.id(view.key());
        records.push((secret.value(&transcript, &states, fresh)? as u64, v));
    }

    let estimate = plug_in(records.iter().copied());
    let mut rng = tree.stream(Stream::Adversary, u64::MAX);
    let mut boots: Vec<f64> = (0..plan.bootstrap_resamples)
        .map(|_| plug_in((0..records.len()).map(|_| records[rng.gen_range(0..records.len())])))
        .collect();
    boots.sort_by(f64::total_cmp);
    // Resampling with replacement adds its own plug-in bias, so the bootstrap spread is
    // re-centred on the estimate.
    let (ci_low, ci_high) = if boots.is_empty() {
        (estimate, estimate)
    } else {
        let shift = boots.iter().sum::<f64>() / boots.len() as f64 - estimate;
        let at = |q: f64| (boots[((boots.len() - 1) as f64 * q).round() as usize] - shift).max(0.0);
        (at(0.025), at(0.975))
    };
    let secrets: BTreeSet<u64> = records.iter().map(|r| r.0).collect();
    let bias_estimate = (secrets.len().saturating_sub(1) * views.len().saturating_sub(1)) as f64
        / (2.0 * plan.trials as f64 * std::f64::consts::LN_2);
    Ok(SampledLeakage { estimate, ci_low, ci_high, bias_estimate, trials: plan.trials, distinct_views: views.len() })
}

fn plug_in<I: Iterator<Item = (u64, u64)>>(sample: I) -> f64 {
    let mut table = JointDistributionTable::new();
    for (s, v) in sample {
        table.add(s, v, 0);
    }
    table.mutual_information()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecyclingReport {
    pub coalitions: usize,
    /// `(coalition inputs, cell)` view laws compared.
    pub cells: usize,
    /// Cells whose view law differed from another cell of the same class.
    pub mismatches: usize,
}

impl RecyclingReport {
    pub fn holds(&self) -> bool {
        self.mismatches == 0
    }
}

/// For every coalition of size `N - 2` with outsiders `a, b`, and every fixing of the
/// members' own inputs, checks that the view's law given the outsiders' full input
/// blocks `(x_a, x_b)` (over all coins) depends on `x_a ^ x_b` only. Laws are compared
/// as integer counts.
pub fn recycling_check(protocol: LeakageProtocol, receivers: usize, block_len: usize) -> Result<RecyclingReport> {
    view_law_dependence(protocol, receivers, block_len, |a, b| [a, b].concat(), bits::xor)
}

/// Per-use form of [`recycling_check`]: the view's law given `(x_{a,t}, x_{b,t})` alone,
/// averaging over the outsiders' other inputs, must depend on `x_{a,t} ^ x_{b,t}` only.
pub fn per_use_recycling_check(
    protocol: LeakageProtocol,
    receivers: usize,
    block_len: usize,
) -> Result<RecyclingReport> {
    let mut total = RecyclingReport { coalitions: 0, cells: 0, mismatches: 0 };
    for t in 0..block_len {
        let r = view_law_dependence(protocol, receivers, block_len, |a, b| vec![a[t], b[t]], |a, b| vec![a[t] ^ b[t]])?;
        total.coalitions = r.coalitions;
        total.cells += r.cells;
        total.mismatches += r.mismatches;
    }
    Ok(total)
}

/// Bits receiver `a` reveals by reusing one mask: `x_{a,t} ^ x_{a,0}` for every `t`.
pub fn reuse_differences(xa: &[u8]) -> Vec<u8> {
    xa.iter().map(|&x| x ^ xa[0]).collect()
}

/// General form of the recycling checks.
///
/// The outsiders' inputs are grouped into cells by `cell(x_a, x_b)`; each cell's view
/// law is the sum over its members and all coins. Cells are then grouped by
/// `class(x_a, x_b)`, which must be constant on each cell, and every cell of a class must
/// have the same law. Cells must all have the same number of members.
pub fn view_law_dependence<C, K>(
    protocol: LeakageProtocol,
    receivers: usize,
    block_len: usize,
    cell: C,
    class: K,
) -> Result<RecyclingReport>
where
    C: Fn(&[u8], &[u8]) -> Vec<u8>,
    K: Fn(&[u8], &[u8]) -> Vec<u8>,
{
    let coins = protocol.coin_count(receivers, block_len)?;
    let bits_total = receivers * block_len + coins;
    if bits_total > EXACT_LIMIT_BITS as usize {
        return Err(Error::StateSpaceTooLarge { bits: bits_total as u32, limit: EXACT_LIMIT_BITS });
    }
    let mut report = RecyclingReport { coalitions: 0, cells: 0, mismatches: 0 };
    for coalition in Coalition::of_size(receivers, receivers - 2)? {
        report.coalitions += 1;
        let outside = coalition.non_members();
        let (a, b) = (outside[0], outside[1]);
        let members: Vec<usize> = coalition.members().collect();
        let mut views = Interner::new();
        for own in 0u64..1 << (members.len() * block_len) {
            let own_bits = bits::index_to_bits(own, members.len() * block_len);
            let mut laws: HashMap<Vec<u8>, (Vec<u8>, HashMap<u64, u64>)> = HashMap::new();
            for pair in 0u64..1 << (2 * block_len) {
                let pair_bits = bits::index_to_bits(pair, 2 * block_len);
                let (xa, xb) = pair_bits.split_at(block_len);
                let mut parts = vec![Vec::new(); receivers];
                for (k, &p) in members.iter().enumerate() {
                    parts[p] = own_bits[k * block_len..(k + 1) * block_len].to_vec();
                }
                parts[a] = xa.to_vec();
                parts[b] = xb.to_vec();
                let states = StateSequence::from_parts(&parts)?;
                let key = class(xa, xb);
                let entry = laws.entry(cell(xa, xb)).or_insert_with(|| (key.clone(), HashMap::new()));
                if entry.0 != key {
                    return Err(Error::Domain("class is not constant on a cell".into()));
                }
                for tape in 0u64..1 << coins {
                    let transcript = protocol.run(&states, &mut Tape::from_index(tape, coins))?;
                    *entry.1.entry(views.id(extract_view(&transcript, &coalition)?.key())).or_insert(0) += 1;
                }
            }
            let mut reference: HashMap<Vec<u8>, Vec<(u64, u64)>> = HashMap::new();
            let mut cells: Vec<_> = laws.into_iter().collect();
            cells.sort_by(|x, y| x.0.cmp(&y.0));
            for (_, (key, law)) in cells {
                let mut law: Vec<(u64, u64)> = law.into_iter().collect();
                law.sort_unstable();
                report.cells += 1;
                match reference.get(&key) {
                    Some(r) if *r != law => report.mismatches += 1,
                    Some(_) => {}
                    None => {
                        reference.insert(key, law);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalition_bounds() {
        assert!(Coalition::new([], 4).is_err());
        assert!(Coalition::new([0, 1, 2], 4).is_err());
        assert!(Coalition::new([5], 4).is_err());
        assert_eq!(Coalition::all(4).unwrap().len(), 4 + 6);
        assert_eq!(Coalition::all(3).unwrap().len(), 3);
        assert_eq!(Coalition::new([3, 1], 5).unwrap().label(), "1|3");
    }

    #[test]
    fn last_receiver_sees_all_its_shares() {
        let states = StateSequence::from_parts(&[vec![1], vec![0], vec![1], vec![1]]).unwrap();
        let t = LeakageProtocol::PerUse.run(&states, &mut Tape::from_index(0b101, 3)).unwrap();
        let z = Coalition::new([3], 4).unwrap();
        let v = extract_view(&t, &z).unwrap();
        let shares = v.received.iter().filter(|m| m.recipient == Recipient::Party(3)).count();
        assert_eq!(shares, 3);
        assert!(v.received.iter().any(|m| m.recipient == Recipient::Broadcast));
        assert!(v.received.iter().all(|m| m.recipient == Recipient::Party(3) || m.recipient == Recipient::Broadcast));
    }

    #[test]
    fn zero_sum_view_of_two_members() {
        let states = StateSequence::from_parts(&[vec![1, 0], vec![0, 0], vec![1, 1], vec![0, 1]]).unwrap();
        let t = LeakageProtocol::ZeroSum.run(&states, &mut Tape::from_index(0x55, 7)).unwrap();
        let z = Coalition::new([0, 1], 4).unwrap();
        let v = extract_view(&t, &z).unwrap();
        for p in [0, 1] {
            assert!(v.local(p, "x").is_some());
            assert!(v.local(p, "Y").is_some());
            assert!(v.local(p, "r").is_some());
        }
        assert!(v.local(2, "x").is_none());
        assert_eq!(v.received.iter().filter(|m| m.tag == "s_i").count(), 4);
        assert!(v.received.iter().all(|m| match m.recipient {
            Recipient::Party(p) => p < 2,
            Recipient::Broadcast => true,
        }));
    }

    #[test]
    fn restriction_matches_direct_extraction() {
        let states = StateSequence::from_parts(&[vec![1], vec![0], vec![1], vec![1], vec![0]]).unwrap();
        let t = LeakageProtocol::ZeroSum.run(&states, &mut rand::rngs::mock::StepRng::new(3, 7)).unwrap();
        let big = Coalition::new([1, 2, 4], 5).unwrap();
        let small = Coalition::new([2, 4], 5).unwrap();
        let from_big = extract_view(&t, &big).unwrap().restrict(&small).unwrap();
        assert_eq!(from_big, extract_view(&t, &small).unwrap());
        assert!(extract_view(&t, &small).unwrap().restrict(&big).is_err());
    }

    #[test]
    fn coalition_size_must_match_transcript() {
        let states = StateSequence::from_parts(&[vec![1], vec![0], vec![1]]).unwrap();
        let t = LeakageProtocol::ZeroSum.run(&states, &mut Tape::from_index(0, 4)).unwrap();
        assert!(extract_view(&t, &Coalition::new([0], 4).unwrap()).is_err());
    }

    #[test]
    fn mask_secret_needs_masks() {
        let z = Coalition::new([2], 3).unwrap();
        assert!(exact_mutual_information(Secret::Mask(0), &z, LeakageProtocol::PerUse, 1).is_err());
    }

    #[test]
    fn secret_labels_round_trip() {
        for s in [Secret::Mask(3), Secret::Input(0), Secret::InputXor(1, 2), Secret::FreshCoin] {
            assert_eq!(Secret::parse(&s.label()).unwrap(), s);
        }
        assert!(Secret::parse("y1").is_err());
        assert!(Secret::parse("x1^r2").is_err());
    }

    #[test]
    fn recycling_at_one_use() {
        for p in [LeakageProtocol::ZeroSum, LeakageProtocol::EntanglementAssisted] {
            assert!(recycling_check(p, 3, 1).unwrap().holds());
        }
        assert!(!recycling_check(LeakageProtocol::LeakyZeroSum, 3, 1).unwrap().holds());
    }

    #[test]
    fn reused_mask_reveals_differences() {
        let strict = recycling_check(LeakageProtocol::ZeroSum, 3, 2).unwrap();
        assert!(!strict.holds());
        let refined = view_law_dependence(
            LeakageProtocol::ZeroSum,
            3,
            2,
            |a, b| [a, b].concat(),
            |a, b| [bits::xor(a, b), reuse_differences(a)].concat(),
        )
        .unwrap();
        assert!(refined.holds());
        assert!(per_use_recycling_check(LeakageProtocol::ZeroSum, 3, 2).unwrap().holds());
    }

    #[test]
    fn coin_counts() {
        assert_eq!(LeakageProtocol::ZeroSum.coin_count(4, 3).unwrap(), 4 + 3);
        assert_eq!(LeakageProtocol::PerUse.coin_count(4, 2).unwrap(), 6);
        assert_eq!(LeakageProtocol::EntanglementAssisted.coin_count(4, 5).unwrap(), 3);
    }

    #[test]
    fn small_exact_values() {
        let z = Coalition::new([2], 3).unwrap();
        let r = exact_mutual_information(Secret::Mask(0), &z, LeakageProtocol::ZeroSum, 1).unwrap();
        assert_eq!(r.mi_bits, 0.0);
        let r = exact_mutual_information(Secret::InputXor(0, 1), &z, LeakageProtocol::ZeroSum, 1).unwrap();
        assert!((r.mi_bits - 1.0).abs() < 1e-12);
        let r = exact_mutual_information(Secret::Mask(0), &z, LeakageProtocol::LeakyZeroSum, 1).unwrap();
        assert!((r.mi_bits - 1.0).abs() < 1e-12);
        let r = exact_mutual_information(Secret::FreshCoin, &z, LeakageProtocol::ZeroSum, 1).unwrap();
        assert_eq!(r.mi_bits, 0.0);
        assert_eq!(r.secret_entropy, 1.0);
    }

    #[test]
    fn too_large_is_rejected() {
        let z = Coalition::new([0], 6).unwrap();
        let err = exact_mutual_information(Secret::Mask(1), &z, LeakageProtocol::ZeroSum, 4).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { .. }));
    }

    #[test]
    fn sampling_guard() {
        let z = Coalition::new([2], 3).unwrap();
        let plan = SamplingPlan { trials: 0, ..SamplingPlan::default() };
        assert!(sampled_mutual_information(Secret::Mask(0), &z, LeakageProtocol::ZeroSum, &plan).is_err());
    }
}
