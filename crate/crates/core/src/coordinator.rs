//! Coordination strategies: how receivers turn their state bits into the values
//! `gamma` their decoders use.
//!
//! Non-signalling strategies are given extensionally, as local stochastic maps or
//! explicit boxes. Every such box (entanglement-based or not) has per-party marginals
//! that ignore the other parties' inputs, which is all the negative results rely on.
//! Signalling strategies run one of the conferencing protocols.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::table::mutual_information;
use crate::bits;
use crate::channel::{check_receivers, StateSequence, StateWord};
use crate::error::{Error, Result};
use crate::ghz::{decode_with_masks, run_entanglement_strategy, EntanglementOutcome, PhaseGhzSource, ValidationReport};
use crate::ledger::{ComplexityLedger, Counts, Phase};
use crate::mpc::{run_per_use_strategy, run_zero_sum_strategy};
use crate::rng::{BitSource, CountingSource, SeedTree, Tape, TrialStreams};
use crate::transcript::{Transcript, Wire};

/// Largest number of protocol coins enumerated for an exact law.
const TAPE_LIMIT_BITS: u32 = 16;
/// Largest `log2` size of a dense conditional table.
const TABLE_LIMIT_BITS: u32 = 20;

/// Strategies that use no communication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonSignallingStrategy {
    /// Every receiver assumes the same fixed state.
    Constant(u8),
    /// Each receiver guesses the state is its own share.
    OwnShare,
    /// Independent fair coins.
    LocalCoin,
    /// One shared fair coin per use, identical at every receiver.
    SharedCoin,
    /// A box whose outputs are uniform subject to `XOR gamma = phi(x)`: the parity is
    /// computed, but only in a form no single receiver can read.
    ParityShareBox,
}

impl NonSignallingStrategy {
    /// The suite exercised by the impossibility checks.
    pub const SUITE: [NonSignallingStrategy; 5] = [
        NonSignallingStrategy::Constant(0),
        NonSignallingStrategy::OwnShare,
        NonSignallingStrategy::LocalCoin,
        NonSignallingStrategy::SharedCoin,
        NonSignallingStrategy::ParityShareBox,
    ];

    pub fn name(&self) -> String {
        match self {
            NonSignallingStrategy::Constant(c) => format!("constant-{c}"),
            NonSignallingStrategy::OwnShare => "own-share".into(),
            NonSignallingStrategy::LocalCoin => "local-coin".into(),
            NonSignallingStrategy::SharedCoin => "shared-coin".into(),
            NonSignallingStrategy::ParityShareBox => "parity-share-box".into(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "constant-0" | "constant" => NonSignallingStrategy::Constant(0),
            "constant-1" => NonSignallingStrategy::Constant(1),
            "own-share" => NonSignallingStrategy::OwnShare,
            "local-coin" => NonSignallingStrategy::LocalCoin,
            "shared-coin" => NonSignallingStrategy::SharedCoin,
            "parity-share-box" => NonSignallingStrategy::ParityShareBox,
            other => return Err(Error::Config(format!("unknown local strategy {other:?}"))),
        })
    }

    fn sample_column<R: Rng + ?Sized>(&self, word: &StateWord, rng: &mut R) -> Vec<u8> {
        let n = word.receivers();
        match *self {
            NonSignallingStrategy::Constant(c) => vec![c; n],
            NonSignallingStrategy::OwnShare => word.bits().to_vec(),
            NonSignallingStrategy::LocalCoin => (0..n).map(|_| rng.gen::<bool>() as u8).collect(),
            NonSignallingStrategy::SharedCoin => vec![rng.gen::<bool>() as u8; n],
            NonSignallingStrategy::ParityShareBox => {
                let mut g: Vec<u8> = (0..n - 1).map(|_| rng.gen::<bool>() as u8).collect();
                g.push(bits::parity(&g) ^ word.phi());
                g
            }
        }
    }

    /// Exact law of one use's outputs given its state word.
    fn column_law(&self, word: &StateWord) -> Vec<(Vec<u8>, f64)> {
        let n = word.receivers();
        match *self {
            NonSignallingStrategy::Constant(c) => vec![(vec![c; n], 1.0)],
            NonSignallingStrategy::OwnShare => vec![(word.bits().to_vec(), 1.0)],
            NonSignallingStrategy::LocalCoin => {
                let p = 1.0 / (1u64 << n) as f64;
                bits::all_strings(n).map(|g| (g, p)).collect()
            }
            NonSignallingStrategy::SharedCoin => vec![(vec![0; n], 0.5), (vec![1; n], 0.5)],
            NonSignallingStrategy::ParityShareBox => {
                let p = 1.0 / (1u64 << (n - 1)) as f64;
                bits::all_strings(n).filter(|g| bits::parity(g) == word.phi()).map(|g| (g, p)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    NonSignallingLocal,
    ClassicalMpcPerUse,
    ClassicalMpcZeroSum,
    EntanglementAssisted,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::NonSignallingLocal => "non-signalling-local",
            StrategyKind::ClassicalMpcPerUse => "classical-mpc-per-use",
            StrategyKind::ClassicalMpcZeroSum => "classical-mpc-zero-sum",
            StrategyKind::EntanglementAssisted => "entanglement-assisted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinatorStrategy {
    NonSignalling(NonSignallingStrategy),
    /// Strategy I: one secure summation per channel use.
    ClassicalPerUse,
    /// Strategy II: one zero-sum mask, reused for the whole block.
    ClassicalZeroSum,
    EntanglementAssisted {
        source: PhaseGhzSource,
        security: usize,
    },
}

/// `gamma[i][t]`, receiver `i`'s value for use `t`.
pub type Gamma = Vec<Vec<u8>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoordinationOutcome {
    Coordinated(Gamma),
    /// GHZ validation failed; no coordination values were produced.
    Aborted(Vec<ValidationReport>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinationRun {
    pub outcome: CoordinationOutcome,
    pub transcript: Transcript,
}

impl CoordinatorStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            CoordinatorStrategy::NonSignalling(_) => StrategyKind::NonSignallingLocal,
            CoordinatorStrategy::ClassicalPerUse => StrategyKind::ClassicalMpcPerUse,
            CoordinatorStrategy::ClassicalZeroSum => StrategyKind::ClassicalMpcZeroSum,
            CoordinatorStrategy::EntanglementAssisted { .. } => StrategyKind::EntanglementAssisted,
        }
    }

    pub fn is_signalling(&self) -> bool {
        !matches!(self, CoordinatorStrategy::NonSignalling(_))
    }

    /// Runs the strategy on one block of state bits.
    ///
    /// Local strategies draw from the protocol stream; entanglement-assisted runs also
    /// draw copy preparation and measurement outcomes from the adversary stream.
    pub fn coordinate(
        &self,
        states: &StateSequence,
        streams: &mut TrialStreams,
        ledger: &mut ComplexityLedger,
    ) -> Result<CoordinationRun> {
        check_receivers(states.receivers())?;
        match self {
            CoordinatorStrategy::NonSignalling(local) => {
                let n = states.receivers();
                let mut gamma = vec![Vec::with_capacity(states.block_len()); n];
                for word in states.words() {
                    for (i, g) in local.sample_column(word, &mut streams.protocol).into_iter().enumerate() {
                        gamma[i].push(g);
                    }
                }
                let mut transcript = Transcript::new(n);
                for i in 0..n {
                    transcript.record_local(i, "x", states.part(i));
                }
                Ok(CoordinationRun { outcome: CoordinationOutcome::Coordinated(gamma), transcript })
            }
            CoordinatorStrategy::ClassicalPerUse => {
                let (gamma, transcript) = run_per_use_strategy(states, &mut streams.protocol, ledger)?;
                Ok(CoordinationRun { outcome: CoordinationOutcome::Coordinated(gamma), transcript })
            }
            CoordinatorStrategy::ClassicalZeroSum => {
                let (gamma, transcript) = run_zero_sum_strategy(states, &mut streams.protocol, ledger)?;
                Ok(CoordinationRun { outcome: CoordinationOutcome::Coordinated(gamma), transcript })
            }
            CoordinatorStrategy::EntanglementAssisted { source, security } => {
                let (run, transcript) = run_entanglement_strategy(
                    source,
                    states,
                    *security,
                    &mut streams.protocol,
                    &mut streams.adversary,
                    ledger,
                )?;
                let outcome = match run.outcome {
                    EntanglementOutcome::Decoded { estimates, .. } => CoordinationOutcome::Coordinated(estimates),
                    EntanglementOutcome::Aborted => CoordinationOutcome::Aborted(run.reports),
                };
                Ok(CoordinationRun { outcome, transcript })
            }
        }
    }

    /// Exact law `q(. | x)` as a list of `(gamma, probability)` pairs.
    ///
    /// Classical protocols are enumerated over every assignment of their coins. The
    /// entanglement-assisted law is enumerable for an honest source only, where
    /// validation passes surely and the final mask is uniform over zero-sum strings.
    pub fn conditional_law(&self, states: &StateSequence) -> Result<Vec<(Gamma, f64)>> {
        let n = states.receivers();
        match self {
            CoordinatorStrategy::NonSignalling(local) => {
                let mut law: Vec<(Gamma, f64)> = vec![(vec![Vec::new(); n], 1.0)];
                let mut size_bits = 0u32;
                for word in states.words() {
                    let column = local.column_law(word);
                    size_bits += (column.len() as f64).log2().ceil() as u32;
                    if size_bits > TABLE_LIMIT_BITS {
                        return Err(Error::StateSpaceTooLarge { bits: size_bits, limit: TABLE_LIMIT_BITS });
                    }
                    let mut next = Vec::with_capacity(law.len() * column.len());
                    for (prefix, p) in &law {
                        for (col, q) in &column {
                            let mut g = prefix.clone();
                            for (i, &b) in col.iter().enumerate() {
                                g[i].push(b);
                            }
                            next.push((g, p * q));
                        }
                    }
                    law = next;
                }
                Ok(law)
            }
            CoordinatorStrategy::ClassicalPerUse => {
                enumerate_coins(|coins| run_per_use_strategy(states, coins, &mut ComplexityLedger::new()).map(|r| r.0))
            }
            CoordinatorStrategy::ClassicalZeroSum => {
                enumerate_coins(|coins| run_zero_sum_strategy(states, coins, &mut ComplexityLedger::new()).map(|r| r.0))
            }
            CoordinatorStrategy::EntanglementAssisted { source, .. } => {
                if !source.is_honest() {
                    return Err(Error::Domain(format!(
                        "the law of a {} source cannot be enumerated; sample it instead",
                        source.kind_name()
                    )));
                }
                let weight = 1.0 / (1u64 << (n - 1)) as f64;
                let mut acc: BTreeMap<Gamma, f64> = BTreeMap::new();
                for masks in bits::all_strings(n).filter(|r| bits::parity(r) == 0) {
                    let mut t = Transcript::new(n);
                    let mut l = ComplexityLedger::new();
                    let gamma = decode_with_masks(&masks, states, &mut Wire::new(&mut t, &mut l, Phase::Decode))?;
                    *acc.entry(gamma).or_insert(0.0) += weight;
                }
                Ok(acc.into_iter().collect())
            }
        }
    }

    /// Dense conditional table over all state sequences of the given shape.
    pub fn conditional_distribution(&self, receivers: usize, block_len: usize) -> Result<ConditionalDistribution> {
        check_receivers(receivers)?;
        let width = receivers * block_len;
        ConditionalDistribution::check_size(width)?;
        let mut rows = Vec::with_capacity(1 << width);
        for flat in bits::all_strings(width) {
            let states = StateSequence::from_flat(receivers, block_len, &flat)?;
            let mut row = vec![0.0; 1 << width];
            for (gamma, p) in self.conditional_law(&states)? {
                row[bits::bits_to_index(&gamma.concat()) as usize] += p;
            }
            rows.push(row);
        }
        ConditionalDistribution::from_rows(receivers, block_len, rows)
    }

    /// Counted resources of one run on a block of the given shape.
    pub fn resource_cost(&self, receivers: usize, block_len: usize) -> Result<Counts> {
        let mut streams = SeedTree::new(0).trial(0);
        let states = StateSequence::random(receivers, block_len, &mut streams.state)?;
        let mut ledger = ComplexityLedger::new();
        self.coordinate(&states, &mut streams, &mut ledger)?;
        Ok(ledger.totals())
    }
}

/// Runs `f` once per assignment of its coin flips and tallies the outputs.
fn enumerate_coins<F>(mut f: F) -> Result<Vec<(Gamma, f64)>>
where
    F: FnMut(&mut dyn BitSource) -> Result<Gamma>,
{
    let mut counter = CountingSource::default();
    f(&mut counter)?;
    let width = counter.count;
    if width as u32 > TAPE_LIMIT_BITS {
        return Err(Error::StateSpaceTooLarge { bits: width as u32, limit: TAPE_LIMIT_BITS });
    }
    let weight = 1.0 / (1u64 << width) as f64;
    let mut acc: BTreeMap<Gamma, f64> = BTreeMap::new();
    for index in 0..1u64 << width {
        let mut tape = Tape::from_index(index, width);
        let gamma = f(&mut tape)?;
        *acc.entry(gamma).or_insert(0.0) += weight;
    }
    Ok(acc.into_iter().collect())
}

/// `q(gamma | x)` for every `x` and `gamma`, with `parties * bits_per_party` input and
/// output bits each. Bit strings are laid out party by party.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    parties: usize,
    bits_per_party: usize,
    probs: Vec<f64>,
}

impl ConditionalDistribution {
    fn check_size(width: usize) -> Result<()> {
        if 2 * width as u32 > TABLE_LIMIT_BITS {
            return Err(Error::StateSpaceTooLarge { bits: 2 * width as u32, limit: TABLE_LIMIT_BITS });
        }
        Ok(())
    }

    /// One row per input string; each row must hold one probability per output string
    /// and sum to one within `1e-12`.
    pub fn from_rows(parties: usize, bits_per_party: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = parties * bits_per_party;
        Self::check_size(width)?;
        let size = 1usize << width;
        if rows.len() != size {
            return Err(Error::IncompleteTable(format!("{} rows, expected {size}", rows.len())));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::IncompleteTable(format!("row {x} has {} entries, expected {size}", row.len())));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::IncompleteTable(format!("row {x} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::IncompleteTable(format!("row {x} sums to {sum}")));
            }
        }
        Ok(Self { parties, bits_per_party, probs: rows.concat() })
    }

    pub fn from_fn<F: Fn(&[u8], &[u8]) -> f64>(parties: usize, bits_per_party: usize, f: F) -> Result<Self> {
        let width = parties * bits_per_party;
        Self::check_size(width)?;
        let rows = bits::all_strings(width).map(|x| bits::all_strings(width).map(|g| f(&x, &g)).collect()).collect();
        Self::from_rows(parties, bits_per_party, rows)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn bits_per_party(&self) -> usize {
        self.bits_per_party
    }

    fn width(&self) -> usize {
        self.parties * self.bits_per_party
    }

    pub fn prob_index(&self, x: usize, gamma: usize) -> f64 {
        self.probs[(x << self.width()) | gamma]
    }

    pub fn prob(&self, x: &[u8], gamma: &[u8]) -> f64 {
        self.prob_index(bits::bits_to_index(x) as usize, bits::bits_to_index(gamma) as usize)
    }

    /// Splits a string index into party `i`'s bits and the rest.
    fn split(&self, index: usize, party: usize) -> (usize, usize) {
        let b = self.bits_per_party;
        let shift = (self.parties - 1 - party) * b;
        let own = (index >> shift) & ((1 << b) - 1);
        let high = index >> (shift + b);
        let low = index & ((1 << shift) - 1);
        (own, (high << shift) | low)
    }

    /// Writes `x_tuple,gamma_tuple,probability` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_tuple", "gamma_tuple", "probability"])?;
        let width = self.width();
        for x in 0..1usize << width {
            for g in 0..1usize << width {
                w.write_record([
                    bits::to_string(&bits::index_to_bits(x as u64, width)),
                    bits::to_string(&bits::index_to_bits(g as u64, width)),
                    format!("{}", self.prob_index(x, g)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonSignallingCheck {
    pub non_signalling: bool,
    pub max_violation: f64,
}

pub const NON_SIGNALLING_TOLERANCE: f64 = 1e-9;

/// Checks every single-party-versus-rest cut in both directions: party `i`'s output
/// marginal must not depend on the others' inputs, and the others' joint output
/// marginal must not depend on party `i`'s input.
pub fn verify_non_signalling(dist: &ConditionalDistribution) -> NonSignallingCheck {
    let width = dist.width();
    let size = 1usize << width;
    let own_size = 1usize << dist.bits_per_party;
    let rest_size = 1usize << (width - dist.bits_per_party);
    let mut worst: f64 = 0.0;

    for party in 0..dist.parties {
        // own[x_own][x_rest][g_own], rest[x_own][x_rest][g_rest]
        let mut own = vec![vec![vec![0.0; own_size]; rest_size]; own_size];
        let mut rest = vec![vec![vec![0.0; rest_size]; rest_size]; own_size];
        for x in 0..size {
            let (xo, xr) = dist.split(x, party);
            for g in 0..size {
                let p = dist.prob_index(x, g);
                if p == 0.0 {
                    continue;
                }
                let (go, gr) = dist.split(g, party);
                own[xo][xr][go] += p;
                rest[xo][xr][gr] += p;
            }
        }
        for xo in 0..own_size {
            for go in 0..own_size {
                let vals = (0..rest_size).map(|xr| own[xo][xr][go]);
                worst = worst.max(spread(vals));
            }
        }
        for xr in 0..rest_size {
            for gr in 0..rest_size {
                let vals = (0..own_size).map(|xo| rest[xo][xr][gr]);
                worst = worst.max(spread(vals));
            }
        }
    }
    NonSignallingCheck { non_signalling: worst <= NON_SIGNALLING_TOLERANCE, max_violation: worst }
}

fn spread<I: Iterator<Item = f64>>(vals: I) -> f64 {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Probability, per receiver, that its coordination value equals the channel state,
/// averaged over uses and uniform state bits.
pub fn per_bit_success(dist: &ConditionalDistribution) -> Vec<f64> {
    let width = dist.width();
    let n = dist.bits_per_party;
    let size = 1usize << width;
    let mut hits = vec![0.0; dist.parties];
    for x in 0..size {
        let xb = bits::index_to_bits(x as u64, width);
        let states = StateSequence::from_flat(dist.parties, n, &xb).expect("table shape is consistent");
        let s = states.states();
        for g in 0..size {
            let p = dist.prob_index(x, g);
            if p == 0.0 {
                continue;
            }
            let gb = bits::index_to_bits(g as u64, width);
            for (i, h) in hits.iter_mut().enumerate() {
                let agree = (0..n).filter(|&t| gb[i * n + t] == s[t]).count();
                *h += p * agree as f64;
            }
        }
    }
    hits.iter().map(|h| h / (size * n) as f64).collect()
}

/// What one receiver sees without coordination: its own state bit `x` and its output
/// bit `y`, given the sent bit `u`. Indexed `g[u][x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub receivers: usize,
    pub g: [[[f64; 2]; 2]; 2],
}

impl EffectiveChannel {
    /// Largest deviation of any cell from `pi(x) pi(y) = 1/4`.
    pub fn max_deviation_from_uniform_product(&self) -> f64 {
        self.g.iter().flatten().flatten().map(|p| (p - 0.25).abs()).fold(0.0, f64::max)
    }

    /// `I(u; y)` with `u` uniform.
    pub fn input_output_information(&self) -> f64 {
        let joint: Vec<Vec<f64>> =
            (0..2).map(|u| (0..2).map(|y| 0.5 * (self.g[u][0][y] + self.g[u][1][y])).collect()).collect();
        mutual_information(&joint)
    }

    /// `I(u; (x, y))` with `u` uniform.
    pub fn input_side_output_information(&self) -> f64 {
        let joint: Vec<Vec<f64>> =
            (0..2).map(|u| (0..4).map(|xy| 0.5 * self.g[u][xy >> 1][xy & 1]).collect()).collect();
        mutual_information(&joint)
    }
}

/// Enumerates all state words: `g(x,y|u) = 2^-N sum delta(x, x_1) delta(y, phi(x) xor u)`.
pub fn effective_channel_table(receivers: usize) -> Result<EffectiveChannel> {
    check_receivers(receivers)?;
    if receivers > 24 {
        return Err(Error::StateSpaceTooLarge { bits: receivers as u32, limit: 24 });
    }
    let mut g = [[[0.0; 2]; 2]; 2];
    let weight = 1.0 / (1u64 << receivers) as f64;
    for u in 0..2u8 {
        for word in bits::all_strings(receivers) {
            let y = bits::parity(&word) ^ u;
            g[u as usize][word[0] as usize][y as usize] += weight;
        }
    }
    Ok(EffectiveChannel { receivers, g })
}
