//! The state-dependent product broadcast channel.
//!
//! At each use `t` every receiver `i` gets one state bit `x_{i,t}`. The channel state is
//! the parity of those bits, and the same state acts on all `N` streams at once: state 0
//! passes each bit through, state 1 flips it.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;

use crate::bits;
use crate::coordinator::{CoordinationOutcome, CoordinatorStrategy};
use crate::error::{Error, Result};
use crate::ledger::ComplexityLedger;
use crate::rng::SeedTree;

/// Fewer receivers make the collusion bound `|Z| <= N - 2` vacuous.
pub const MIN_RECEIVERS: usize = 3;

/// Exhaustive evaluation is used up to this many joint (message, state) outcomes.
pub const EXHAUSTIVE_LIMIT_BITS: u32 = 20;

pub fn check_receivers(receivers: usize) -> Result<()> {
    if receivers < MIN_RECEIVERS {
        return Err(Error::Domain(format!("need at least {MIN_RECEIVERS} receivers, got {receivers}")));
    }
    Ok(())
}

/// The state bits of one channel use, one per receiver.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateWord {
    bits: Vec<u8>,
}

impl StateWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        check_receivers(bits.len())?;
        bits::check_bits(&bits, "state word")?;
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn receivers(&self) -> usize {
        self.bits.len()
    }

    pub fn phi(&self) -> u8 {
        bits::parity(&self.bits)
    }
}

/// Channel state of one use: the parity of its state word.
pub fn phi(word: &StateWord) -> u8 {
    word.phi()
}

/// State 0 is the identity, state 1 the bit flip.
pub fn apply_channel_bit(u: u8, s: u8) -> u8 {
    u ^ s
}

/// State words for a whole block of `n` channel uses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSequence {
    words: Vec<StateWord>,
}

impl StateSequence {
    pub fn new(words: Vec<StateWord>) -> Result<Self> {
        let first = words.first().ok_or_else(|| Error::Shape("empty state sequence".into()))?;
        let receivers = first.receivers();
        if let Some(t) = words.iter().position(|w| w.receivers() != receivers) {
            return Err(Error::Shape(format!(
                "state word {t} has {} receivers, expected {receivers}",
                words[t].receivers()
            )));
        }
        Ok(Self { words })
    }

    /// Builds the sequence from per-receiver rows: `parts[i][t] = x_{i,t}`.
    pub fn from_parts(parts: &[Vec<u8>]) -> Result<Self> {
        let n = parts.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::Shape("state parts must be non-empty".into()));
        }
        if parts.iter().any(|p| p.len() != n) {
            return Err(Error::Shape("state parts have unequal lengths".into()));
        }
        let words = (0..n).map(|t| StateWord::new(parts.iter().map(|p| p[t]).collect())).collect::<Result<Vec<_>>>()?;
        Self::new(words)
    }

    /// Receiver-major flat layout, as produced by [`StateSequence::flatten`].
    pub fn from_flat(receivers: usize, block_len: usize, flat: &[u8]) -> Result<Self> {
        if flat.len() != receivers * block_len {
            return Err(Error::Shape(format!("expected {} state bits, got {}", receivers * block_len, flat.len())));
        }
        let parts: Vec<Vec<u8>> = flat.chunks(block_len).map(<[u8]>::to_vec).collect();
        Self::from_parts(&parts)
    }

    /// Uniform i.i.d. state bits.
    pub fn random<R: Rng + ?Sized>(receivers: usize, block_len: usize, rng: &mut R) -> Result<Self> {
        check_receivers(receivers)?;
        if block_len == 0 {
            return Err(Error::Shape("block length must be at least 1".into()));
        }
        let words = (0..block_len)
            .map(|_| StateWord::new((0..receivers).map(|_| rng.gen::<bool>() as u8).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(words)
    }

    pub fn receivers(&self) -> usize {
        self.words[0].receivers()
    }

    pub fn block_len(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[StateWord] {
        &self.words
    }

    pub fn word(&self, t: usize) -> &StateWord {
        &self.words[t]
    }

    /// Receiver `i`'s state bits over the block.
    pub fn part(&self, i: usize) -> Vec<u8> {
        self.words.iter().map(|w| w.bits[i]).collect()
    }

    pub fn parts(&self) -> Vec<Vec<u8>> {
        (0..self.receivers()).map(|i| self.part(i)).collect()
    }

    pub fn flatten(&self) -> Vec<u8> {
        self.parts().concat()
    }

    /// Channel states `s_t` for the whole block.
    pub fn states(&self) -> Vec<u8> {
        self.words.iter().map(StateWord::phi).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Codebook {
    /// Message `m` is sent as its `n`-bit binary expansion.
    Raw,
    Table {
        words: Vec<Vec<u8>>,
        index: HashMap<Vec<u8>, u64>,
    },
}

/// Message sets, encoder and decoding sets for `N` receivers and block length `n`.
///
/// With coordination value `gamma` receiver `i` decodes message `j` exactly on the
/// word `u_{i,j} XOR gamma`, so decoding sets for a fixed `gamma` are disjoint whenever
/// the codewords are distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastCode {
    receivers: usize,
    block_len: usize,
    books: Vec<Codebook>,
}

impl BroadcastCode {
    /// The identity code: `M_i = {0,1}^n`, codeword = binary expansion, MSB first.
    pub fn raw(receivers: usize, block_len: usize) -> Result<Self> {
        check_receivers(receivers)?;
        if block_len == 0 || block_len > 64 {
            return Err(Error::Domain(format!("raw code supports 1..=64 bits per block, got {block_len}")));
        }
        Ok(Self { receivers, block_len, books: vec![Codebook::Raw; receivers] })
    }

    /// Explicit per-receiver codebooks. Codewords of a receiver must be distinct.
    pub fn from_codebooks(receivers: usize, block_len: usize, books: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        check_receivers(receivers)?;
        if books.len() != receivers {
            return Err(Error::Shape(format!("{} codebooks for {receivers} receivers", books.len())));
        }
        let mut out = Vec::with_capacity(receivers);
        for (i, words) in books.into_iter().enumerate() {
            if words.is_empty() {
                return Err(Error::Domain(format!("receiver {i} has an empty message set")));
            }
            let mut index = HashMap::with_capacity(words.len());
            for (j, w) in words.iter().enumerate() {
                if w.len() != block_len {
                    return Err(Error::Shape(format!("receiver {i} codeword {j} has length {}", w.len())));
                }
                bits::check_bits(w, "codeword")?;
                if index.insert(w.clone(), j as u64).is_some() {
                    return Err(Error::Domain(format!("receiver {i} encoder is not injective at message {j}")));
                }
            }
            out.push(Codebook::Table { words, index });
        }
        Ok(Self { receivers, block_len, books: out })
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn message_set_size(&self, receiver: usize) -> u128 {
        match &self.books[receiver] {
            Codebook::Raw => 1u128 << self.block_len,
            Codebook::Table { words, .. } => words.len() as u128,
        }
    }

    /// `(1/n) log2 |M_i|`.
    pub fn rate(&self, receiver: usize) -> f64 {
        (self.message_set_size(receiver) as f64).log2() / self.block_len as f64
    }

    fn check_message(&self, receiver: usize, message: u64) -> Result<()> {
        if receiver >= self.receivers {
            return Err(Error::Shape(format!("receiver {receiver} out of range")));
        }
        if (message as u128) >= self.message_set_size(receiver) {
            return Err(Error::Domain(format!("message {message} outside receiver {receiver}'s message set")));
        }
        Ok(())
    }

    pub fn encode_one(&self, receiver: usize, message: u64) -> Result<Vec<u8>> {
        self.check_message(receiver, message)?;
        Ok(match &self.books[receiver] {
            Codebook::Raw => bits::index_to_bits(message, self.block_len),
            Codebook::Table { words, .. } => words[message as usize].clone(),
        })
    }

    pub fn encode(&self, messages: &[u64]) -> Result<Vec<Vec<u8>>> {
        if messages.len() != self.receivers {
            return Err(Error::Shape(format!("{} messages for {} receivers", messages.len(), self.receivers)));
        }
        messages.iter().enumerate().map(|(i, &m)| self.encode_one(i, m)).collect()
    }

    /// Draws a uniform message for every receiver.
    pub fn random_messages<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        (0..self.receivers)
            .map(|i| match self.message_set_size(i) {
                size if size > u64::MAX as u128 => rng.gen::<u64>(),
                size => rng.gen_range(0..size as u64),
            })
            .collect()
    }

    /// The (single) word in decoding set `D^gamma_{i,j}`.
    pub fn decoding_set(&self, receiver: usize, gamma: &[u8], message: u64) -> Result<Vec<u8>> {
        Ok(bits::xor(&self.encode_one(receiver, message)?, gamma))
    }

    /// Receiver `i`'s estimate, or `None` when `received` lies in no decoding set.
    pub fn decode(&self, received: &[u8], gamma: &[u8], receiver: usize) -> Result<Option<u64>> {
        if receiver >= self.receivers {
            return Err(Error::Shape(format!("receiver {receiver} out of range")));
        }
        if received.len() != self.block_len || gamma.len() != self.block_len {
            return Err(Error::Shape(format!(
                "decoder expects {} bits, got received={} gamma={}",
                self.block_len,
                received.len(),
                gamma.len()
            )));
        }
        let word = bits::xor(received, gamma);
        Ok(match &self.books[receiver] {
            Codebook::Raw => Some(bits::bits_to_index(&word)),
            Codebook::Table { index, .. } => index.get(&word).copied(),
        })
    }
}

/// Free-function form of [`BroadcastCode::decode`].
pub fn decode(code: &BroadcastCode, received: &[u8], gamma: &[u8], receiver: usize) -> Result<Option<u64>> {
    code.decode(received, gamma, receiver)
}

/// What the receivers get from one block: their output streams and state bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelOutput {
    pub streams: Vec<Vec<u8>>,
    pub codewords: Vec<Vec<u8>>,
    pub state_info: StateSequence,
}

impl ChannelOutput {
    /// The state bits delivered to receiver `i` alongside its stream.
    pub fn side_information(&self, receiver: usize) -> Vec<u8> {
        self.state_info.part(receiver)
    }

    /// One line per use: `t s_t x_1..x_N u_1..u_N y_1..y_N`.
    pub fn write_golden<W: Write>(&self, mut out: W) -> Result<()> {
        let states = self.state_info.states();
        for t in 0..self.state_info.block_len() {
            let x = bits::to_string(self.state_info.word(t).bits());
            let u: String = self.codewords.iter().map(|c| if c[t] == 0 { '0' } else { '1' }).collect();
            let y: String = self.streams.iter().map(|c| if c[t] == 0 { '0' } else { '1' }).collect();
            writeln!(out, "{t} {} {x} {u} {y}", states[t])?;
        }
        Ok(())
    }
}

/// Sends one block through the channel. Every stream at use `t` sees state `phi(x_t)`.
pub fn transmit_block(code: &BroadcastCode, messages: &[u64], states: &StateSequence) -> Result<ChannelOutput> {
    if states.receivers() != code.receivers() {
        return Err(Error::Shape(format!(
            "code has {} receivers, state sequence has {}",
            code.receivers(),
            states.receivers()
        )));
    }
    if states.block_len() != code.block_len() {
        return Err(Error::Shape(format!(
            "code block length {} differs from state sequence length {}",
            code.block_len(),
            states.block_len()
        )));
    }
    let codewords = code.encode(messages)?;
    let s = states.states();
    let streams =
        codewords.iter().map(|u| u.iter().zip(&s).map(|(&b, &st)| apply_channel_bit(b, st)).collect()).collect();
    Ok(ChannelOutput { streams, codewords, state_info: states.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessEstimate {
    Exact(f64),
    MonteCarlo { estimate: f64, trials: u64 },
}

impl SuccessEstimate {
    pub fn value(&self) -> f64 {
        match *self {
            SuccessEstimate::Exact(p) => p,
            SuccessEstimate::MonteCarlo { estimate, .. } => estimate,
        }
    }
}

/// `log2` of the number of joint (message tuple, state sequence) outcomes.
fn joint_outcome_bits(code: &BroadcastCode) -> f64 {
    let messages: f64 = (0..code.receivers()).map(|i| (code.message_set_size(i) as f64).log2()).sum();
    messages + (code.receivers() * code.block_len()) as f64
}

/// Probability that every receiver decodes its own message, under uniform messages and
/// uniform states. Exact when the joint outcome space is at most `2^20` and the
/// strategy's law can be enumerated; Monte-Carlo otherwise.
pub fn success_probability(
    code: &BroadcastCode,
    strategy: &CoordinatorStrategy,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if joint_outcome_bits(code) <= EXHAUSTIVE_LIMIT_BITS as f64 {
        match exact_success_probability(code, strategy) {
            Ok(p) => return Ok(SuccessEstimate::Exact(p)),
            Err(Error::StateSpaceTooLarge { .. }) | Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let estimate = sampled_success_probability(code, strategy, trials, seed)?;
    Ok(SuccessEstimate::MonteCarlo { estimate, trials })
}

/// Exhaustive evaluation of the average success probability.
pub fn exact_success_probability(code: &BroadcastCode, strategy: &CoordinatorStrategy) -> Result<f64> {
    let bits = joint_outcome_bits(code);
    if bits > EXHAUSTIVE_LIMIT_BITS as f64 {
        return Err(Error::StateSpaceTooLarge { bits: bits.ceil() as u32, limit: EXHAUSTIVE_LIMIT_BITS });
    }
    let receivers = code.receivers();
    let n = code.block_len();
    let width = receivers * n;
    let mut total = 0.0;
    for flat in bits::all_strings(width) {
        let states = StateSequence::from_flat(receivers, n, &flat)?;
        let s = states.states();
        for (gamma, q) in strategy.conditional_law(&states)? {
            // Messages are independent across receivers, so the average of the product
            // of per-receiver indicators is the product of per-receiver averages.
            let mut joint = 1.0;
            for (i, gamma_i) in gamma.iter().enumerate() {
                let size = code.message_set_size(i) as u64;
                let mut hits = 0u64;
                for m in 0..size {
                    let u = code.encode_one(i, m)?;
                    let y: Vec<u8> = u.iter().zip(&s).map(|(&b, &st)| apply_channel_bit(b, st)).collect();
                    if code.decode(&y, gamma_i, i)? == Some(m) {
                        hits += 1;
                    }
                }
                joint *= hits as f64 / size as f64;
            }
            total += q * joint;
        }
    }
    Ok(total / (1u64 << width) as f64)
}

/// Monte-Carlo estimate; an aborted coordination counts as a failure.
pub fn sampled_success_probability(
    code: &BroadcastCode,
    strategy: &CoordinatorStrategy,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    let tree = SeedTree::new(seed);
    let mut successes = 0u64;
    for k in 0..trials {
        let mut streams = tree.trial(k);
        let states = StateSequence::random(code.receivers(), code.block_len(), &mut streams.state)?;
        let messages = code.random_messages(&mut streams.messages);
        let mut ledger = ComplexityLedger::new();
        let run = strategy.coordinate(&states, &mut streams, &mut ledger)?;
        let CoordinationOutcome::Coordinated(gamma) = run.outcome else {
            continue;
        };
        let output = transmit_block(code, &messages, &states)?;
        let mut all = true;
        for i in 0..code.receivers() {
            if code.decode(&output.streams[i], &gamma[i], i)? != Some(messages[i]) {
                all = false;
                break;
            }
        }
        successes += all as u64;
    }
    Ok(successes as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coordinator::NonSignallingStrategy;

    fn word(bits: &[u8]) -> StateWord {
        StateWord::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&word(&[0, 0, 0])), 0);
        assert_eq!(phi(&word(&[1, 0, 1])), 0);
        assert_eq!(phi(&word(&[1, 1, 1])), 1);
    }

    #[test]
    fn channel_bit_examples() {
        assert_eq!(apply_channel_bit(1, 0), 1);
        assert_eq!(apply_channel_bit(1, 1), 0);
        assert_eq!(apply_channel_bit(0, 0), 0);
    }

    #[test]
    fn state_word_validation() {
        assert!(matches!(StateWord::new(vec![0, 1]), Err(Error::Domain(_))));
        assert!(StateWord::new(vec![0, 2, 1]).is_err());
        let ragged = StateSequence::new(vec![word(&[0, 0, 0]), word(&[0, 0, 0, 1])]);
        assert!(matches!(ragged, Err(Error::Shape(_))));
    }

    #[test]
    fn transmit_single_use() {
        let code = BroadcastCode::raw(3, 1).unwrap();
        let states = StateSequence::new(vec![word(&[1, 0, 0])]).unwrap();
        let out = transmit_block(&code, &[1, 1, 0], &states).unwrap();
        assert_eq!(out.streams, vec![vec![0], vec![0], vec![1]]);
        assert_eq!(out.side_information(0), vec![1]);
        assert_eq!(out.side_information(1), vec![0]);
    }

    #[test]
    fn even_states_leave_codewords_alone() {
        let code = BroadcastCode::raw(3, 2).unwrap();
        let states = StateSequence::new(vec![word(&[1, 1, 0]), word(&[0, 0, 0])]).unwrap();
        let out = transmit_block(&code, &[0b01, 0b10, 0b11], &states).unwrap();
        assert_eq!(out.streams, out.codewords);
    }

    #[test]
    fn transmit_rejects_mismatched_shapes() {
        let code = BroadcastCode::raw(3, 2).unwrap();
        let states = StateSequence::new(vec![word(&[1, 1, 0])]).unwrap();
        assert!(matches!(transmit_block(&code, &[0, 0, 0], &states), Err(Error::Shape(_))));
        let states4 = StateSequence::new(vec![word(&[1, 1, 0, 0]); 2]).unwrap();
        assert!(matches!(transmit_block(&code, &[0, 0, 0], &states4), Err(Error::Shape(_))));
        let states = StateSequence::new(vec![word(&[1, 1, 0]); 2]).unwrap();
        assert!(transmit_block(&code, &[0, 0], &states).is_err());
        assert!(transmit_block(&code, &[0, 0, 4], &states).is_err());
    }

    #[test]
    fn decode_examples() {
        let code = BroadcastCode::raw(3, 2).unwrap();
        assert_eq!(code.decode(&[0, 1], &[0, 0], 0).unwrap(), Some(0b01));
        assert_eq!(code.decode(&[0, 1], &[1, 1], 0).unwrap(), Some(0b10));
        // Wrong state estimate on one bit.
        let sent = 0b01;
        assert_ne!(code.decode(&[0, 1], &[1, 0], 0).unwrap(), Some(sent));
        assert!(code.decode(&[0, 1, 1], &[0, 0], 0).is_err());
    }

    #[test]
    fn table_codebooks() {
        let books = vec![vec![vec![0, 0, 0], vec![1, 1, 1]]; 3];
        let code = BroadcastCode::from_codebooks(3, 3, books).unwrap();
        assert_eq!(code.message_set_size(0), 2);
        assert!((code.rate(0) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(code.decode(&[1, 1, 1], &[0, 0, 0], 1).unwrap(), Some(1));
        assert_eq!(code.decode(&[1, 0, 1], &[0, 0, 0], 1).unwrap(), None);
        assert_eq!(code.decoding_set(0, &[1, 0, 0], 1).unwrap(), vec![0, 1, 1]);
        let dup = vec![vec![vec![0, 1], vec![0, 1]], vec![vec![0, 0]], vec![vec![0, 0]]];
        assert!(BroadcastCode::from_codebooks(3, 2, dup).is_err());
    }

    #[test]
    fn decoding_sets_are_disjoint() {
        let code = BroadcastCode::raw(3, 3).unwrap();
        for gamma in bits::all_strings(3) {
            let sets: Vec<_> = (0..8).map(|j| code.decoding_set(0, &gamma, j).unwrap()).collect();
            for a in 0..8 {
                for b in a + 1..8 {
                    assert_ne!(sets[a], sets[b]);
                }
            }
        }
    }

    #[test]
    fn no_coordination_success_is_one_half_per_use() {
        let code = BroadcastCode::raw(3, 1).unwrap();
        let strategy = CoordinatorStrategy::NonSignalling(NonSignallingStrategy::Constant(0));
        assert_eq!(success_probability(&code, &strategy, 1, 0).unwrap(), SuccessEstimate::Exact(0.5));
        let code = BroadcastCode::raw(3, 3).unwrap();
        assert_eq!(exact_success_probability(&code, &strategy).unwrap(), 0.125);
    }

    #[test]
    fn honest_classical_success_is_one() {
        for receivers in [3, 4] {
            let code = BroadcastCode::raw(receivers, 1).unwrap();
            for strategy in [CoordinatorStrategy::ClassicalPerUse, CoordinatorStrategy::ClassicalZeroSum] {
                assert_eq!(exact_success_probability(&code, &strategy).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn long_blocks_fall_back_to_sampling() {
        let code = BroadcastCode::raw(3, 10).unwrap();
        let strategy = CoordinatorStrategy::NonSignalling(NonSignallingStrategy::Constant(0));
        let est = success_probability(&code, &strategy, 20_000, 5).unwrap();
        let SuccessEstimate::MonteCarlo { estimate, .. } = est else { panic!("expected sampling") };
        // 2^-10 ~ 0.00098; binomial sd ~ 0.00022
        assert!((estimate - 2f64.powi(-10)).abs() < 0.001, "{estimate}");
    }
}
