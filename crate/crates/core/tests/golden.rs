//! Frozen byte-exact outputs for N = 4, n = 8, seed 42.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden` after an intentional
//! change to the wire format or the random stream layout.

use std::fs;
use std::path::PathBuf;

use modsum_broadcast::bits;
use modsum_broadcast::channel::{transmit_block, BroadcastCode, StateSequence};
use modsum_broadcast::ledger::ComplexityLedger;
use modsum_broadcast::mpc::run_zero_sum_strategy;
use modsum_broadcast::rng::SeedTree;

const RECEIVERS: usize = 4;
const BLOCK_LEN: usize = 8;
const SEED: u64 = 42;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Golden {
    channel: String,
    transcript: String,
    messages: Vec<u64>,
    streams: Vec<Vec<u8>>,
    states: StateSequence,
}

fn generate() -> Golden {
    let mut streams = SeedTree::new(SEED).trial(0);
    let states = StateSequence::random(RECEIVERS, BLOCK_LEN, &mut streams.state).unwrap();
    let code = BroadcastCode::raw(RECEIVERS, BLOCK_LEN).unwrap();
    let messages = code.random_messages(&mut streams.messages);
    let out = transmit_block(&code, &messages, &states).unwrap();
    let mut channel = Vec::new();
    out.write_golden(&mut channel).unwrap();
    let mut ledger = ComplexityLedger::new();
    let (_, transcript) = run_zero_sum_strategy(&states, &mut streams.protocol, &mut ledger).unwrap();
    Golden {
        channel: String::from_utf8(channel).unwrap(),
        transcript: transcript.to_jsonl(),
        messages,
        streams: out.streams,
        states,
    }
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let frozen = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(frozen == actual, "{name} differs from the frozen fixture");
}

#[test]
fn channel_block_matches_fixture() {
    check("channel_n4_len8_seed42.txt", &generate().channel);
}

#[test]
fn zero_sum_transcript_matches_fixture() {
    check("zero_sum_n4_len8_seed42.jsonl", &generate().transcript);
}

#[test]
fn generation_is_repeatable() {
    let (a, b) = (generate(), generate());
    assert_eq!(a.channel, b.channel);
    assert_eq!(a.transcript, b.transcript);
}

/// The frozen files must agree with each other: summing the masked broadcasts in the
/// transcript gives the state column of the channel file, and removing it from the
/// received streams gives back the sent codewords.
#[test]
fn fixtures_are_consistent() {
    let channel = fs::read_to_string(fixture("channel_n4_len8_seed42.txt")).unwrap();
    let transcript = fs::read_to_string(fixture("zero_sum_n4_len8_seed42.jsonl")).unwrap();

    let mut published = Vec::new();
    for line in transcript.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["tag"] == "s_i" {
            assert_eq!(v["recipient"], "broadcast");
            published.push(bits::from_str(v["payload_bits"].as_str().unwrap()).unwrap());
        }
    }
    assert_eq!(published.len(), RECEIVERS);
    let decoded: Vec<u8> = (0..BLOCK_LEN).map(|t| published.iter().fold(0, |acc, p| acc ^ p[t])).collect();

    let lines: Vec<Vec<&str>> = channel.lines().map(|l| l.split(' ').collect()).collect();
    assert_eq!(lines.len(), BLOCK_LEN);
    for (t, fields) in lines.iter().enumerate() {
        assert_eq!(fields[0], t.to_string());
        let s: u8 = fields[1].parse().unwrap();
        assert_eq!(s, decoded[t]);
        let x = bits::from_str(fields[2]).unwrap();
        assert_eq!(bits::parity(&x), s);
        let u = bits::from_str(fields[3]).unwrap();
        let y = bits::from_str(fields[4]).unwrap();
        assert!(u.iter().zip(&y).all(|(a, b)| a ^ s == *b));
    }

    let golden = generate();
    assert_eq!(decoded, golden.states.states());
    let code = BroadcastCode::raw(RECEIVERS, BLOCK_LEN).unwrap();
    for (i, &m) in golden.messages.iter().enumerate() {
        assert_eq!(code.decode(&golden.streams[i], &decoded, i).unwrap(), Some(m));
    }
}
