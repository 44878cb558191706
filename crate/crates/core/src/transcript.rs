//! Conferencing transcripts.
//!
//! Receivers are numbered from 0. A transcript holds every message in send order and
//! every party-local value (inputs, coins, derived masks) that a protocol produced, so
//! that any coalition's view can be projected out of it afterwards.

use std::io::Write;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::bits;
use crate::error::{Error, Result};
use crate::ledger::{ComplexityLedger, Phase, Resource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recipient {
    Party(usize),
    Broadcast,
}

impl Serialize for Recipient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Recipient::Party(p) => s.serialize_u64(*p as u64),
            Recipient::Broadcast => s.serialize_str("broadcast"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub round: u32,
    pub phase: Phase,
    pub sender: usize,
    pub recipient: Recipient,
    pub tag: String,
    pub payload: Vec<u8>,
}

impl Serialize for Message {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Message", 6)?;
        st.serialize_field("round", &self.round)?;
        st.serialize_field("phase", self.phase.name())?;
        st.serialize_field("sender", &self.sender)?;
        st.serialize_field("recipient", &self.recipient)?;
        st.serialize_field("tag", &self.tag)?;
        st.serialize_field("payload_bits", &bits::to_string(&self.payload))?;
        st.end()
    }
}

/// A value known only to one party: its state bits, its coins, its mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalValue {
    pub party: usize,
    pub tag: String,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    parties: usize,
    messages: Vec<Message>,
    locals: Vec<LocalValue>,
}

impl Transcript {
    pub fn new(parties: usize) -> Self {
        Self { parties, messages: Vec::new(), locals: Vec::new() }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn locals(&self) -> &[LocalValue] {
        &self.locals
    }

    pub fn record_local(&mut self, party: usize, tag: impl Into<String>, bits: Vec<u8>) {
        self.locals.push(LocalValue { party, tag: tag.into(), bits });
    }

    pub fn local(&self, party: usize, tag: &str) -> Option<&[u8]> {
        self.locals.iter().find(|l| l.party == party && l.tag == tag).map(|l| l.bits.as_slice())
    }

    pub fn broadcasts(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(|m| m.recipient == Recipient::Broadcast)
    }

    /// Appends another transcript's messages and locals (same party count).
    pub fn extend(&mut self, other: Transcript) -> Result<()> {
        if other.parties != self.parties {
            return Err(Error::Shape(format!(
                "cannot join transcripts over {} and {} parties",
                self.parties, other.parties
            )));
        }
        self.messages.extend(other.messages);
        self.locals.extend(other.locals);
        Ok(())
    }

    /// Checks party indices, self-addressed messages and payload bit values.
    pub fn validate(&self) -> Result<()> {
        for (k, m) in self.messages.iter().enumerate() {
            if m.sender >= self.parties {
                return Err(Error::MalformedTranscript(format!("message {k}: sender {} out of range", m.sender)));
            }
            if let Recipient::Party(p) = m.recipient {
                if p >= self.parties {
                    return Err(Error::MalformedTranscript(format!("message {k}: recipient {p} out of range")));
                }
                if p == m.sender {
                    return Err(Error::MalformedTranscript(format!("message {k}: sender addresses itself")));
                }
            }
            if m.payload.iter().any(|&b| b > 1) {
                return Err(Error::MalformedTranscript(format!("message {k}: payload is not binary")));
            }
        }
        for l in &self.locals {
            if l.party >= self.parties {
                return Err(Error::MalformedTranscript(format!("local {}: party {} out of range", l.tag, l.party)));
            }
        }
        Ok(())
    }

    /// Writes one JSON object per message.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut out, m)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// The send path used by protocols: every delivery lands in both the transcript and
/// the ledger.
pub struct Wire<'a> {
    pub transcript: &'a mut Transcript,
    pub ledger: &'a mut ComplexityLedger,
    phase: Phase,
}

impl<'a> Wire<'a> {
    pub fn new(transcript: &'a mut Transcript, ledger: &'a mut ComplexityLedger, phase: Phase) -> Self {
        Self { transcript, ledger, phase }
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn parties(&self) -> usize {
        self.transcript.parties()
    }

    pub fn send(&mut self, round: u32, sender: usize, recipient: usize, tag: impl Into<String>, payload: Vec<u8>) {
        self.ledger.record(self.phase, Resource::P2pMessage, 1);
        self.transcript.messages.push(Message {
            round,
            phase: self.phase,
            sender,
            recipient: Recipient::Party(recipient),
            tag: tag.into(),
            payload,
        });
    }

    pub fn broadcast(&mut self, round: u32, sender: usize, tag: impl Into<String>, payload: Vec<u8>) {
        self.ledger.record(self.phase, Resource::Broadcast, 1);
        self.transcript.messages.push(Message {
            round,
            phase: self.phase,
            sender,
            recipient: Recipient::Broadcast,
            tag: tag.into(),
            payload,
        });
    }

    pub fn local(&mut self, party: usize, tag: impl Into<String>, bits: Vec<u8>) {
        self.transcript.record_local(party, tag, bits);
    }

    pub fn meter(&mut self, resource: Resource, amount: u64) {
        self.ledger.record(self.phase, resource, amount);
    }
}
