//! Resource metering for conferencing runs.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    ZeroSum,
    Validation,
    Decode,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Setup, Phase::ZeroSum, Phase::Validation, Phase::Decode];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::ZeroSum => "zero-sum",
            Phase::Validation => "validation",
            Phase::Decode => "decode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    P2pMessage,
    Broadcast,
    KeySetupMessage,
    GhzCopy,
    /// One classical delivery of a whole batch of entangled copies.
    SourceFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerEvent {
    pub phase: Phase,
    pub resource: Resource,
    pub amount: u64,
}

/// Per-resource totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub p2p_messages: u64,
    pub broadcasts: u64,
    pub key_setup_messages: u64,
    pub ghz_copies: u64,
    pub source_frames: u64,
}

impl Counts {
    fn add(&mut self, resource: Resource, amount: u64) {
        let slot = match resource {
            Resource::P2pMessage => &mut self.p2p_messages,
            Resource::Broadcast => &mut self.broadcasts,
            Resource::KeySetupMessage => &mut self.key_setup_messages,
            Resource::GhzCopy => &mut self.ghz_copies,
            Resource::SourceFrame => &mut self.source_frames,
        };
        *slot += amount;
    }

    pub fn merge(&mut self, other: &Counts) {
        self.p2p_messages += other.p2p_messages;
        self.broadcasts += other.broadcasts;
        self.key_setup_messages += other.key_setup_messages;
        self.ghz_copies += other.ghz_copies;
        self.source_frames += other.source_frames;
    }

    /// Conferencing messages sent between receivers (point-to-point plus broadcasts).
    pub fn conferencing_messages(&self) -> u64 {
        self.p2p_messages + self.broadcasts
    }

    /// Every classical transmission, including key setup and source frames.
    pub fn classical_total(&self) -> u64 {
        self.p2p_messages + self.broadcasts + self.key_setup_messages + self.source_frames
    }
}

/// Running counts of messages, key transfers and entangled copies.
///
/// The ledger keeps both the event log and running totals; [`ComplexityLedger::is_conserved`]
/// checks that they agree.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComplexityLedger {
    events: Vec<LedgerEvent>,
    totals: Counts,
    per_phase: [Counts; 4],
}

impl ComplexityLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, phase: Phase, resource: Resource, amount: u64) {
        self.events.push(LedgerEvent { phase, resource, amount });
        self.totals.add(resource, amount);
        self.per_phase[phase as usize].add(resource, amount);
    }

    pub fn totals(&self) -> Counts {
        self.totals
    }

    pub fn phase(&self, phase: Phase) -> Counts {
        self.per_phase[phase as usize]
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    /// Totals equal both the per-phase sum and the replayed event log.
    pub fn is_conserved(&self) -> bool {
        let mut by_phase = Counts::default();
        for p in &self.per_phase {
            by_phase.merge(p);
        }
        let mut replay = Counts::default();
        for e in &self.events {
            replay.add(e.resource, e.amount);
        }
        by_phase == self.totals && replay == self.totals
    }

    pub fn absorb(&mut self, other: &ComplexityLedger) {
        for e in &other.events {
            self.record(e.phase, e.resource, e.amount);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_track_phases() {
        let mut ledger = ComplexityLedger::new();
        ledger.record(Phase::Setup, Resource::KeySetupMessage, 3);
        ledger.record(Phase::ZeroSum, Resource::P2pMessage, 1);
        ledger.record(Phase::ZeroSum, Resource::P2pMessage, 1);
        ledger.record(Phase::Decode, Resource::Broadcast, 1);
        let t = ledger.totals();
        assert_eq!(t.key_setup_messages, 3);
        assert_eq!(t.p2p_messages, 2);
        assert_eq!(ledger.phase(Phase::ZeroSum).p2p_messages, 2);
        assert_eq!(t.classical_total(), 6);
        assert!(ledger.is_conserved());
    }

    #[test]
    fn absorb_preserves_conservation() {
        let mut a = ComplexityLedger::new();
        a.record(Phase::Setup, Resource::GhzCopy, 37);
        let mut b = ComplexityLedger::new();
        b.record(Phase::Decode, Resource::Broadcast, 3);
        a.absorb(&b);
        assert_eq!(a.totals().ghz_copies, 37);
        assert_eq!(a.totals().broadcasts, 3);
        assert!(a.is_conserved());
    }
}
