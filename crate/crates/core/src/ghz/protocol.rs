//! Entanglement-assisted state decoding.

use rand::Rng;

use crate::channel::{check_receivers, StateSequence};
use crate::error::{Error, Result};
use crate::ledger::{ComplexityLedger, Phase, Resource};
use crate::mpc::masked_parity_broadcast;
use crate::transcript::{Transcript, Wire};

use super::source::{PhaseGhzSource, PreparedCopy, Setting};
use super::validation::{validate_batches, validation_copies, ValidationReport};

/// Copies the source has to deliver: `4 N^2 m + 1`.
pub fn protocol4_copies(receivers: usize, m: usize) -> usize {
    4 * receivers * receivers * m + 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntanglementOutcome {
    Decoded { estimates: Vec<Vec<u8>>, masks: Vec<u8> },
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntanglementRun {
    pub outcome: EntanglementOutcome,
    pub reports: Vec<ValidationReport>,
}

/// Round used by the masked state broadcasts (after assignment and outcome rounds).
const DECODE_ROUND: u32 = 3;

/// Runs the full entanglement-assisted decoding.
///
/// The source delivers all copies in one frame. Receiver `k` validates the disjoint batch
/// `[k * 4Nm, (k+1) * 4Nm)`; all validations must pass. Each receiver then Z-measures its
/// qubit of the last copy to get its mask `r_i` and broadcasts `x_{i,t} + r_i` for the
/// block.
pub fn protocol4_decode<P: Rng + ?Sized, Q: Rng + ?Sized>(
    source: &PhaseGhzSource,
    states: &StateSequence,
    m: usize,
    protocol_rng: &mut P,
    physics_rng: &mut Q,
    wire: &mut Wire<'_>,
) -> Result<EntanglementRun> {
    let n = states.receivers();
    check_receivers(n)?;
    if m == 0 {
        return Err(Error::Domain("security parameter m must be at least 1".into()));
    }
    source.validate()?;

    let total = protocol4_copies(n, m);
    let previous = wire.phase();
    wire.set_phase(Phase::Setup);
    wire.meter(Resource::SourceFrame, 1);
    wire.meter(Resource::GhzCopy, total as u64);
    let copies: Vec<PreparedCopy> = (0..total).map(|_| source.prepare(n, physics_rng)).collect();

    let per_batch = validation_copies(n, m);
    let batches: Vec<(usize, &[PreparedCopy])> =
        (0..n).map(|k| (k, &copies[k * per_batch..(k + 1) * per_batch])).collect();
    let reports = validate_batches(&batches, n, m, protocol_rng, physics_rng, wire)?;
    if reports.iter().any(|r| !r.passed()) {
        wire.set_phase(previous);
        return Ok(EntanglementRun { outcome: EntanglementOutcome::Aborted, reports });
    }

    let masks = copies[total - 1].measure(n, Setting::Z, physics_rng);
    let estimates = decode_with_masks(&masks, states, wire)?;
    wire.set_phase(previous);
    Ok(EntanglementRun { outcome: EntanglementOutcome::Decoded { estimates, masks }, reports })
}

/// Mask storage and masked broadcasts (the steps after validation).
pub fn decode_with_masks(masks: &[u8], states: &StateSequence, wire: &mut Wire<'_>) -> Result<Vec<Vec<u8>>> {
    for (i, &r) in masks.iter().enumerate() {
        wire.local(i, "r", vec![r]);
    }
    masked_parity_broadcast(masks, states, wire, DECODE_ROUND)
}

/// Full run with its own transcript; state bits are recorded as party locals.
pub fn run_entanglement_strategy<P: Rng + ?Sized, Q: Rng + ?Sized>(
    source: &PhaseGhzSource,
    states: &StateSequence,
    m: usize,
    protocol_rng: &mut P,
    physics_rng: &mut Q,
    ledger: &mut ComplexityLedger,
) -> Result<(EntanglementRun, Transcript)> {
    let mut transcript = Transcript::new(states.receivers());
    let mut wire = Wire::new(&mut transcript, ledger, Phase::Setup);
    for i in 0..states.receivers() {
        wire.local(i, "x", states.part(i));
    }
    let run = protocol4_decode(source, states, m, protocol_rng, physics_rng, &mut wire)?;
    Ok((run, transcript))
}
