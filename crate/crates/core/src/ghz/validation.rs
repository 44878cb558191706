//! Two-setting validation of a batch of phase-GHZ copies.
//!
//! A directing receiver splits its `4Nm` copies at random into `4m` groups of `N`
//! copies and marks half the groups for Z testing and half for X testing. Every
//! receiver measures its qubit of each copy in the announced basis and broadcasts the
//! results. A Z-tested copy fails when its outcomes have odd parity; an X-tested copy
//! fails when the receivers' outcomes disagree. The batch passes when no Z copy fails
//! and at most [`x_failure_threshold`] X copies fail.
//!
//! Both checks hold with certainty for a true phase-GHZ copy. Among the modelled source
//! families the pair of statistics singles it out: basis-state sources are caught by the
//! X test and odd-parity sources by the Z test.

use rand::Rng;
use serde::Serialize;

use crate::bits;
use crate::channel::check_receivers;
use crate::error::{Error, Result};
use crate::ledger::{Phase, Resource};
use crate::transcript::Wire;

use super::source::{shuffled, MeasurementRecord, PhaseGhzSource, PreparedCopy, Setting};

/// Copies consumed by one directed validation.
pub fn validation_copies(receivers: usize, m: usize) -> usize {
    4 * receivers * m
}

/// X-test failures tolerated. Honest copies never fail, so none are tolerated.
pub fn x_failure_threshold(_m: usize) -> usize {
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub director: usize,
    pub groups_tested: usize,
    pub z_groups: usize,
    pub x_groups: usize,
    pub z_failures: usize,
    pub x_failures: usize,
    pub z_threshold: usize,
    pub x_threshold: usize,
    pub verdict: Verdict,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Basis for every copy position of a batch, plus each position's group.
#[derive(Debug, Clone)]
struct Assignment {
    settings: Vec<Setting>,
    groups: Vec<usize>,
}

fn assign_groups<R: Rng + ?Sized>(receivers: usize, m: usize, rng: &mut R) -> Assignment {
    let copies = validation_copies(receivers, m);
    let order = shuffled(copies, rng);
    let group_kinds = shuffled(4 * m, rng);
    // The first 2m entries of the shuffled group list are Z groups.
    let mut group_setting = vec![Setting::X; 4 * m];
    for &g in &group_kinds[..2 * m] {
        group_setting[g] = Setting::Z;
    }
    let mut settings = vec![Setting::Z; copies];
    let mut groups = vec![0; copies];
    for (slot, &position) in order.iter().enumerate() {
        let g = slot / receivers;
        groups[position] = g;
        settings[position] = group_setting[g];
    }
    Assignment { settings, groups }
}

fn evaluate(director: usize, m: usize, records: &[MeasurementRecord]) -> ValidationReport {
    let mut z_failures = 0;
    let mut x_failures = 0;
    for r in records {
        match r.setting {
            Setting::Z => z_failures += (bits::parity(&r.outcomes) != 0) as usize,
            Setting::X => x_failures += r.outcomes.iter().any(|&b| b != r.outcomes[0]) as usize,
        }
    }
    let x_threshold = x_failure_threshold(m);
    let verdict = if z_failures == 0 && x_failures <= x_threshold { Verdict::Pass } else { Verdict::Fail };
    ValidationReport {
        director,
        groups_tested: 4 * m,
        z_groups: 2 * m,
        x_groups: 2 * m,
        z_failures,
        x_failures,
        z_threshold: 0,
        x_threshold,
        verdict,
    }
}

/// Validates several disjoint batches concurrently.
///
/// Each director broadcasts its basis assignment (one broadcast per director); then every
/// receiver broadcasts its outcomes for all batches at once (one broadcast per receiver).
/// `protocol_rng` drives the assignment, `physics_rng` the measurement outcomes.
pub(crate) fn validate_batches<P: Rng + ?Sized, Q: Rng + ?Sized>(
    batches: &[(usize, &[PreparedCopy])],
    receivers: usize,
    m: usize,
    protocol_rng: &mut P,
    physics_rng: &mut Q,
    wire: &mut Wire<'_>,
) -> Result<Vec<ValidationReport>> {
    let needed = validation_copies(receivers, m);
    for (director, batch) in batches {
        if *director >= receivers {
            return Err(Error::Shape(format!("director {director} out of range")));
        }
        if batch.len() < needed {
            return Err(Error::InsufficientCopies { needed, available: batch.len() });
        }
    }
    let previous = wire.phase();
    wire.set_phase(Phase::Validation);

    let assignments: Vec<Assignment> = batches.iter().map(|_| assign_groups(receivers, m, protocol_rng)).collect();
    for ((director, _), a) in batches.iter().zip(&assignments) {
        let payload = a.settings.iter().map(|s| (*s == Setting::X) as u8).collect();
        wire.broadcast(1, *director, format!("assign[{director}]"), payload);
    }

    let mut all_records = Vec::with_capacity(batches.len());
    for ((_, batch), a) in batches.iter().zip(&assignments) {
        let records: Vec<MeasurementRecord> = batch[..needed]
            .iter()
            .enumerate()
            .map(|(k, copy)| MeasurementRecord {
                copy_index: k,
                setting: a.settings[k],
                outcomes: copy.measure(receivers, a.settings[k], physics_rng),
                group_id: a.groups[k],
            })
            .collect();
        all_records.push(records);
    }

    for i in 0..receivers {
        let payload: Vec<u8> = all_records.iter().flat_map(|recs| recs.iter().map(move |r| r.outcomes[i])).collect();
        wire.broadcast(2, i, "outcomes", payload);
    }
    wire.set_phase(previous);

    Ok(batches.iter().zip(&all_records).map(|((director, _), records)| evaluate(*director, m, records)).collect())
}

/// Stand-alone validation of `4Nm` fresh copies from `source`, directed by one receiver.
pub fn protocol3_validate<P: Rng + ?Sized, Q: Rng + ?Sized>(
    source: &PhaseGhzSource,
    receivers: usize,
    m: usize,
    director: usize,
    protocol_rng: &mut P,
    physics_rng: &mut Q,
    wire: &mut Wire<'_>,
) -> Result<ValidationReport> {
    check_receivers(receivers)?;
    if m == 0 {
        return Err(Error::Domain("security parameter m must be at least 1".into()));
    }
    let copies: Vec<PreparedCopy> =
        (0..validation_copies(receivers, m)).map(|_| source.prepare(receivers, physics_rng)).collect();
    wire.meter(Resource::GhzCopy, copies.len() as u64);
    let mut reports = validate_batches(&[(director, &copies)], receivers, m, protocol_rng, physics_rng, wire)?;
    Ok(reports.remove(0))
}

/// Lower bound on the chance that a parity-violating source with rate `delta` fails.
pub fn parity_violation_detection_bound(delta: f64, receivers: usize, m: usize) -> f64 {
    1.0 - (1.0 - delta).powi((2 * m * receivers) as i32)
}

/// Chance that a fixed basis-state source fails: any X-tested copy disagreeing.
pub fn fixed_string_detection_probability(receivers: usize, m: usize) -> f64 {
    let agree = 2.0 / 2f64.powi(receivers as i32);
    1.0 - agree.powi((2 * m * receivers) as i32)
}
