//! Experiment orchestration: end-to-end runs, scaling fits, validation sweeps and reports.

pub mod config;
pub mod converse;
pub mod experiment;
pub mod report;
pub mod scaling;

use crate::error::Result;
use crate::ghz::{
    fixed_string_detection_probability, parity_violation_detection_bound, protocol3_validate, PhaseGhzSource,
};
use crate::ledger::{ComplexityLedger, Phase};
use crate::rng::SeedTree;
use crate::transcript::{Transcript, Wire};

pub use config::{AdversaryConfig, ExperimentConfig, OutputConfig, Scenario};
pub use converse::{converse_demo, ConverseReport};
pub use experiment::{
    leakage_protocol, leakage_rows, run_experiment, write_artifacts, ExperimentResult, HarnessError, HarnessResult,
    RateReport,
};
pub use report::{write_csv, DetectionRow, GhzValidationRow, LeakageRow};
pub use scaling::{log_log_fit, scaling_report, Fit, Growth, ScalingReport};

/// Runs `trials` independent validations of fresh batches, each directed by receiver 0.
pub fn ghz_validation_trials(
    source: &PhaseGhzSource,
    receivers: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<GhzValidationRow>> {
    let tree = SeedTree::new(seed);
    let mut rows = Vec::with_capacity(trials as usize);
    for k in 0..trials {
        let mut streams = tree.trial(k);
        let mut transcript = Transcript::new(receivers);
        let mut ledger = ComplexityLedger::new();
        let mut wire = Wire::new(&mut transcript, &mut ledger, Phase::Validation);
        let report =
            protocol3_validate(source, receivers, m, 0, &mut streams.protocol, &mut streams.adversary, &mut wire)?;
        rows.push(GhzValidationRow {
            source_kind: source.kind_name().into(),
            param: source.param(),
            receivers,
            m,
            trial: k,
            verdict: if report.passed() { "pass".into() } else { "fail".into() },
            z_failures: report.z_failures,
            x_failures: report.x_failures,
        });
    }
    Ok(rows)
}

/// Analytic detection probability where one is known: exact for fixed-string and
/// parity-violating sources, zero for honest ones.
pub fn analytic_detection(source: &PhaseGhzSource, receivers: usize, m: usize) -> Option<f64> {
    match *source {
        PhaseGhzSource::Honest => Some(0.0),
        PhaseGhzSource::FixedString => Some(fixed_string_detection_probability(receivers, m)),
        PhaseGhzSource::ParityViolating(delta) => Some(parity_violation_detection_bound(delta, receivers, m)),
        _ => None,
    }
}

/// Detection frequency of each source over `trials` validations.
pub fn detection_sweep(
    sources: &[PhaseGhzSource],
    receivers: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<DetectionRow>> {
    sources
        .iter()
        .map(|source| {
            Ok(summarize_detection(source, receivers, m, &ghz_validation_trials(source, receivers, m, trials, seed)?))
        })
        .collect()
}

/// `analytic` is NaN when no closed form is available; `sigma` is the binomial standard
/// error at the analytic value (or at the observed frequency when there is none).
pub fn summarize_detection(
    source: &PhaseGhzSource,
    receivers: usize,
    m: usize,
    rows: &[GhzValidationRow],
) -> DetectionRow {
    let trials = rows.len() as u64;
    let detections = rows.iter().filter(|r| r.verdict == "fail").count() as u64;
    let frequency = if trials == 0 { 0.0 } else { detections as f64 / trials as f64 };
    let analytic = analytic_detection(source, receivers, m);
    let p = analytic.unwrap_or(frequency);
    DetectionRow {
        source_kind: source.kind_name().into(),
        param: source.param(),
        receivers,
        m,
        trials,
        detections,
        frequency,
        analytic: analytic.unwrap_or(f64::NAN),
        sigma: if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() },
    }
}
