//! Phase-GHZ sources, their measurement statistics, batch validation and the
//! entanglement-assisted decoding protocol.

mod oracle;
mod protocol;
mod source;
mod validation;

pub use oracle::{
    l1_distance, outcome_index, pure_state_distributions, source_distribution, statevector_oracle, GhzOracle,
    ORACLE_MAX_RECEIVERS, ORACLE_MIN_RECEIVERS,
};
pub use protocol::{
    decode_with_masks, protocol4_copies, protocol4_decode, run_entanglement_strategy, EntanglementOutcome,
    EntanglementRun,
};
pub use source::{sample_measurement, MeasurementRecord, PhaseGhzSource, PreparedCopy, Setting};
pub use validation::{
    fixed_string_detection_probability, parity_violation_detection_bound, protocol3_validate, validation_copies,
    x_failure_threshold, ValidationReport, Verdict,
};
