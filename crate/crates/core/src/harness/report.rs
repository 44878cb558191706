//! CSV row types and writers. Column order is the field order.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub scenario: String,
    pub strategy: String,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub receiver: usize,
    pub rate: f64,
    pub p_err: f64,
    pub aborts: u64,
    pub per_bit_success: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerRow {
    pub strategy: String,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub n: usize,
    pub m: usize,
    pub p2p_messages: u64,
    pub broadcasts: u64,
    pub key_messages: u64,
    pub ghz_copies: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageRow {
    pub protocol: String,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub coalition: String,
    pub secret: String,
    pub method: String,
    pub mi_bits: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzValidationRow {
    pub source_kind: String,
    pub param: f64,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub m: usize,
    pub trial: u64,
    pub verdict: String,
    pub z_failures: usize,
    pub x_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRow {
    pub source_kind: String,
    pub param: f64,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub m: usize,
    pub trials: u64,
    pub detections: u64,
    pub frequency: f64,
    pub analytic: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScalingRow {
    pub scenario: String,
    #[serde(rename = "N")]
    pub receivers: usize,
    pub n: usize,
    pub m: usize,
    pub p2p_messages: u64,
    pub broadcasts: u64,
    pub decode_broadcasts: u64,
    pub key_messages: u64,
    pub ghz_copies: u64,
    pub classical_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub scenario: String,
    pub metric: String,
    pub slope: f64,
    pub r_squared: f64,
    pub growth: String,
}

/// Writes rows with a header line (also when there are no rows).
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const RATE_HEADER: &[&str] =
    &["scenario", "strategy", "N", "n", "m", "trials", "receiver", "rate", "p_err", "aborts", "per_bit_success"];
pub const LEDGER_HEADER: &[&str] =
    &["strategy", "N", "n", "m", "p2p_messages", "broadcasts", "key_messages", "ghz_copies"];
pub const LEAKAGE_HEADER: &[&str] = &["protocol", "N", "coalition", "secret", "method", "mi_bits", "ci_low", "ci_high"];
pub const GHZ_VALIDATION_HEADER: &[&str] =
    &["source_kind", "param", "N", "m", "trial", "verdict", "z_failures", "x_failures"];
pub const DETECTION_HEADER: &[&str] =
    &["source_kind", "param", "N", "m", "trials", "detections", "frequency", "analytic", "sigma"];
pub const SCALING_HEADER: &[&str] = &[
    "scenario",
    "N",
    "n",
    "m",
    "p2p_messages",
    "broadcasts",
    "decode_broadcasts",
    "key_messages",
    "ghz_copies",
    "classical_total",
];
pub const FIT_HEADER: &[&str] = &["scenario", "metric", "slope", "r_squared", "growth"];
