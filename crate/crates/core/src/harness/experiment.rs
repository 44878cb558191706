use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::adversary::{
    exact_mutual_information, sampled_mutual_information, Coalition, LeakageProtocol, SamplingPlan, Secret, ViewScope,
    EXACT_LIMIT_BITS,
};
use crate::channel::{transmit_block, BroadcastCode, StateSequence};
use crate::coordinator::CoordinationOutcome;
use crate::error::Error;
use crate::ledger::ComplexityLedger;
use crate::rng::SeedTree;
use crate::transcript::Transcript;

use super::config::{ExperimentConfig, Scenario};
use super::report::{write_csv, LeakageRow, LedgerRow, RateRow, LEAKAGE_HEADER, LEDGER_HEADER, RATE_HEADER};

/// An error tagged with the stage it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessError {
    pub phase: &'static str,
    pub error: Error,
}

impl HarnessError {
    pub fn new(phase: &'static str, error: Error) -> Self {
        Self { phase, error }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.phase, self.error)
    }
}

impl std::error::Error for HarnessError {}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

pub(crate) trait Tag<T> {
    fn at(self, phase: &'static str) -> HarnessResult<T>;
}

impl<T> Tag<T> for crate::error::Result<T> {
    fn at(self, phase: &'static str) -> HarnessResult<T> {
        self.map_err(|e| HarnessError::new(phase, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub scenario: Scenario,
    pub strategy: String,
    pub receivers: usize,
    pub block_len: usize,
    pub security: usize,
    pub trials: u64,
    /// `(1/n) log2 |M_i|` per receiver.
    pub rates: Vec<f64>,
    /// Fraction of trials in which some receiver decoded wrongly or the run aborted.
    pub p_err: f64,
    pub aborts: u64,
    /// Fraction of `(receiver, use)` pairs where the coordination value equals the state.
    pub per_bit_success: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub report: RateReport,
    /// Summed over all trials.
    pub ledger: ComplexityLedger,
    pub leakage: Vec<LeakageRow>,
    /// First trial only, when requested.
    pub transcript: Option<Transcript>,
}

/// Runs `trials` end-to-end blocks: states, conferencing, transmission, decoding.
pub fn run_experiment(config: &ExperimentConfig) -> HarnessResult<ExperimentResult> {
    config.validate().at("config")?;
    let strategy = config.strategy().at("config")?;
    let n = config.receivers;
    let code = BroadcastCode::raw(n, config.block_len).at("config")?;
    let tree = SeedTree::new(config.seed);

    let mut ledger = ComplexityLedger::new();
    let mut failures = 0u64;
    let mut aborts = 0u64;
    let mut bit_hits = 0u64;
    let mut transcript = None;
    for k in 0..config.trials {
        let mut streams = tree.trial(k);
        let states = StateSequence::random(n, config.block_len, &mut streams.state).at("state-generation")?;
        let messages = code.random_messages(&mut streams.messages);
        let run = strategy.coordinate(&states, &mut streams, &mut ledger).at("conferencing")?;
        if k == 0 && config.output.transcript {
            transcript = Some(run.transcript.clone());
        }
        let gamma = match run.outcome {
            CoordinationOutcome::Coordinated(g) => g,
            CoordinationOutcome::Aborted(_) => {
                aborts += 1;
                failures += 1;
                continue;
            }
        };
        let s = states.states();
        bit_hits += gamma.iter().flat_map(|g| g.iter().zip(&s)).filter(|(a, b)| a == b).count() as u64;
        let output = transmit_block(&code, &messages, &states).at("transmission")?;
        let mut ok = true;
        for (i, g) in gamma.iter().enumerate() {
            if code.decode(&output.streams[i], g, i).at("decoding")? != Some(messages[i]) {
                ok = false;
            }
        }
        failures += u64::from(!ok);
    }
    let decoded_trials = config.trials - aborts;
    let per_bit_success = if decoded_trials == 0 {
        0.0
    } else {
        bit_hits as f64 / (decoded_trials * (n * config.block_len) as u64) as f64
    };
    let report = RateReport {
        scenario: config.scenario,
        strategy: strategy.kind().name().into(),
        receivers: n,
        block_len: config.block_len,
        security: config.security,
        trials: config.trials,
        rates: (0..n).map(|i| code.rate(i)).collect(),
        p_err: failures as f64 / config.trials as f64,
        aborts,
        per_bit_success,
    };
    let leakage = match leakage_protocol(config.scenario) {
        Some(p) => leakage_rows(p, n, config.trials.max(1000) as usize, config.security, config.seed).at("leakage")?,
        None => Vec::new(),
    };
    Ok(ExperimentResult { report, ledger, leakage, transcript })
}

/// Protocol whose transcript the leakage analysis inspects.
pub fn leakage_protocol(scenario: Scenario) -> Option<LeakageProtocol> {
    match scenario {
        Scenario::EntanglementOnly => None,
        Scenario::ClassicalOnlyI => Some(LeakageProtocol::PerUse),
        Scenario::ClassicalOnlyII => Some(LeakageProtocol::ZeroSum),
        Scenario::EntanglementClassical => Some(LeakageProtocol::EntanglementAssisted),
    }
}

/// Enumerated bits above which the harness samples instead.
const HARNESS_EXACT_BITS: usize = 16;

/// Leakage of every `N - 2` coalition about its outsiders, on single-use blocks.
///
/// Exact when the enumeration is small; otherwise sampled over decode-phase views.
pub fn leakage_rows(
    protocol: LeakageProtocol,
    receivers: usize,
    trials: usize,
    security: usize,
    seed: u64,
) -> crate::error::Result<Vec<LeakageRow>> {
    let coins = protocol.coin_count(receivers, 1)?;
    let exact = receivers + coins < HARNESS_EXACT_BITS.min(EXACT_LIMIT_BITS as usize);
    let has_masks = protocol != LeakageProtocol::PerUse;
    let mut rows = Vec::new();
    for coalition in Coalition::of_size(receivers, receivers - 2)? {
        let outside = coalition.non_members();
        let mut secrets = Vec::new();
        if has_masks {
            secrets.push(Secret::Mask(outside[0]));
        }
        secrets.push(Secret::Input(outside[0]));
        secrets.push(Secret::InputXor(outside[0], outside[1]));
        for secret in secrets {
            let row = |method: &str, mi: f64, lo: f64, hi: f64| LeakageRow {
                protocol: protocol.name().into(),
                receivers,
                coalition: coalition.label(),
                secret: secret.label(),
                method: method.into(),
                mi_bits: mi,
                ci_low: lo,
                ci_high: hi,
            };
            if exact {
                let r = exact_mutual_information(secret, &coalition, protocol, 1)?;
                rows.push(row("exact", r.mi_bits, r.mi_bits, r.mi_bits));
                rows.push(row("exact-given-phi", r.conditional_mi_bits, r.conditional_mi_bits, r.conditional_mi_bits));
            } else {
                let plan = SamplingPlan {
                    trials,
                    block_len: 1,
                    scope: ViewScope::DecodePhase,
                    security,
                    bootstrap_resamples: 100,
                    seed,
                };
                let r = sampled_mutual_information(secret, &coalition, protocol, &plan)?;
                rows.push(row("sampled", r.estimate, r.ci_low, r.ci_high));
            }
        }
    }
    Ok(rows)
}

impl ExperimentResult {
    pub fn rate_rows(&self) -> Vec<RateRow> {
        let r = &self.report;
        r.rates
            .iter()
            .enumerate()
            .map(|(i, &rate)| RateRow {
                scenario: r.scenario.name().into(),
                strategy: r.strategy.clone(),
                receivers: r.receivers,
                n: r.block_len,
                m: r.security,
                trials: r.trials,
                receiver: i,
                rate,
                p_err: r.p_err,
                aborts: r.aborts,
                per_bit_success: r.per_bit_success,
            })
            .collect()
    }

    pub fn ledger_row(&self) -> LedgerRow {
        let t = self.ledger.totals();
        let r = &self.report;
        LedgerRow {
            strategy: r.strategy.clone(),
            receivers: r.receivers,
            n: r.block_len,
            m: r.security,
            p2p_messages: t.p2p_messages,
            broadcasts: t.broadcasts,
            key_messages: t.key_setup_messages,
            ghz_copies: t.ghz_copies,
        }
    }
}

/// Writes `config.toml`, `rates.csv`, `ledger.csv`, `leakage.csv` and, if present,
/// `transcript.jsonl` into `dir`.
pub fn write_artifacts(config: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> HarnessResult<()> {
    let io = |e: std::io::Error| HarnessError::new("output", e.into());
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("config.toml"), config.to_toml().at("output")?).map_err(io)?;
    let file = |name: &str| fs::File::create(dir.join(name)).map_err(io);
    write_csv(file("rates.csv")?, &result.rate_rows(), RATE_HEADER).at("output")?;
    write_csv(file("ledger.csv")?, &[result.ledger_row()], LEDGER_HEADER).at("output")?;
    write_csv(file("leakage.csv")?, &result.leakage, LEAKAGE_HEADER).at("output")?;
    if let Some(t) = &result.transcript {
        t.write_jsonl(std::io::BufWriter::new(file("transcript.jsonl")?)).at("output")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(scenario: Scenario, receivers: usize, block_len: usize, trials: u64) -> ExperimentConfig {
        ExperimentConfig { scenario, receivers, block_len, trials, ..ExperimentConfig::default() }
    }

    #[test]
    fn zero_sum_decodes_everything() {
        let r = run_experiment(&config(Scenario::ClassicalOnlyII, 4, 64, 200)).unwrap();
        assert_eq!(r.report.p_err, 0.0);
        assert!(r.report.rates.iter().all(|&x| x == 1.0));
        assert_eq!(r.report.per_bit_success, 1.0);
        assert!(r.ledger.is_conserved());
    }

    #[test]
    fn honest_entanglement_run() {
        let mut c = config(Scenario::EntanglementClassical, 3, 16, 20);
        c.security = 1;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.report.p_err, 0.0);
        assert_eq!(r.ledger.totals().ghz_copies, 37 * 20);
    }

    #[test]
    fn fixed_string_source_aborts() {
        let mut c = config(Scenario::EntanglementClassical, 3, 8, 20);
        c.adversary.source = "fixed-string".into();
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.report.aborts, 20);
        assert_eq!(r.report.p_err, 1.0);
    }

    #[test]
    fn errors_carry_their_phase() {
        let err = run_experiment(&config(Scenario::ClassicalOnlyII, 2, 8, 1)).unwrap_err();
        assert_eq!(err.phase, "config");
        assert!(err.to_string().starts_with("[config]"));
    }

    #[test]
    fn leakage_rows_for_small_zero_sum() {
        let rows = leakage_rows(LeakageProtocol::ZeroSum, 4, 1000, 1, 0).unwrap();
        assert_eq!(rows.len(), 6 * 3 * 2);
        for r in &rows {
            let expected = if r.secret.contains('^') { 1.0 } else { 0.0 };
            assert!((r.mi_bits - expected).abs() < 1e-12, "{r:?}");
        }
    }
}
