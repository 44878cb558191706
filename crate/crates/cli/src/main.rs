use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use modsum_broadcast::adversary::{
    exact_mutual_information, sampled_mutual_information, Coalition, LeakageProtocol, SamplingPlan, Secret, ViewScope,
};
use modsum_broadcast::ghz::PhaseGhzSource;
use modsum_broadcast::harness::report::{
    write_csv, LeakageRow, DETECTION_HEADER, FIT_HEADER, GHZ_VALIDATION_HEADER, LEAKAGE_HEADER, SCALING_HEADER,
};
use modsum_broadcast::harness::{
    converse_demo, ghz_validation_trials, leakage_rows, run_experiment, scaling_report, summarize_detection,
    write_artifacts, ExperimentConfig, HarnessError, Scenario,
};

#[derive(Parser)]
#[command(name = "modsum", version, about = "Parity-state broadcast channel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// End-to-end runs: states, conferencing, transmission, decoding.
    Simulate(SimulateArgs),
    /// Resource counts over several N and their log-log slopes.
    Scaling(ScalingArgs),
    /// Mutual information between a secret and a coalition's view.
    Leakage(LeakageArgs),
    /// Repeated validation of GHZ copies from a (possibly faulty) source.
    ValidateGhz(ValidateArgs),
    /// Effective single-receiver channel and state-bit correlations.
    Converse(ConverseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// entanglement-only, classical-only-i, classical-only-ii or entanglement+classical [default: classical-only-ii]
    #[arg(long)]
    scenario: Option<String>,
    /// Receivers N [default: 4]
    #[arg(short = 'N', long)]
    receivers: Option<usize>,
    /// Block length n [default: 64]
    #[arg(short = 'n', long)]
    block_len: Option<usize>,
    /// Security parameter m [default: 2]
    #[arg(short = 'm', long)]
    security: Option<usize>,
    /// [default: 1000]
    #[arg(long)]
    trials: Option<u64>,
    /// Root seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// GHZ source kind [default: honest]
    #[arg(long)]
    source: Option<String>,
    /// Source parameter (epsilon or delta) [default: 0]
    #[arg(long)]
    source_param: Option<f64>,
    /// Coordinator for entanglement-only [default: parity-share-box]
    #[arg(long)]
    local_strategy: Option<String>,
    /// Output directory for config.toml and the CSV reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write transcript.jsonl for the first trial.
    #[arg(long)]
    transcript: bool,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, default_value = "classical-only-ii")]
    scenario: String,
    /// Comma-separated N values (at least 4 distinct).
    #[arg(short = 'N', long, value_delimiter = ',', default_value = "4,8,16,32")]
    receivers: Vec<usize>,
    #[arg(short = 'n', long, default_value_t = 64)]
    block_len: usize,
    #[arg(short = 'm', long, default_value_t = 1)]
    security: usize,
    #[arg(long, default_value_t = 3)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for scaling.csv and fits.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Exact,
    Sampled,
}

#[derive(Args)]
struct LeakageArgs {
    /// strategy-i, strategy-ii, entanglement or leaky-strategy-ii
    #[arg(long, default_value = "strategy-ii")]
    protocol: String,
    #[arg(short = 'N', long, default_value_t = 4)]
    receivers: usize,
    /// Comma-separated members, 0-based. Without it every N-2 coalition is analysed.
    #[arg(long, value_delimiter = ',')]
    coalition: Option<Vec<usize>>,
    /// r<i>, x<i>, x<a>^x<b> or fresh-coin (requires --coalition).
    #[arg(long)]
    secret: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(short = 'n', long, default_value_t = 1)]
    block_len: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(short = 'm', long, default_value_t = 1)]
    security: usize,
    /// Count the whole view instead of the decode-phase part when sampling.
    #[arg(long)]
    full_view: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// honest, classical-zero-sum-mixture, biased-zero-sum, parity-violating or fixed-string
    #[arg(long, default_value = "honest")]
    source: String,
    #[arg(long, default_value_t = 0.0)]
    param: f64,
    #[arg(short = 'N', long, default_value_t = 3)]
    receivers: usize,
    #[arg(short = 'm', long, default_value_t = 5)]
    security: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial CSV output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Detection summary CSV output file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ConverseArgs {
    #[arg(short = 'N', long, default_value_t = 3)]
    receivers: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Scaling(a) => scaling(a),
        Command::Leakage(a) => leakage(a),
        Command::ValidateGhz(a) => validate_ghz(a),
        Command::Converse(a) => converse(a),
    }
}

fn tagged(phase: &'static str) -> impl Fn(modsum_broadcast::Error) -> HarnessError {
    move |e| HarnessError::new(phase, e)
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::load(path).map_err(tagged("config"))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &a.scenario {
        config.scenario = Scenario::parse(s).map_err(tagged("config"))?;
    }
    config.receivers = a.receivers.unwrap_or(config.receivers);
    config.block_len = a.block_len.unwrap_or(config.block_len);
    config.security = a.security.unwrap_or(config.security);
    config.trials = a.trials.unwrap_or(config.trials);
    config.seed = a.seed.unwrap_or(config.seed);
    if let Some(s) = a.source {
        config.adversary.source = s;
    }
    config.adversary.source_param = a.source_param.unwrap_or(config.adversary.source_param);
    if let Some(s) = a.local_strategy {
        config.adversary.local_strategy = s;
    }
    if a.out.is_some() {
        config.output.dir = a.out;
    }
    config.output.transcript |= a.transcript;

    let result = run_experiment(&config)?;
    let r = &result.report;
    println!(
        "scenario={} strategy={} N={} n={} m={} trials={}",
        r.scenario, r.strategy, r.receivers, r.block_len, r.security, r.trials
    );
    println!("p_err={} aborts={} per_bit_success={}", r.p_err, r.aborts, r.per_bit_success);
    println!("rates={:?}", r.rates);
    let t = result.ledger.totals();
    println!(
        "ledger: p2p_messages={} broadcasts={} key_messages={} ghz_copies={}",
        t.p2p_messages, t.broadcasts, t.key_setup_messages, t.ghz_copies
    );
    if let Some(dir) = &config.output.dir {
        write_artifacts(&config, &result, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn scaling(a: ScalingArgs) -> anyhow::Result<()> {
    let scenario = Scenario::parse(&a.scenario).map_err(tagged("config"))?;
    let report =
        scaling_report(scenario, &a.receivers, a.block_len, a.security, a.trials, a.seed).map_err(tagged("scaling"))?;
    println!("N\tp2p\tbroadcasts\tdecode_bc\tkeys\tghz\tclassical_total");
    for row in report.rows() {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.receivers,
            row.p2p_messages,
            row.broadcasts,
            row.decode_broadcasts,
            row.key_messages,
            row.ghz_copies,
            row.classical_total
        );
    }
    for f in &report.fits {
        println!("{}: slope={:.4} r2={:.6} {}", f.metric, f.fit.slope, f.fit.r_squared, f.growth.name());
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| "[output] creating directory")?;
        let file = |name: &str| fs::File::create(dir.join(name)).with_context(|| format!("[output] creating {name}"));
        write_csv(file("scaling.csv")?, &report.rows(), SCALING_HEADER).map_err(tagged("output"))?;
        write_csv(file("fits.csv")?, &report.fit_rows(), FIT_HEADER).map_err(tagged("output"))?;
    }
    Ok(())
}

fn leakage(a: LeakageArgs) -> anyhow::Result<()> {
    let protocol = LeakageProtocol::parse(&a.protocol).map_err(tagged("config"))?;
    let rows = match (&a.coalition, &a.secret) {
        (None, None) => leakage_rows(protocol, a.receivers, a.trials, a.security, a.seed).map_err(tagged("leakage"))?,
        (Some(members), Some(secret)) => {
            let coalition = Coalition::new(members.iter().copied(), a.receivers).map_err(tagged("config"))?;
            let secret = Secret::parse(secret).map_err(tagged("config"))?;
            single_leakage(&a, protocol, &coalition, secret)?
        }
        _ => return Err(anyhow!("[config] --coalition and --secret must be given together")),
    };
    for r in &rows {
        println!(
            "{} N={} Z={} secret={} {}: {:.6} bits [{:.6}, {:.6}]",
            r.protocol, r.receivers, r.coalition, r.secret, r.method, r.mi_bits, r.ci_low, r.ci_high
        );
    }
    if let Some(path) = &a.out {
        let file = fs::File::create(path).with_context(|| format!("[output] creating {}", path.display()))?;
        write_csv(file, &rows, LEAKAGE_HEADER).map_err(tagged("output"))?;
    }
    Ok(())
}

fn single_leakage(
    a: &LeakageArgs,
    protocol: LeakageProtocol,
    coalition: &Coalition,
    secret: Secret,
) -> anyhow::Result<Vec<LeakageRow>> {
    let row = |method: &str, mi: f64, lo: f64, hi: f64| LeakageRow {
        protocol: protocol.name().into(),
        receivers: a.receivers,
        coalition: coalition.label(),
        secret: secret.label(),
        method: method.into(),
        mi_bits: mi,
        ci_low: lo,
        ci_high: hi,
    };
    let exact = match a.method {
        Method::Sampled => None,
        Method::Exact => {
            Some(exact_mutual_information(secret, coalition, protocol, a.block_len).map_err(tagged("leakage"))?)
        }
        Method::Auto => match exact_mutual_information(secret, coalition, protocol, a.block_len) {
            Ok(r) => Some(r),
            Err(modsum_broadcast::Error::StateSpaceTooLarge { .. }) => None,
            Err(e) => return Err(HarnessError::new("leakage", e).into()),
        },
    };
    if let Some(r) = exact {
        return Ok(vec![
            row("exact", r.mi_bits, r.mi_bits, r.mi_bits),
            row("exact-given-phi", r.conditional_mi_bits, r.conditional_mi_bits, r.conditional_mi_bits),
        ]);
    }
    let plan = SamplingPlan {
        trials: a.trials,
        block_len: a.block_len,
        scope: if a.full_view { ViewScope::Full } else { ViewScope::DecodePhase },
        security: a.security,
        bootstrap_resamples: 200,
        seed: a.seed,
    };
    let r = sampled_mutual_information(secret, coalition, protocol, &plan).map_err(tagged("leakage"))?;
    eprintln!("plug-in bias estimate: {:.6} bits over {} distinct views", r.bias_estimate, r.distinct_views);
    Ok(vec![row("sampled", r.estimate, r.ci_low, r.ci_high)])
}

fn validate_ghz(a: ValidateArgs) -> anyhow::Result<()> {
    let source = PhaseGhzSource::parse(&a.source, a.param).map_err(tagged("config"))?;
    let rows =
        ghz_validation_trials(&source, a.receivers, a.security, a.trials, a.seed).map_err(tagged("validation"))?;
    let summary = [summarize_detection(&source, a.receivers, a.security, &rows)];
    let s = &summary[0];
    println!(
        "source={} param={} N={} m={} trials={} detections={} frequency={} analytic={} sigma={:.6}",
        s.source_kind, s.param, s.receivers, s.m, s.trials, s.detections, s.frequency, s.analytic, s.sigma
    );
    if let Some(path) = &a.out {
        let file = fs::File::create(path).with_context(|| format!("[output] creating {}", path.display()))?;
        write_csv(file, &rows, GHZ_VALIDATION_HEADER).map_err(tagged("output"))?;
    }
    if let Some(path) = &a.summary {
        let file = fs::File::create(path).with_context(|| format!("[output] creating {}", path.display()))?;
        write_csv(file, &summary, DETECTION_HEADER).map_err(tagged("output"))?;
    }
    Ok(())
}

fn converse(a: ConverseArgs) -> anyhow::Result<()> {
    let r = converse_demo(a.receivers, a.samples, a.seed).map_err(tagged("converse"))?;
    println!("N={} max_deviation={:e} I(u;y)={:e} I(u;x,y)={:e}", r.receivers, r.max_deviation, r.mi_u_y, r.mi_u_xy);
    println!(
        "max |corr(x_i,x_j)|={:.6} sigma={:.6} within_3_sigma={}",
        r.max_abs_correlation(),
        r.sigma,
        r.correlations_within(3.0)
    );
    Ok(())
}
