use serde::Serialize;

use crate::channel::StateSequence;
use crate::error::{Error, Result};
use crate::ledger::{ComplexityLedger, Counts, Phase};
use crate::rng::SeedTree;

use super::config::{ExperimentConfig, Scenario};
use super::report::{FitRow, ScalingRow};

/// Fewest distinct `N` values accepted for a fit.
pub const MIN_SCALING_POINTS: usize = 4;
pub const QUADRATIC_SLOPES: (f64, f64) = (1.8, 2.2);
pub const LINEAR_SLOPES: (f64, f64) = (0.8, 1.2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    Linear,
    Quadratic,
    Other,
}

impl Growth {
    pub fn classify(slope: f64) -> Self {
        if (LINEAR_SLOPES.0..=LINEAR_SLOPES.1).contains(&slope) {
            Growth::Linear
        } else if (QUADRATIC_SLOPES.0..=QUADRATIC_SLOPES.1).contains(&slope) {
            Growth::Quadratic
        } else {
            Growth::Other
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Growth::Linear => "linear",
            Growth::Quadratic => "quadratic",
            Growth::Other => "other",
        }
    }
}

/// Least-squares fit of `ln y = slope ln x + intercept`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Shape(format!("need matching samples of length >= 2, got {} and {}", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub receivers: usize,
    /// Per-run counts; identical across trials.
    pub counts: Counts,
    pub decode_broadcasts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricFit {
    pub metric: &'static str,
    pub fit: Fit,
    pub growth: Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub scenario: Scenario,
    pub block_len: usize,
    pub security: usize,
    pub points: Vec<ScalingPoint>,
    pub fits: Vec<MetricFit>,
}

impl ScalingReport {
    pub fn fit(&self, metric: &str) -> Option<&MetricFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    pub fn rows(&self) -> Vec<ScalingRow> {
        self.points
            .iter()
            .map(|p| ScalingRow {
                scenario: self.scenario.name().into(),
                receivers: p.receivers,
                n: self.block_len,
                m: self.security,
                p2p_messages: p.counts.p2p_messages,
                broadcasts: p.counts.broadcasts,
                decode_broadcasts: p.decode_broadcasts,
                key_messages: p.counts.key_setup_messages,
                ghz_copies: p.counts.ghz_copies,
                classical_total: p.counts.classical_total(),
            })
            .collect()
    }

    pub fn fit_rows(&self) -> Vec<FitRow> {
        self.fits
            .iter()
            .map(|f| FitRow {
                scenario: self.scenario.name().into(),
                metric: f.metric.into(),
                slope: f.fit.slope,
                r_squared: f.fit.r_squared,
                growth: f.growth.name().into(),
            })
            .collect()
    }
}

/// Counts resources per run for each `N` and fits their growth in `N`.
///
/// Each `N` is run `trials` times; counts must agree across trials, since they do not
/// depend on the random values. Metrics that are zero for the scenario are not fitted.
pub fn scaling_report(
    scenario: Scenario,
    receivers: &[usize],
    block_len: usize,
    security: usize,
    trials: u64,
    seed: u64,
) -> Result<ScalingReport> {
    let mut distinct = receivers.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < MIN_SCALING_POINTS {
        return Err(Error::Domain(format!(
            "need at least {MIN_SCALING_POINTS} distinct N values, got {}",
            distinct.len()
        )));
    }
    let tree = SeedTree::new(seed);
    let mut points = Vec::new();
    for &n in &distinct {
        let config = ExperimentConfig {
            scenario,
            receivers: n,
            block_len,
            security,
            trials: trials.max(1),
            seed,
            ..ExperimentConfig::default()
        };
        config.validate()?;
        let strategy = config.strategy()?;
        let mut reference: Option<(Counts, u64)> = None;
        for k in 0..config.trials {
            let mut streams = tree.trial(k);
            let states = StateSequence::random(n, block_len, &mut streams.state)?;
            let mut ledger = ComplexityLedger::new();
            strategy.coordinate(&states, &mut streams, &mut ledger)?;
            let here = (ledger.totals(), ledger.phase(Phase::Decode).broadcasts);
            match reference {
                None => reference = Some(here),
                Some(r) if r != here => {
                    return Err(Error::Domain(format!("resource counts at N={n} vary between trials")));
                }
                Some(_) => {}
            }
        }
        let (counts, decode_broadcasts) = reference.expect("at least one trial");
        points.push(ScalingPoint { receivers: n, counts, decode_broadcasts });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.receivers as f64).collect();
    let metrics: [(&'static str, fn(&ScalingPoint) -> u64); 6] = [
        ("classical_total", |p| p.counts.classical_total()),
        ("p2p_messages", |p| p.counts.p2p_messages),
        ("broadcasts", |p| p.counts.broadcasts),
        ("decode_broadcasts", |p| p.decode_broadcasts),
        ("key_messages", |p| p.counts.key_setup_messages),
        ("ghz_copies", |p| p.counts.ghz_copies),
    ];
    let mut fits = Vec::new();
    for (metric, get) in metrics {
        let ys: Vec<f64> = points.iter().map(|p| get(p) as f64).collect();
        if ys.iter().all(|&y| y > 0.0) {
            let fit = log_log_fit(&xs, &ys)?;
            fits.push(MetricFit { metric, fit, growth: Growth::classify(fit.slope) });
        }
    }
    Ok(ScalingReport { scenario, block_len, security, points, fits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let f = log_log_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classification() {
        assert_eq!(Growth::classify(2.05), Growth::Quadratic);
        assert_eq!(Growth::classify(0.97), Growth::Linear);
        assert_eq!(Growth::classify(1.5), Growth::Other);
    }

    #[test]
    fn too_few_points() {
        assert!(scaling_report(Scenario::ClassicalOnlyII, &[4, 8, 8, 16], 4, 1, 1, 0).is_err());
    }

    #[test]
    fn entanglement_counts() {
        let r = scaling_report(Scenario::EntanglementClassical, &[3, 4, 5, 6], 4, 1, 2, 0).unwrap();
        for p in &r.points {
            let n = p.receivers as u64;
            assert_eq!(p.counts.ghz_copies, 4 * n * n + 1);
            assert_eq!(p.decode_broadcasts, n);
            assert_eq!(p.counts.p2p_messages, 0);
        }
        assert!(r.fit("key_messages").is_none());
    }
}
