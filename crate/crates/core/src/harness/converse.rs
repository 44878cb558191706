use rand::Rng;
use serde::Serialize;

use crate::coordinator::effective_channel_table;
use crate::error::{Error, Result};
use crate::rng::{SeedTree, Stream};

pub const CONVERSE_MIN_RECEIVERS: usize = 3;
pub const CONVERSE_MAX_RECEIVERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub receivers: usize,
    /// Largest `|g(x, y | u) - 1/4|`.
    pub max_deviation: f64,
    pub mi_u_y: f64,
    pub mi_u_xy: f64,
    pub samples: u64,
    pub correlations: Vec<PairCorrelation>,
    /// Standard error of a sample correlation between independent bits.
    pub sigma: f64,
}

impl ConverseReport {
    pub fn max_abs_correlation(&self) -> f64 {
        self.correlations.iter().map(|c| c.correlation.abs()).fold(0.0, f64::max)
    }

    pub fn correlations_within(&self, sigmas: f64) -> bool {
        self.max_abs_correlation() <= sigmas * self.sigma
    }
}

/// One receiver acting alone sees a channel whose output is independent of the input,
/// and the state bits of different receivers are uncorrelated.
pub fn converse_demo(receivers: usize, samples: u64, seed: u64) -> Result<ConverseReport> {
    if !(CONVERSE_MIN_RECEIVERS..=CONVERSE_MAX_RECEIVERS).contains(&receivers) {
        return Err(Error::Domain(format!(
            "N must be in {CONVERSE_MIN_RECEIVERS}..={CONVERSE_MAX_RECEIVERS}, got {receivers}"
        )));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    let table = effective_channel_table(receivers)?;

    let mut rng = SeedTree::new(seed).stream(Stream::StateGeneration, 0);
    let mut ones = vec![0u64; receivers];
    let mut both = vec![vec![0u64; receivers]; receivers];
    for _ in 0..samples {
        let word: Vec<bool> = (0..receivers).map(|_| rng.gen()).collect();
        for i in 0..receivers {
            if word[i] {
                ones[i] += 1;
                for j in i + 1..receivers {
                    both[i][j] += u64::from(word[j]);
                }
            }
        }
    }
    let t = samples as f64;
    let mut correlations = Vec::new();
    for i in 0..receivers {
        for j in i + 1..receivers {
            let (pi, pj, pij) = (ones[i] as f64 / t, ones[j] as f64 / t, both[i][j] as f64 / t);
            let denom = (pi * (1.0 - pi) * pj * (1.0 - pj)).sqrt();
            let correlation = if denom == 0.0 { 0.0 } else { (pij - pi * pj) / denom };
            correlations.push(PairCorrelation { i, j, correlation });
        }
    }
    Ok(ConverseReport {
        receivers,
        max_deviation: table.max_deviation_from_uniform_product(),
        mi_u_y: table.input_output_information(),
        mi_u_xy: table.input_side_output_information(),
        samples,
        correlations,
        sigma: 1.0 / t.sqrt(),
    })
}
