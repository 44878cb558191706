//! Exact Born-rule distributions from explicit state vectors.
//!
//! Basis index convention: receiver 0 is the most significant bit.

use crate::bits;
use crate::error::{Error, Result};

use super::source::{PhaseGhzSource, Setting};

pub const ORACLE_MIN_RECEIVERS: usize = 3;
pub const ORACLE_MAX_RECEIVERS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct GhzOracle {
    pub receivers: usize,
    pub amplitudes: Vec<f64>,
    pub z_distribution: Vec<f64>,
    pub x_distribution: Vec<f64>,
}

impl GhzOracle {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn distribution(&self, setting: Setting) -> &[f64] {
        match setting {
            Setting::Z => &self.z_distribution,
            Setting::X => &self.x_distribution,
        }
    }
}

fn check_range(receivers: usize) -> Result<()> {
    if !(ORACLE_MIN_RECEIVERS..=ORACLE_MAX_RECEIVERS).contains(&receivers) {
        return Err(Error::Domain(format!(
            "statevector oracle supports {ORACLE_MIN_RECEIVERS}..={ORACLE_MAX_RECEIVERS} receivers, got {receivers}"
        )));
    }
    Ok(())
}

/// Amplitudes `2^{-(N-1)/2}` on every basis state with the given parity.
fn uniform_parity_state(receivers: usize, parity: u8) -> Vec<f64> {
    let amp = 2f64.powf(-((receivers - 1) as f64) / 2.0);
    (0..1usize << receivers).map(|k| if (k.count_ones() % 2) as u8 == parity { amp } else { 0.0 }).collect()
}

fn basis_state(receivers: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; 1 << receivers];
    v[index] = 1.0;
    v
}

/// In-place `H^{(x)N}`.
fn hadamard_all(amplitudes: &mut [f64]) {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut half = 1;
    while half < amplitudes.len() {
        for block in (0..amplitudes.len()).step_by(2 * half) {
            for k in block..block + half {
                let (a, b) = (amplitudes[k], amplitudes[k + half]);
                amplitudes[k] = (a + b) * scale;
                amplitudes[k + half] = (a - b) * scale;
            }
        }
        half *= 2;
    }
}

fn born(amplitudes: &[f64]) -> Vec<f64> {
    amplitudes.iter().map(|a| a * a).collect()
}

/// Outcome distributions of a pure state measured all-Z and all-X.
pub fn pure_state_distributions(amplitudes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let z = born(amplitudes);
    let mut rotated = amplitudes.to_vec();
    hadamard_all(&mut rotated);
    (z, born(&rotated))
}

/// The phase-GHZ state vector and its all-Z / all-X distributions.
pub fn statevector_oracle(receivers: usize) -> Result<GhzOracle> {
    check_range(receivers)?;
    let amplitudes = uniform_parity_state(receivers, 0);
    let (z_distribution, x_distribution) = pure_state_distributions(&amplitudes);
    Ok(GhzOracle { receivers, amplitudes, z_distribution, x_distribution })
}

fn mix(into: &mut [f64], weight: f64, dist: &[f64]) {
    for (a, b) in into.iter_mut().zip(dist) {
        *a += weight * b;
    }
}

/// Exact outcome distribution of a source's copies, built as a mixture of pure states
/// pushed through the statevector routines.
pub fn source_distribution(source: &PhaseGhzSource, receivers: usize, setting: Setting) -> Result<Vec<f64>> {
    check_range(receivers)?;
    let pick = |amps: Vec<f64>| {
        let (z, x) = pure_state_distributions(&amps);
        match setting {
            Setting::Z => z,
            Setting::X => x,
        }
    };
    let ghz = pick(uniform_parity_state(receivers, 0));
    let zero = pick(basis_state(receivers, 0));
    let size = 1usize << receivers;
    let mut out = vec![0.0; size];
    match *source {
        PhaseGhzSource::Honest => mix(&mut out, 1.0, &ghz),
        PhaseGhzSource::FixedString => mix(&mut out, 1.0, &zero),
        PhaseGhzSource::BiasedZeroSum(eps) => {
            mix(&mut out, eps, &zero);
            mix(&mut out, 1.0 - eps, &ghz);
        }
        PhaseGhzSource::ParityViolating(delta) => {
            mix(&mut out, delta, &pick(uniform_parity_state(receivers, 1)));
            mix(&mut out, 1.0 - delta, &ghz);
        }
        PhaseGhzSource::ClassicalZeroSumMixture => {
            let even: Vec<usize> = (0..size).filter(|k| k.count_ones() % 2 == 0).collect();
            let w = 1.0 / even.len() as f64;
            for k in even {
                mix(&mut out, w, &pick(basis_state(receivers, k)));
            }
        }
    }
    Ok(out)
}

/// L1 distance between an empirical histogram and a distribution.
pub fn l1_distance(counts: &[u64], dist: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts.iter().zip(dist).map(|(&c, &p)| (c as f64 / total as f64 - p).abs()).sum()
}

/// Histogram index of an outcome string.
pub fn outcome_index(outcomes: &[u8]) -> usize {
    bits::bits_to_index(outcomes) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_receiver_amplitudes() {
        let o = statevector_oracle(3).unwrap();
        for k in 0..8usize {
            let expected = if k.count_ones() % 2 == 0 { 0.5 } else { 0.0 };
            assert!((o.amplitudes[k] - expected).abs() < 1e-15, "{k}");
        }
        assert!((o.z_distribution[0b011] - 0.25).abs() < 1e-12);
        assert!((o.x_distribution[0] - 0.5).abs() < 1e-12);
        assert!((o.x_distribution[7] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn norms_and_x_support() {
        for n in 3..=12 {
            let o = statevector_oracle(n).unwrap();
            assert!((o.norm() - 1.0).abs() < 1e-12);
            let last = (1 << n) - 1;
            let outside: f64 =
                o.x_distribution.iter().enumerate().filter(|(k, _)| *k != 0 && *k != last).map(|(_, p)| p).sum();
            assert!(outside.abs() < 1e-12, "N={n}: {outside}");
        }
    }

    #[test]
    fn out_of_range() {
        assert!(statevector_oracle(2).is_err());
        assert!(statevector_oracle(13).is_err());
    }

    #[test]
    fn mixture_x_agreement_probability() {
        let d = source_distribution(&PhaseGhzSource::ClassicalZeroSumMixture, 3, Setting::X).unwrap();
        assert!((d[0] + d[7] - 0.25).abs() < 1e-12);
        let z = source_distribution(&PhaseGhzSource::ClassicalZeroSumMixture, 3, Setting::Z).unwrap();
        let honest = statevector_oracle(3).unwrap();
        for (a, b) in z.iter().zip(&honest.z_distribution) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
