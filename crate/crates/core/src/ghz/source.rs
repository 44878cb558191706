use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};

/// Measurement basis applied by every receiver to its qubit of one copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    Z,
    X,
}

/// A source of `N`-qubit copies that should be phase-GHZ states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum PhaseGhzSource {
    Honest,
    /// Uniform mixture of even-parity basis states: right Z statistics, no coherence.
    ClassicalZeroSumMixture,
    /// With probability `epsilon` the copy is the known basis state `0^N`.
    BiasedZeroSum(f64),
    /// With probability `delta` the copy is the odd-parity superposition.
    ParityViolating(f64),
    /// Always the basis state `0^N`.
    FixedString,
}

impl PhaseGhzSource {
    pub fn kind_name(&self) -> &'static str {
        match self {
            PhaseGhzSource::Honest => "honest",
            PhaseGhzSource::ClassicalZeroSumMixture => "classical-zero-sum-mixture",
            PhaseGhzSource::BiasedZeroSum(_) => "biased-zero-sum",
            PhaseGhzSource::ParityViolating(_) => "parity-violating",
            PhaseGhzSource::FixedString => "fixed-string",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            PhaseGhzSource::BiasedZeroSum(p) | PhaseGhzSource::ParityViolating(p) => p,
            _ => 0.0,
        }
    }

    pub fn parse(kind: &str, param: f64) -> Result<Self> {
        let source = match kind {
            "honest" => PhaseGhzSource::Honest,
            "classical-zero-sum-mixture" => PhaseGhzSource::ClassicalZeroSumMixture,
            "biased-zero-sum" => PhaseGhzSource::BiasedZeroSum(param),
            "parity-violating" => PhaseGhzSource::ParityViolating(param),
            "fixed-string" => PhaseGhzSource::FixedString,
            other => return Err(Error::Config(format!("unknown GHZ source kind {other:?}"))),
        };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.param();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("source parameter {p} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, PhaseGhzSource::Honest)
    }

    /// Prepares one copy.
    pub fn prepare<R: Rng + ?Sized>(&self, receivers: usize, rng: &mut R) -> PreparedCopy {
        match *self {
            PhaseGhzSource::Honest => PreparedCopy::PhaseGhz,
            PhaseGhzSource::ClassicalZeroSumMixture => PreparedCopy::Basis(random_with_parity(receivers, 0, rng)),
            PhaseGhzSource::BiasedZeroSum(eps) => {
                if rng.gen_bool(eps) {
                    PreparedCopy::Basis(vec![0; receivers])
                } else {
                    PreparedCopy::PhaseGhz
                }
            }
            PhaseGhzSource::ParityViolating(delta) => {
                if rng.gen_bool(delta) {
                    PreparedCopy::OddPhaseGhz
                } else {
                    PreparedCopy::PhaseGhz
                }
            }
            PhaseGhzSource::FixedString => PreparedCopy::Basis(vec![0; receivers]),
        }
    }
}

/// What actually arrives for one copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreparedCopy {
    /// Uniform superposition of all even-parity strings.
    PhaseGhz,
    /// Uniform superposition of all odd-parity strings (a bit flip on one qubit).
    OddPhaseGhz,
    /// A computational basis state.
    Basis(Vec<u8>),
}

fn random_with_parity<R: Rng + ?Sized>(receivers: usize, parity: u8, rng: &mut R) -> Vec<u8> {
    let mut out: Vec<u8> = (0..receivers - 1).map(|_| rng.gen::<bool>() as u8).collect();
    out.push(bits::parity(&out) ^ parity);
    out
}

impl PreparedCopy {
    /// Born-rule outcome when every receiver measures its qubit in `setting`.
    ///
    /// Both GHZ variants are, in the X basis, an equal superposition of `|+...+>` and
    /// `|-...->`, so all receivers see the same X outcome. A basis state gives
    /// independent uniform X outcomes.
    pub fn measure<R: Rng + ?Sized>(&self, receivers: usize, setting: Setting, rng: &mut R) -> Vec<u8> {
        match (self, setting) {
            (PreparedCopy::PhaseGhz, Setting::Z) => random_with_parity(receivers, 0, rng),
            (PreparedCopy::OddPhaseGhz, Setting::Z) => random_with_parity(receivers, 1, rng),
            (PreparedCopy::PhaseGhz | PreparedCopy::OddPhaseGhz, Setting::X) => {
                vec![rng.gen::<bool>() as u8; receivers]
            }
            (PreparedCopy::Basis(b), Setting::Z) => b.clone(),
            (PreparedCopy::Basis(_), Setting::X) => (0..receivers).map(|_| rng.gen::<bool>() as u8).collect(),
        }
    }
}

/// One copy's joint measurement result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub copy_index: usize,
    pub setting: Setting,
    pub outcomes: Vec<u8>,
    pub group_id: usize,
}

/// Prepares a fresh copy from `source` and measures it.
pub fn sample_measurement<R: Rng + ?Sized>(
    source: &PhaseGhzSource,
    receivers: usize,
    setting: Setting,
    rng: &mut R,
) -> MeasurementRecord {
    let copy = source.prepare(receivers, rng);
    MeasurementRecord { copy_index: 0, setting, outcomes: copy.measure(receivers, setting, rng), group_id: 0 }
}

/// Random permutation helper shared by the validation code.
pub(crate) fn shuffled<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = (0..len).collect();
    v.shuffle(rng);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn honest_outcome_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let z = sample_measurement(&PhaseGhzSource::Honest, 3, Setting::Z, &mut rng);
            assert_eq!(bits::parity(&z.outcomes), 0);
            let x = sample_measurement(&PhaseGhzSource::Honest, 3, Setting::X, &mut rng);
            assert!(x.outcomes == vec![0, 0, 0] || x.outcomes == vec![1, 1, 1]);
        }
    }

    #[test]
    fn odd_copies_fail_parity_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let z = PreparedCopy::OddPhaseGhz.measure(4, Setting::Z, &mut rng);
            assert_eq!(bits::parity(&z), 1);
            let x = PreparedCopy::OddPhaseGhz.measure(4, Setting::X, &mut rng);
            assert!(x.iter().all(|&b| b == x[0]));
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(PhaseGhzSource::parse("parity-violating", 0.1).unwrap(), PhaseGhzSource::ParityViolating(0.1));
        assert!(PhaseGhzSource::parse("biased-zero-sum", 1.5).is_err());
        assert!(PhaseGhzSource::parse("nope", 0.0).is_err());
    }
}
