//! Discrete joint distributions and base-2 information measures.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// `-sum p log2 p` over the given probabilities (zeros skipped).
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    -probs.into_iter().filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// Entropy of the empirical distribution given by `counts` out of `total`.
pub fn entropy_from_counts<'a, I: IntoIterator<Item = &'a u64>>(counts: I, total: u64) -> f64 {
    let t = total as f64;
    entropy_bits(counts.into_iter().map(|&c| c as f64 / t))
}

/// `I(A;B)` for a joint table `joint[a][b]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map(Vec::len).unwrap_or(0);
    let pa: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let pb: Vec<f64> = (0..cols).map(|b| joint.iter().map(|row| row[b]).sum()).collect();
    let pab = joint.iter().flat_map(|row| row.iter().copied());
    entropy_bits(pa) + entropy_bits(pb) - entropy_bits(pab)
}

/// Interns arbitrary keys as dense ids.
#[derive(Debug, Clone, Default)]
pub struct Interner<K: Hash + Eq> {
    ids: HashMap<K, u64>,
}

impl<K: Hash + Eq> Interner<K> {
    pub fn new() -> Self {
        Self { ids: HashMap::new() }
    }

    pub fn id(&mut self, key: K) -> u64 {
        let next = self.ids.len() as u64;
        *self.ids.entry(key).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Weighted outcomes of `(secret, view, condition)`.
///
/// Weights are integer multiplicities, which keeps exhaustive enumerations (all outcomes
/// equally likely) exact until the final logarithms.
#[derive(Debug, Clone, Default)]
pub struct JointDistributionTable {
    counts: HashMap<(u64, u64, u64), u64>,
    total: u64,
}

impl JointDistributionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, secret: u64, view: u64, condition: u64) {
        self.add_weighted(secret, view, condition, 1);
    }

    pub fn add_weighted(&mut self, secret: u64, view: u64, condition: u64, weight: u64) {
        *self.counts.entry((secret, view, condition)).or_insert(0) += weight;
        self.total += weight;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Normalized probabilities; checks they are non-negative and sum to one.
    pub fn probabilities(&self) -> Result<Vec<((u64, u64, u64), f64)>> {
        if self.total == 0 {
            return Err(Error::Domain("empty joint distribution".into()));
        }
        let t = self.total as f64;
        let out: Vec<_> = self.counts.iter().map(|(&k, &c)| (k, c as f64 / t)).collect();
        let sum: f64 = out.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("joint distribution sums to {sum}")));
        }
        Ok(out)
    }

    fn marginal_entropy<K: Hash + Eq, F: Fn(&(u64, u64, u64)) -> K>(&self, key: F) -> f64 {
        let mut m: HashMap<K, u64> = HashMap::new();
        for (k, &c) in &self.counts {
            *m.entry(key(k)).or_insert(0) += c;
        }
        entropy_from_counts(m.values(), self.total)
    }

    /// `I(secret; view)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let hs = self.marginal_entropy(|k| k.0);
        let hv = self.marginal_entropy(|k| k.1);
        let hsv = self.marginal_entropy(|k| (k.0, k.1));
        clamp(hs + hv - hsv)
    }

    /// `I(secret; view | condition)` in bits.
    pub fn conditional_mutual_information(&self) -> f64 {
        let hsc = self.marginal_entropy(|k| (k.0, k.2));
        let hvc = self.marginal_entropy(|k| (k.1, k.2));
        let hsvc = self.marginal_entropy(|k| *k);
        let hc = self.marginal_entropy(|k| k.2);
        clamp(hsc + hvc - hsvc - hc)
    }

    pub fn secret_entropy(&self) -> f64 {
        self.marginal_entropy(|k| k.0)
    }
}

/// Snaps floating-point residue around zero.
fn clamp(x: f64) -> f64 {
    if x.abs() < 1e-13 {
        0.0
    } else {
        x
    }
}
