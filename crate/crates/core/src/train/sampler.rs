//! Negative sampling from a smoothed unigram distribution.

use std::sync::Arc;

use rand::Rng as _;

use crate::seed::{self, Rng};
use crate::vocab::Vocabulary;
use crate::{Error, Result};

/// Cumulative distribution with `P(i) ∝ count(i)^exponent`.
#[derive(Clone, Debug)]
pub struct UnigramTable {
    cdf: Vec<f64>,
}

impl UnigramTable {
    pub fn new(counts: &[u64], exponent: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("sampler over an empty vocabulary".into()));
        }
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::Config(format!("sampling exponent must be >= 0, got {exponent}")));
        }
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(counts.len());
        for &c in counts {
            if c == 0 {
                return Err(Error::Config("sampler counts must be positive".into()));
            }
            acc += (c as f64).powf(exponent);
            cdf.push(acc);
        }
        Ok(UnigramTable { cdf })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    fn total(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn probability(&self, id: u32) -> f64 {
        let i = id as usize;
        let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        (self.cdf[i] - lo) / self.total()
    }

    pub fn sample(&self, rng: &mut Rng) -> u32 {
        let u = rng.random::<f64>() * self.total();
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1) as u32
    }
}

/// A unigram table paired with its own seeded random stream.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    table: Arc<UnigramTable>,
    rng: Rng,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, exponent: f64, seed: u64) -> Result<Self> {
        Ok(Self::from_table(
            Arc::new(UnigramTable::new(vocab.counts(), exponent)?),
            seed,
        ))
    }

    pub fn from_table(table: Arc<UnigramTable>, seed: u64) -> Self {
        NegativeSampler {
            table,
            rng: seed::rng(seed),
        }
    }

    pub fn table(&self) -> &UnigramTable {
        &self.table
    }

    pub fn sample(&mut self) -> u32 {
        self.table.sample(&mut self.rng)
    }

    /// Fills `out` with `k` negatives, skipping draws equal to `positive`.
    /// Fewer than `k` may come back when the draw hits the positive.
    pub fn negatives(&mut self, positive: u32, k: usize, out: &mut Vec<u32>) {
        out.clear();
        for _ in 0..k {
            let id = self.sample();
            if id != positive {
                out.push(id);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_always_drawn() {
        let v = Vocabulary::build(["only"], 1).unwrap();
        let mut s = NegativeSampler::new(&v, 0.75, 1).unwrap();
        assert!((0..1000).all(|_| s.sample() == 0));
    }

    #[test]
    fn exponent_zero_is_uniform() {
        let t = UnigramTable::new(&[100, 10, 1], 0.0).unwrap();
        for id in 0..3 {
            assert!((t.probability(id) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn smoothed_probabilities() {
        // 81^0.75 = 27, 16^0.75 = 8
        let t = UnigramTable::new(&[81, 16], 0.75).unwrap();
        assert!((t.probability(0) - 27.0 / 35.0).abs() < 1e-12);
        assert!((t.probability(1) - 8.0 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let t = Arc::new(UnigramTable::new(&[5, 4, 3, 2, 1], 0.75).unwrap());
        let mut a = NegativeSampler::from_table(t.clone(), 9);
        let mut b = NegativeSampler::from_table(t, 9);
        let xa: Vec<u32> = (0..100).map(|_| a.sample()).collect();
        let xb: Vec<u32> = (0..100).map(|_| b.sample()).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn errors() {
        assert!(UnigramTable::new(&[], 0.75).is_err());
        assert!(UnigramTable::new(&[1], -1.0).is_err());
        assert!(UnigramTable::new(&[1, 0], 1.0).is_err());
    }

    #[test]
    fn negatives_skip_positive() {
        let t = Arc::new(UnigramTable::new(&[1, 1], 0.0).unwrap());
        let mut s = NegativeSampler::from_table(t, 3);
        let mut out = Vec::new();
        for _ in 0..50 {
            s.negatives(1, 5, &mut out);
            assert!(out.iter().all(|&id| id == 0));
            assert!(out.len() <= 5);
        }
    }
}
