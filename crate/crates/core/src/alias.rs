//! Walker/Vose alias tables: O(n) construction, O(1) draws from a fixed
//! discrete distribution.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Builds a table over `weights.len()` slots. Weights need not be
    /// normalized but must be non-negative, finite, and not all zero.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no weights"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite weight"));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidDistribution("negative weight"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero"));
        }

        let n = weights.len();
        let scale = n as f64 / total;
        let mut prob: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut alias: Vec<u32> = (0..n as u32).collect();

        let mut small = Vec::with_capacity(n);
        let mut large = Vec::with_capacity(n);
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l as u32;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }

        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let slot = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[slot] {
            slot
        } else {
            self.alias[slot] as usize
        }
    }

    /// Probability mass the table assigns to `index`, reconstructed from the
    /// slot layout.
    pub fn probability(&self, index: usize) -> f64 {
        let n = self.prob.len() as f64;
        let own = self.prob[index];
        let aliased: f64 = self
            .alias
            .iter()
            .zip(&self.prob)
            .filter(|(&a, _)| a as usize == index)
            .map(|(_, &p)| 1.0 - p)
            .sum();
        (own + aliased) / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frequencies(table: &AliasTable, draws: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; table.len()];
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        counts.into_iter().map(|c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn uniform_weights() {
        let table = AliasTable::new(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        for f in frequencies(&table, 1_000_000, 7) {
            assert!((f - 0.25).abs() < 0.005, "{f}");
        }
    }

    #[test]
    fn one_to_three() {
        let table = AliasTable::new(&[1.0, 3.0]).unwrap();
        let f = frequencies(&table, 1_000_000, 11);
        assert!((f[1] - 0.75).abs() < 0.005);
    }

    #[test]
    fn reconstructed_mass_matches_weights() {
        let w = [0.3, 0.0, 5.0, 1.25, 2.0];
        let total: f64 = w.iter().sum();
        let table = AliasTable::new(&w).unwrap();
        for (i, wi) in w.iter().enumerate() {
            assert!((table.probability(i) - wi / total).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weight_never_drawn() {
        let table = AliasTable::new(&[0.0, 2.0, 0.0]).unwrap();
        let f = frequencies(&table, 10_000, 3);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[1.0, -0.5]).is_err());
        assert!(AliasTable::new(&[f64::NAN]).is_err());
    }
}
