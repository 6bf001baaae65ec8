//! Walker-Vose alias tables: O(n) construction, O(1) draws from a fixed
//! discrete distribution.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Build from unnormalized non-negative weights. At least one weight
    /// must be strictly positive.
    pub fn new(weights: &[f64]) -> Result<AliasTable> {
        if weights.is_empty() {
            return Err(Error::Config("alias table needs at least one weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Numerical("alias weights must be finite and non-negative".into()));
        }
        if total <= 0.0 {
            return Err(Error::Numerical("all alias weights are zero".into()));
        }

        let n = weights.len();
        let scale = n as f64 / total;
        let mut scaled: Vec<f64> = weights.iter().map(|&w| w * scale).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();

        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            prob[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            scaled[l as usize] = (scaled[l as usize] + scaled[s as usize]) - 1.0;
            if scaled[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // leftovers are 1.0 up to rounding
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Draw an index with probability proportional to its input weight.
    /// Consumes exactly one `gen_range` and one `gen::<f64>()`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let slot = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[slot] {
            slot
        } else {
            self.alias[slot] as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn empirical(weights: &[f64], draws: usize, seed: u64) -> Vec<f64> {
        let table = AliasTable::new(weights).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; weights.len()];
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn uniform_weights_draw_uniformly() {
        let freq = empirical(&[1.0, 1.0, 1.0, 1.0], 100_000, 1);
        for f in freq {
            assert!((f - 0.25).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn skewed_weights_match_ratios() {
        let freq = empirical(&[1.0, 3.0], 100_000, 2);
        assert!((freq[0] - 0.25).abs() < 0.01);
        assert!((freq[1] - 0.75).abs() < 0.01);
    }

    #[test]
    fn zero_weight_entries_never_drawn() {
        let freq = empirical(&[0.0, 5.0], 50_000, 3);
        assert_eq!(freq[0], 0.0);
        assert_eq!(freq[1], 1.0);
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[-1.0, 2.0]).is_err());
        assert!(AliasTable::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn single_outcome_is_always_drawn() {
        let table = AliasTable::new(&[0.7]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..100 {
            assert_eq!(table.sample(&mut rng), 0);
        }
    }
}
