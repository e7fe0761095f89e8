//! Measurement records and the seeded random streams behind shot sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{QuditState, RegisterShape};

/// Identifier of the generator recorded with every sampled record.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Independent stream `stream` of the generator keyed by `seed`.
///
/// Work items derive their stream from their own index, so results do not
/// depend on how work is spread across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub dims: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub rng: String,
    pub tag: String,
}

impl MeasurementRecord {
    pub fn from_probabilities(shape: &RegisterShape, probabilities: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        if probabilities.len() != shape.total_dim() {
            return Err(Error::Dimension(format!(
                "{} probabilities for dimension {}",
                probabilities.len(),
                shape.total_dim()
            )));
        }
        Ok(Self {
            dims: shape.dims().to_vec(),
            probabilities,
            counts: None,
            shots: None,
            seed: None,
            rng: RNG_ALGORITHM.into(),
            tag: tag.into(),
        })
    }

    pub fn from_state(state: &QuditState) -> Self {
        Self::from_probabilities(state.shape(), state.probabilities(), "exact")
            .expect("state probabilities match its shape")
    }

    pub fn from_counts(shape: &RegisterShape, counts: Vec<u64>, seed: Option<u64>, tag: impl Into<String>) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(Error::Invalid("record without shots".into()));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        let mut rec = Self::from_probabilities(shape, probabilities, tag)?;
        rec.counts = Some(counts);
        rec.shots = Some(shots);
        rec.seed = seed;
        Ok(rec)
    }

    pub fn shape(&self) -> RegisterShape {
        RegisterShape::new(self.dims.clone()).expect("record dims are validated at construction")
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// `(outcome string, probability)` pairs with nonzero weight.
    pub fn table(&self) -> Vec<(String, f64)> {
        let shape = self.shape();
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (shape.label(i), *p))
            .collect()
    }

    /// Multinomial resampling of `shots` outcomes.
    pub fn sample_shots(&self, shots: u64, seed: u64) -> Result<Self> {
        self.sample_with(shots, seed, &mut stream_rng(seed, 0))
    }

    pub fn sample_with(&self, shots: u64, seed: u64, rng: &mut ChaCha20Rng) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Invalid("shots must be at least 1".into()));
        }
        let total = self.total();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(total));
        }
        if let Some(p) = self.probabilities.iter().find(|p| !(**p >= -1e-15)) {
            return Err(Error::Probability(*p));
        }
        let weights: Vec<f64> = self.probabilities.iter().map(|p| p.max(0.0)).collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut counts = vec![0u64; weights.len()];
        for _ in 0..shots {
            counts[dist.sample(rng)] += 1;
        }
        let mut rec = Self::from_counts(&self.shape(), counts, Some(seed), self.tag.clone())?;
        rec.tag = self.tag.clone();
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_outcome(p: f64) -> MeasurementRecord {
        let shape = RegisterShape::uniform(1, 2).unwrap();
        MeasurementRecord::from_probabilities(&shape, vec![p, 1.0 - p], "t").unwrap()
    }

    #[test]
    fn deterministic_distribution_samples_one_outcome() {
        let rec = two_outcome(1.0).sample_shots(37, 5).unwrap();
        assert_eq!(rec.counts.unwrap(), vec![37, 0]);
    }

    #[test]
    fn fair_coin_within_five_sigma() {
        let n = 1_000_000u64;
        let rec = two_outcome(0.5).sample_shots(n, 11).unwrap();
        let c = rec.counts.unwrap();
        assert_eq!(c.iter().sum::<u64>(), n);
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((c[0] as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn same_seed_same_counts() {
        let a = two_outcome(0.3).sample_shots(1000, 42).unwrap();
        let b = two_outcome(0.3).sample_shots(1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rng, RNG_ALGORITHM);
    }

    #[test]
    fn unnormalized_input_rejected() {
        assert!(matches!(two_outcome(0.5).sample_shots(0, 1), Err(Error::Invalid(_))));
        let shape = RegisterShape::uniform(1, 2).unwrap();
        let bad = MeasurementRecord::from_probabilities(&shape, vec![0.5, 0.6], "t").unwrap();
        assert!(matches!(bad.sample_shots(10, 1), Err(Error::Unnormalized(_))));
    }
}
