//! Multisets of 0/1 vectors whose `mu`-element sub-multisets have many
//! distinct sums.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream_indexed;
use crate::witnesses::enumerate_sums;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorMultiset {
    pub mu: usize,
    /// `mu (mu - 1)` vectors of length `mu`.
    pub vectors: Vec<Vec<u8>>,
    /// Indices currently unavailable.
    pub blocked: BTreeSet<usize>,
}

impl VectorMultiset {
    pub fn new(mu: usize, vectors: Vec<Vec<u8>>) -> Result<Self> {
        if mu < 2 {
            return Err(Error::InvalidParam(format!("mu = {mu} must be >= 2")));
        }
        if vectors.len() != mu * (mu - 1) {
            return Err(Error::InvalidParam(format!(
                "multiset needs mu (mu - 1) = {} vectors, got {}",
                mu * (mu - 1),
                vectors.len()
            )));
        }
        if let Some(v) = vectors
            .iter()
            .find(|v| v.len() != mu || v.iter().any(|&b| b > 1))
        {
            return Err(Error::InvalidParam(format!(
                "{v:?} is not a 0/1 vector of length {mu}"
            )));
        }
        Ok(Self {
            mu,
            vectors,
            blocked: BTreeSet::new(),
        })
    }

    /// Independent uniform vectors.
    pub fn random<R: Rng>(mu: usize, rng: &mut R) -> Result<Self> {
        let vectors = (0..mu * (mu.max(1) - 1))
            .map(|_| (0..mu).map(|_| rng.gen_range(0..2u8)).collect())
            .collect();
        Self::new(mu, vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `true` at every index not blocked.
    pub fn available_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| !self.blocked.contains(&i))
            .collect()
    }

    pub fn full_mask(&self) -> Vec<bool> {
        vec![true; self.len()]
    }

    /// Total number of 1 entries.
    pub fn weight(&self) -> usize {
        self.vectors
            .iter()
            .map(|v| v.iter().filter(|&&b| b == 1).count())
            .sum()
    }
}

/// Outcome of [`search_vector_multiset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorSearch {
    pub multiset: VectorMultiset,
    pub sum_count: usize,
    pub trial: u64,
}

/// Samples `trials` random multisets and keeps the one with the most
/// distinct sums; ties go to the heaviest multiset (most 1 entries), then to
/// the lexicographically smallest vectors.
pub fn search_vector_multiset(mu: usize, trials: u64, seed: u64) -> Result<VectorSearch> {
    if trials == 0 {
        return Err(Error::InvalidParam(
            "vector search needs at least one trial".into(),
        ));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream_indexed(seed, "vector-multiset", trial);
            let multiset = VectorMultiset::random(mu, &mut rng)?;
            let sum_count = enumerate_sums(&multiset, &multiset.full_mask())?.len();
            Ok(VectorSearch {
                multiset,
                sum_count,
                trial,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results
        .into_iter()
        .min_by(|a, b| {
            b.sum_count
                .cmp(&a.sum_count)
                .then_with(|| b.multiset.weight().cmp(&a.multiset.weight()))
                .then_with(|| a.multiset.vectors.cmp(&b.multiset.vectors))
        })
        .expect("at least one trial"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu2_has_one_sum() {
        let s = search_vector_multiset(2, 8, 1).unwrap();
        assert_eq!(s.multiset.len(), 2);
        assert_eq!(s.sum_count, 1);
        assert!(s.multiset.weight() > 0);
    }

    #[test]
    fn mu3_reports_oracle_count() {
        let s = search_vector_multiset(3, 16, 2).unwrap();
        assert_eq!(s.multiset.len(), 6);
        let again = enumerate_sums(&s.multiset, &s.multiset.full_mask()).unwrap();
        assert_eq!(again.len(), s.sum_count);
        assert_eq!(search_vector_multiset(3, 16, 2).unwrap(), s);
    }

    #[test]
    fn duplicates_have_one_sum() {
        let v = VectorMultiset::new(3, vec![vec![1, 0, 1]; 6]).unwrap();
        assert_eq!(enumerate_sums(&v, &v.full_mask()).unwrap().len(), 1);
    }

    #[test]
    fn validates_shape() {
        assert!(VectorMultiset::new(3, vec![vec![1, 0, 1]; 5]).is_err());
        assert!(VectorMultiset::new(2, vec![vec![1, 2], vec![0, 0]]).is_err());
    }
}
