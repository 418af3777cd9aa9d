//! Monte-Carlo estimation of pairwise winning indices.
//!
//! Weight vectors are drawn uniformly from the open simplex by normalizing
//! independent unit-rate exponential draws, each alternative is scored by the
//! weighted sum of its normalized evaluations, and `p(a, b)` is the share of
//! draws in which `a` scores strictly higher than `b` (ties count one half).
//!
//! The sample index space is cut into fixed chunks. Chunk `c` draws from the
//! ChaCha stream `c` of the seeded generator, so results do not depend on how
//! chunks are scheduled across threads.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PerformanceMatrix;

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 4096;

/// Point of the open standard simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Accepts strictly positive weights summing to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be non-empty and strictly positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}")));
        }
        Ok(Self(weights))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Draws one weight vector uniformly from the open simplex of dimension `m`.
pub fn sample_weights<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<WeightVector> {
    if m == 0 {
        return Err(Error::Degenerate(
            "cannot sample weights for 0 criteria".into(),
        ));
    }
    let mut buf = vec![0.0; m];
    fill_weights(&mut buf, rng);
    Ok(WeightVector(buf))
}

fn fill_weights<R: Rng + ?Sized>(buf: &mut [f64], rng: &mut R) {
    loop {
        for w in buf.iter_mut() {
            *w = rng.sample(Exp1);
        }
        let total: f64 = buf.iter().sum();
        for w in buf.iter_mut() {
            *w /= total;
        }
        // Rounding can put a draw on the boundary; the open simplex excludes it.
        if buf.iter().all(|&w| w > 0.0) && total.is_finite() {
            return;
        }
    }
}

/// Inner product of weights and evaluations.
pub fn weighted_sum(weights: &[f64], row: &[f64]) -> Result<f64> {
    if weights.len() != row.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: row.len(),
        });
    }
    Ok(weights.iter().zip(row).map(|(w, g)| w * g).sum())
}

/// Square matrix of pairwise winning indices, stored as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwiMatrix {
    alternatives: Vec<String>,
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl PwiMatrix {
    /// Wraps externally supplied fractions (e.g. a published table).
    ///
    /// Entries must lie in `[0, 1]`, the diagonal must be zero and
    /// `p(a, b) + p(b, a)` must equal one within `1e-6`.
    pub fn from_fractions(alternatives: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = alternatives.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        for (a, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (b, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidInput(format!(
                        "p({}, {}) = {p} is not a fraction",
                        alternatives[a], alternatives[b]
                    )));
                }
                if a == b && p != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "diagonal entry p({0}, {0}) must be 0",
                        alternatives[a]
                    )));
                }
                if a != b && (p + values[b][a] - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidInput(format!(
                        "p({0}, {1}) + p({1}, {0}) != 1",
                        alternatives[a], alternatives[b]
                    )));
                }
            }
        }
        Ok(Self {
            alternatives,
            values,
            samples: None,
            seed: None,
        })
    }

    /// Same as [`PwiMatrix::from_fractions`] with entries given in percent.
    pub fn from_percent(alternatives: Vec<String>, percent: Vec<Vec<f64>>) -> Result<Self> {
        let values = percent
            .into_iter()
            .map(|row| row.into_iter().map(|p| p / 100.0).collect())
            .collect();
        Self::from_fractions(alternatives, values)
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a][b]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn samples(&self) -> Option<u64> {
        self.samples
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Moves every off-diagonal entry toward 0.5 by the factor `lambda`.
    pub fn shrink_margins(&self, lambda: f64) -> Self {
        let n = self.len();
        let values = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        if a == b {
                            0.0
                        } else {
                            0.5 + lambda * (self.values[a][b] - 0.5)
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            alternatives: self.alternatives.clone(),
            values,
            samples: None,
            seed: None,
        }
    }
}

/// Estimates the pairwise winning indices of `normalized` from `samples`
/// weight vectors.
pub fn compute_pwi(normalized: &PerformanceMatrix, samples: u64, seed: u64) -> Result<PwiMatrix> {
    if samples == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let n = normalized.n_alternatives();
    let m = normalized.n_criteria();
    if m == 0 {
        return Err(Error::Degenerate("matrix has no criteria".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let tallies: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(samples);
            tally_chunk(normalized, seed, c, end - start)
        })
        .collect();

    // Half-counts: 2 per strict win, 1 per tie.
    let mut half = vec![0u64; n * n];
    for t in &tallies {
        for (acc, x) in half.iter_mut().zip(t) {
            *acc += x;
        }
    }
    let denom = 2.0 * samples as f64;
    let values = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a == b {
                        0.0
                    } else {
                        half[a * n + b] as f64 / denom
                    }
                })
                .collect()
        })
        .collect();
    Ok(PwiMatrix {
        alternatives: normalized.alternative_ids(),
        values,
        samples: Some(samples),
        seed: Some(seed),
    })
}

fn tally_chunk(matrix: &PerformanceMatrix, seed: u64, chunk: u64, count: u64) -> Vec<u64> {
    let n = matrix.n_alternatives();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut weights = vec![0.0; matrix.n_criteria()];
    let mut scores = vec![0.0; n];
    let mut half = vec![0u64; n * n];
    for _ in 0..count {
        fill_weights(&mut weights, &mut rng);
        for (s, row) in scores.iter_mut().zip(matrix.rows()) {
            *s = weights.iter().zip(row).map(|(w, g)| w * g).sum();
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if scores[a] > scores[b] {
                    half[a * n + b] += 2;
                } else if scores[a] < scores[b] {
                    half[b * n + a] += 2;
                } else {
                    half[a * n + b] += 1;
                    half[b * n + a] += 1;
                }
            }
        }
    }
    half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_criterion_weight_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(&*sample_weights(1, &mut rng).unwrap(), &[1.0]);
        assert!(sample_weights(0, &mut rng).is_err());
    }

    #[test]
    fn weights_are_on_open_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let w = sample_weights(5, &mut rng).unwrap();
            assert!(w.iter().all(|&x| x > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_criteria_marginal_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 1_000_000;
        let mut acc = [0.0; 3];
        for _ in 0..draws {
            let w = sample_weights(3, &mut rng).unwrap();
            for (a, x) in acc.iter_mut().zip(w.iter()) {
                *a += x;
            }
        }
        for a in acc {
            assert!((a / draws as f64 - 1.0 / 3.0).abs() < 0.002);
        }
    }

    #[test]
    fn two_criteria_marginal_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 1_000_000;
        let mut xs: Vec<f64> = (0..draws)
            .map(|_| sample_weights(2, &mut rng).unwrap()[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = draws as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(ks < 0.002, "KS statistic {ks}");
    }

    #[test]
    fn weighted_sum_cases() {
        let a1 = [0.6940, 0.7349, 0.3370, 0.1917, 0.4171];
        assert_eq!(
            weighted_sum(&[1.0, 0.0, 0.0, 0.0, 0.0], &a1).unwrap(),
            0.6940
        );
        let a2 = [0.5157, 0.4869, 0.4924, 0.5268, 0.4651];
        assert!((weighted_sum(&[0.2; 5], &a2).unwrap() - 0.49738).abs() < 1e-12);
        let w = WeightVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert!((weighted_sum(&w, &[0.5; 3]).unwrap() - 0.5).abs() < 1e-15);
        assert!(weighted_sum(&w, &[0.5; 2]).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn dominance_and_ties() {
        let m = PerformanceMatrix::from_rows(vec![
            vec![0.9, 0.8, 0.7],
            vec![0.1, 0.2, 0.3],
            vec![0.1, 0.2, 0.3],
        ])
        .unwrap();
        let p = compute_pwi(&m, 5000, 3).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(1, 0), 0.0);
        assert_eq!(p.get(1, 2), 0.5);
        assert_eq!(p.get(2, 1), 0.5);
        assert_eq!(p.get(0, 0), 0.0);
    }

    #[test]
    fn reciprocity_is_exact_and_grid_aligned() {
        let m = PerformanceMatrix::from_rows(vec![
            vec![0.2, 0.9, 0.4],
            vec![0.6, 0.1, 0.5],
            vec![0.5, 0.5, 0.45],
        ])
        .unwrap();
        let k = 10_001;
        let p = compute_pwi(&m, k, 11).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert_eq!(p.get(a, b) + p.get(b, a), 1.0);
                }
                let half_units = p.get(a, b) * 2.0 * k as f64;
                assert!((half_units - half_units.round()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn one_sample_gives_coarse_entries() {
        let m = PerformanceMatrix::from_rows(vec![vec![0.2, 0.9], vec![0.6, 0.1]]).unwrap();
        let p = compute_pwi(&m, 1, 5).unwrap();
        assert!(p
            .rows()
            .iter()
            .flatten()
            .all(|&x| x == 0.0 || x == 0.5 || x == 1.0));
        assert!(compute_pwi(&m, 0, 5).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let m = PerformanceMatrix::from_rows(vec![vec![0.2, 0.9], vec![0.6, 0.1]]).unwrap();
        let a = compute_pwi(&m, 20_000, 17).unwrap();
        let b = compute_pwi(&m, 20_000, 17).unwrap();
        assert_eq!(a, b);
        let c = compute_pwi(&m, 20_000, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn percent_input_and_validation() {
        let ids = vec!["x".to_string(), "y".to_string()];
        let p =
            PwiMatrix::from_percent(ids.clone(), vec![vec![0.0, 60.0], vec![40.0, 0.0]]).unwrap();
        assert!((p.get(0, 1) - 0.6).abs() < 1e-15);
        assert!(
            PwiMatrix::from_fractions(ids.clone(), vec![vec![0.0, 0.6], vec![0.6, 0.0]]).is_err()
        );
        assert!(PwiMatrix::from_fractions(ids, vec![vec![0.1, 0.6], vec![0.4, 0.0]]).is_err());
    }
}
