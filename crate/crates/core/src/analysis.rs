//! Distances between value functions, max-min dispersed selection and
//! plot data for marginal functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CriterionScale, ValueFunction};

/// Euclidean distance over all coordinates `u_j^k`.
pub fn euclidean_distance(u: &ValueFunction, v: &ValueFunction) -> Result<f64> {
    let same_shape = u.marginals().len() == v.marginals().len()
        && u
            .marginals()
            .iter()
            .zip(v.marginals())
            .all(|(a, b)| a.len() == b.len());
    if !same_shape {
        return Err(Error::DimensionMismatch {
            expected: u.dimension(),
            got: v.dimension(),
        });
    }
    Ok(u.flat()
        .zip(v.flat())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Pairwise distance matrix.
pub fn distance_matrix(candidates: &[ValueFunction]) -> Result<Vec<Vec<f64>>> {
    candidates
        .par_iter()
        .map(|u| candidates.iter().map(|v| euclidean_distance(u, v)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersedSelection {
    /// Candidate indices in the order they were selected.
    pub selected: Vec<usize>,
    pub labels: Vec<String>,
    /// Distance of each selected function to the ones chosen before it; the
    /// first entry repeats the seeding distance.
    pub min_distances: Vec<f64>,
    pub distances: Vec<Vec<f64>>,
}

/// Greedy max-min selection of `count` candidates.
///
/// Seeds with the most distant pair, then repeatedly adds the candidate
/// whose nearest selected function is farthest away. Ties go to the lowest
/// candidate index.
pub fn select_dispersed(candidates: &[ValueFunction], count: usize) -> Result<DispersedSelection> {
    let n = candidates.len();
    if count > n {
        return Err(Error::Config(format!(
            "cannot select {count} functions out of {n}"
        )));
    }
    if n >= 2 && count < 2 {
        return Err(Error::Config("dispersion count must be at least 2".into()));
    }
    let d = distance_matrix(candidates)?;
    let mut selected = Vec::with_capacity(count);
    let mut min_distances = Vec::with_capacity(count);
    if count == 1 {
        selected.push(0);
        min_distances.push(0.0);
    } else if count >= 2 {
        let (mut bi, mut bj, mut best) = (0, 1, f64::NEG_INFINITY);
        for i in 0..n {
            for j in i + 1..n {
                if d[i][j] > best {
                    (bi, bj, best) = (i, j, d[i][j]);
                }
            }
        }
        selected.extend([bi, bj]);
        min_distances.extend([best, best]);
    }
    let mut nearest: Vec<f64> = (0..n)
        .map(|k| selected.iter().map(|&p| d[k][p]).fold(f64::INFINITY, f64::min))
        .collect();
    while selected.len() < count {
        let mut pick = None;
        for k in (0..n).filter(|k| !selected.contains(k)) {
            if pick.is_none_or(|p: usize| nearest[k] > nearest[p]) {
                pick = Some(k);
            }
        }
        let k = pick.expect("fewer selected than candidates");
        min_distances.push(nearest[k]);
        selected.push(k);
        for i in 0..n {
            nearest[i] = nearest[i].min(d[i][k]);
        }
    }
    let labels = selected
        .iter()
        .map(|&i| {
            candidates[i]
                .label
                .clone()
                .unwrap_or_else(|| format!("U{}", i + 1))
        })
        .collect();
    Ok(DispersedSelection {
        selected,
        labels,
        min_distances,
        distances: d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalPlot {
    pub criterion: String,
    /// `(x_j^k, u_j^k)` in ascending `x`.
    pub points: Vec<(f64, f64)>,
}

/// Breakpoint/value pairs of every marginal function.
pub fn marginal_plot_data(u: &ValueFunction, scales: &[CriterionScale]) -> Result<Vec<MarginalPlot>> {
    if !u.matches_scales(scales) {
        return Err(Error::DimensionMismatch {
            expected: scales.iter().map(CriterionScale::len).sum(),
            got: u.dimension(),
        });
    }
    Ok(scales
        .iter()
        .zip(u.marginals())
        .map(|(s, m)| MarginalPlot {
            criterion: s.criterion.clone(),
            points: s.levels().iter().copied().zip(m.iter().copied()).collect(),
        })
        .collect())
}
