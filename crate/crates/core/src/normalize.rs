//! Column standardization onto a scale centred at 0.5.
//!
//! Each column is mapped through `0.5 + (x - mean) / (6 s)` where `s` is the
//! sample standard deviation. Three standard deviations either side of the
//! mean land on 0 and 1; values further out are passed through unclamped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PerformanceMatrix;

/// Number of sample standard deviations spanning half of the unit scale.
const SPREAD: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub criterion: String,
    pub mean: f64,
    /// Sample standard deviation (divisor n - 1).
    pub std_dev: f64,
}

impl ColumnStats {
    fn of(criterion: &str, column: &[f64]) -> Self {
        let n = column.len() as f64;
        let mean = column.iter().sum::<f64>() / n;
        let ss: f64 = column.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self {
            criterion: criterion.to_string(),
            mean,
            std_dev: (ss / (n - 1.0)).sqrt(),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.std_dev == 0.0 {
            0.5
        } else {
            0.5 + (x - self.mean) / (SPREAD * self.std_dev)
        }
    }
}

/// Standardizes every column of `matrix`.
pub fn standardize(matrix: &PerformanceMatrix) -> Result<(PerformanceMatrix, Vec<ColumnStats>)> {
    if matrix.n_alternatives() < 2 {
        return Err(Error::Degenerate(
            "standardization needs at least 2 alternatives".into(),
        ));
    }
    let stats: Vec<ColumnStats> = matrix
        .criteria()
        .iter()
        .enumerate()
        .map(|(j, name)| ColumnStats::of(name, &matrix.column(j).collect::<Vec<_>>()))
        .collect();
    let values = matrix
        .rows()
        .iter()
        .map(|row| row.iter().zip(&stats).map(|(&x, s)| s.apply(x)).collect())
        .collect();
    Ok((matrix.with_values(values)?, stats))
}
