//! Domain types for the additive value model.
//!
//! A [`PerformanceMatrix`] holds one row of evaluations per alternative. Each
//! criterion column induces a [`CriterionScale`], the sorted set of distinct
//! evaluations observed on it. A [`ValueFunction`] assigns a marginal value to
//! every breakpoint of every scale, and the global utility of an alternative is
//! the sum of the marginal values of its evaluations.
//!
//! All criteria are gains: a higher evaluation is never worse. Cost criteria
//! must be negated before they enter the matrix.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tie tolerance used when ranking solver output.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Tolerance applied to value functions produced by the solver.
pub const SOLVER_TOL: f64 = 1e-6;

/// Tolerance applied to value functions loaded from 4-decimal tables.
pub const PUBLISHED_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Alternative {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: None,
        }
    }

    pub fn with_label(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: Some(label.into()),
        }
    }
}

/// Alternatives × criteria evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    alternatives: Vec<Alternative>,
    criteria: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl PerformanceMatrix {
    /// Builds a matrix, checking it is rectangular, finite and free of
    /// duplicate ids.
    pub fn new(
        alternatives: Vec<Alternative>,
        criteria: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != alternatives.len() {
            return Err(Error::DimensionMismatch {
                expected: alternatives.len(),
                got: values.len(),
            });
        }
        for (alt, row) in alternatives.iter().zip(&values) {
            if row.len() != criteria.len() {
                return Err(Error::DimensionMismatch {
                    expected: criteria.len(),
                    got: row.len(),
                });
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite evaluation for alternative `{}` on criterion `{}`",
                    alt.id, criteria[pos]
                )));
            }
        }
        let mut seen = HashSet::new();
        for alt in &alternatives {
            if !seen.insert(alt.id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate alternative id `{}`",
                    alt.id
                )));
            }
        }
        let mut seen = HashSet::new();
        for c in &criteria {
            if !seen.insert(c.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate criterion id `{c}`")));
            }
        }
        Ok(Self {
            alternatives,
            criteria,
            values,
        })
    }

    /// Convenience constructor with ids `a1..an` and `g1..gm`.
    pub fn from_rows(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        let m = values.first().map_or(0, Vec::len);
        let alternatives = (1..=n).map(|i| Alternative::new(format!("a{i}"))).collect();
        let criteria = (1..=m).map(|j| format!("g{j}")).collect();
        Self::new(alternatives, criteria, values)
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn alternative_ids(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.id.clone()).collect()
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.values[index]
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[index])
    }

    pub fn n_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    pub fn n_criteria(&self) -> usize {
        self.criteria.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a.id == id)
    }

    /// Same alternatives and criteria with a replacement value table.
    pub(crate) fn with_values(&self, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.alternatives.clone(), self.criteria.clone(), values)
    }
}

/// Sorted distinct evaluations observed on one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionScale {
    pub criterion: String,
    levels: Vec<f64>,
}

impl CriterionScale {
    pub fn new(criterion: impl Into<String>, levels: Vec<f64>) -> Result<Self> {
        let criterion = criterion.into();
        if levels.is_empty() {
            return Err(Error::InvalidInput(format!(
                "criterion `{criterion}` has no levels"
            )));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(format!(
                "levels of criterion `{criterion}` are not strictly increasing"
            )));
        }
        Ok(Self { criterion, levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Index of the last breakpoint, `n_j`.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Position of `value` on the scale; exact match only.
    pub fn position(&self, value: f64) -> Result<usize> {
        self.levels
            .binary_search_by(|probe| probe.partial_cmp(&value).unwrap_or(Ordering::Less))
            .map_err(|_| Error::BreakpointLookup {
                criterion: self.criterion.clone(),
                value,
            })
    }
}

/// One scale per criterion, holding exactly the distinct values of the column.
pub fn build_scales(matrix: &PerformanceMatrix) -> Vec<CriterionScale> {
    matrix
        .criteria()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut levels: Vec<f64> = matrix.column(j).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            CriterionScale {
                criterion: name.clone(),
                levels,
            }
        })
        .collect()
}

/// Breakpoint indices `k(j)` of every alternative, row-major.
pub fn breakpoint_positions(
    matrix: &PerformanceMatrix,
    scales: &[CriterionScale],
) -> Result<Vec<Vec<usize>>> {
    if scales.len() != matrix.n_criteria() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n_criteria(),
            got: scales.len(),
        });
    }
    matrix
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(scales)
                .map(|(&v, scale)| scale.position(v))
                .collect()
        })
        .collect()
}

/// Marginal values `u_j^k` at every breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    values: Vec<Vec<f64>>,
}

impl ValueFunction {
    /// Wraps raw marginal values without checking the model invariants; see
    /// [`ValueFunction::validate`].
    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        Self {
            label: None,
            values,
        }
    }

    pub fn zeros(scales: &[CriterionScale]) -> Self {
        Self::from_values(scales.iter().map(|s| vec![0.0; s.len()]).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn marginal(&self, criterion: usize) -> &[f64] {
        &self.values[criterion]
    }

    pub fn value(&self, criterion: usize, level: usize) -> f64 {
        self.values[criterion][level]
    }

    /// Total number of coordinates `Σ_j (n_j + 1)`.
    pub fn dimension(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    /// Coordinates flattened criterion by criterion.
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn matches_scales(&self, scales: &[CriterionScale]) -> bool {
        self.values.len() == scales.len()
            && self
                .values
                .iter()
                .zip(scales)
                .all(|(v, s)| v.len() == s.len())
    }

    /// Checks monotonicity, zero anchors, unit normalization and the `[0, 1]`
    /// range, all up to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.values.is_empty() || self.values.iter().any(Vec::is_empty) {
            return fail("value function has an empty criterion".into());
        }
        for (j, marg) in self.values.iter().enumerate() {
            if marg[0].abs() > tol {
                return fail(format!("u[{j}][0] = {} is not anchored at 0", marg[0]));
            }
            for (k, w) in marg.windows(2).enumerate() {
                if w[0] > w[1] + tol {
                    return fail(format!("u[{j}] decreases between levels {k} and {}", k + 1));
                }
            }
            if let Some(k) = marg.iter().position(|&u| u < -tol || u > 1.0 + tol) {
                return fail(format!("u[{j}][{k}] = {} lies outside [0, 1]", marg[k]));
            }
        }
        // All-constant scales leave nothing to normalize.
        if self.values.iter().all(|m| m.len() == 1) {
            return Ok(());
        }
        let total: f64 = self.values.iter().map(|m| m[m.len() - 1]).sum();
        if (total - 1.0).abs() > tol {
            return fail(format!("best-level values sum to {total}, not 1"));
        }
        Ok(())
    }

    /// Global utility of a row whose evaluations all sit on breakpoints.
    pub fn evaluate(&self, scales: &[CriterionScale], row: &[f64]) -> Result<f64> {
        evaluate(self, scales, row)
    }
}

/// Σ_j u_j(g_j(a)) for an alternative given by its evaluation row.
pub fn evaluate(u: &ValueFunction, scales: &[CriterionScale], row: &[f64]) -> Result<f64> {
    if !u.matches_scales(scales) {
        return Err(Error::DimensionMismatch {
            expected: scales.iter().map(CriterionScale::len).sum(),
            got: u.dimension(),
        });
    }
    if row.len() != scales.len() {
        return Err(Error::DimensionMismatch {
            expected: scales.len(),
            got: row.len(),
        });
    }
    let mut total = 0.0;
    for (j, (scale, &x)) in scales.iter().zip(row).enumerate() {
        total += u.value(j, scale.position(x)?);
    }
    Ok(total)
}

/// Utilities of every alternative of `matrix`, keyed by id.
pub fn utilities(
    u: &ValueFunction,
    scales: &[CriterionScale],
    matrix: &PerformanceMatrix,
) -> Result<Vec<(String, f64)>> {
    matrix
        .alternatives()
        .iter()
        .zip(matrix.rows())
        .map(|(alt, row)| Ok((alt.id.clone(), evaluate(u, scales, row)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceKind {
    /// a ≻ b
    Strict,
    /// a ≿ b
    Weak,
    /// a ~ b
    Indifference,
}

/// Pairwise statement supplied by the decision maker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceStatement {
    pub kind: PreferenceKind,
    pub a: String,
    pub b: String,
}

impl PreferenceStatement {
    pub fn new(kind: PreferenceKind, a: impl Into<String>, b: impl Into<String>) -> Self {
        Self {
            kind,
            a: a.into(),
            b: b.into(),
        }
    }

    /// Resolves both ids against the matrix, rejecting self-comparisons.
    pub fn resolve(&self, matrix: &PerformanceMatrix) -> Result<(usize, usize)> {
        if self.a == self.b {
            return Err(Error::InvalidInput(format!(
                "preference compares `{}` with itself",
                self.a
            )));
        }
        let find = |id: &str| {
            matrix
                .index_of(id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown alternative `{id}`")))
        };
        Ok((find(&self.a)?, find(&self.b)?))
    }
}

/// Alternatives ordered best first, ties grouped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub groups: Vec<Vec<String>>,
    pub utilities: Vec<(String, f64)>,
}

impl Ranking {
    /// Position (0-based group index) of an alternative.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.iter().any(|x| x == id))
    }

    /// Flattened order, ties kept in input order.
    pub fn order(&self) -> Vec<&str> {
        self.groups.iter().flatten().map(String::as_str).collect()
    }
}

impl std::fmt::Display for Ranking {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.groups.iter().map(|g| g.join(" ~ ")).collect();
        write!(f, "{}", parts.join(" > "))
    }
}

/// Sorts by decreasing utility. A group collects every alternative whose
/// utility is within `tie_tol` of the group's best.
pub fn rank(utilities: &[(String, f64)], tie_tol: f64) -> Ranking {
    let mut order: Vec<usize> = (0..utilities.len()).collect();
    order.sort_by(|&x, &y| utilities[y].1.total_cmp(&utilities[x].1).then(x.cmp(&y)));
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut head = f64::NAN;
    for i in order {
        let (id, u) = &utilities[i];
        match groups.last_mut() {
            Some(group) if head - u <= tie_tol => group.push(id.clone()),
            _ => {
                head = *u;
                groups.push(vec![id.clone()]);
            }
        }
    }
    Ranking {
        groups,
        utilities: utilities.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_g1() -> Vec<f64> {
        vec![0.6940, 0.5157, 0.5943, 0.4370, 0.6102, 0.4694, 0.1793]
    }

    #[test]
    fn scales_from_table2_first_column() {
        let m = PerformanceMatrix::from_rows(table2_g1().into_iter().map(|v| vec![v]).collect())
            .unwrap();
        let scales = build_scales(&m);
        assert_eq!(
            scales[0].levels(),
            &[0.1793, 0.437, 0.4694, 0.5157, 0.5943, 0.6102, 0.694]
        );
        assert_eq!(scales[0].top(), 6);
    }

    #[test]
    fn constant_and_duplicate_columns() {
        let m = PerformanceMatrix::from_rows(vec![vec![0.5, 3.0], vec![0.5, 1.0], vec![0.5, 3.0]])
            .unwrap();
        let scales = build_scales(&m);
        assert_eq!(scales[0].levels(), &[0.5]);
        assert_eq!(scales[0].top(), 0);
        assert_eq!(scales[1].levels(), &[1.0, 3.0]);
    }

    #[test]
    fn matrix_rejects_bad_input() {
        assert!(PerformanceMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(PerformanceMatrix::from_rows(vec![vec![f64::NAN]]).is_err());
        let dup = PerformanceMatrix::new(
            vec![Alternative::new("a"), Alternative::new("a")],
            vec!["g".into()],
            vec![vec![1.0], vec![2.0]],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn evaluate_lookup_error_off_breakpoint() {
        let m = PerformanceMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let scales = build_scales(&m);
        let u = ValueFunction::from_values(vec![vec![0.0, 1.0]]);
        assert_eq!(evaluate(&u, &scales, &[1.0]).unwrap(), 1.0);
        assert!(matches!(
            evaluate(&u, &scales, &[0.5]),
            Err(Error::BreakpointLookup { .. })
        ));
        assert_eq!(
            evaluate(&ValueFunction::zeros(&scales), &scales, &[1.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn validate_catches_each_invariant() {
        let ok = ValueFunction::from_values(vec![vec![0.0, 0.4], vec![0.0, 0.6]]);
        assert!(ok.validate(1e-9).is_ok());
        let decreasing = ValueFunction::from_values(vec![vec![0.0, 0.7, 0.4], vec![0.0, 0.6]]);
        assert!(decreasing.validate(1e-9).is_err());
        let unanchored = ValueFunction::from_values(vec![vec![0.1, 0.4], vec![0.0, 0.6]]);
        assert!(unanchored.validate(1e-9).is_err());
        let unnormalized = ValueFunction::from_values(vec![vec![0.0, 0.4], vec![0.0, 0.5]]);
        assert!(unnormalized.validate(1e-9).is_err());
        assert!(unnormalized.validate(0.2).is_ok());
    }

    #[test]
    fn rank_groups_ties() {
        let all_equal: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|s| (s.to_string(), 0.3))
            .collect();
        assert_eq!(rank(&all_equal, 0.0).groups.len(), 1);

        let near = vec![("a".to_string(), 0.500004), ("b".to_string(), 0.5)];
        let r = rank(&near, 1e-5);
        assert_eq!(r.groups, vec![vec!["a".to_string(), "b".to_string()]]);
        assert_eq!(rank(&near, 1e-9).groups.len(), 2);
    }

    #[test]
    fn rank_orders_by_decreasing_utility() {
        let u = vec![
            ("x".to_string(), 0.1),
            ("y".to_string(), 0.9),
            ("z".to_string(), 0.5),
        ];
        let r = rank(&u, DEFAULT_TIE_TOL);
        assert_eq!(r.order(), vec!["y", "z", "x"]);
        assert_eq!(r.to_string(), "y > z > x");
        assert_eq!(r.position("x"), Some(2));
    }

    #[test]
    fn preference_resolution() {
        let m = PerformanceMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let p = PreferenceStatement::new(PreferenceKind::Strict, "a2", "a1");
        assert_eq!(p.resolve(&m).unwrap(), (1, 0));
        assert!(PreferenceStatement::new(PreferenceKind::Weak, "a1", "a1")
            .resolve(&m)
            .is_err());
        assert!(PreferenceStatement::new(PreferenceKind::Weak, "a1", "zz")
            .resolve(&m)
            .is_err());
    }
}
