use std::fmt;

use serde::{Deserialize, Serialize};

use super::{add_marginal_vars, add_structural_rows, difference};
use crate::error::{Error, Result};
use crate::model::{
    breakpoint_positions, CriterionScale, PerformanceMatrix, PreferenceKind, PreferenceStatement,
    ValueFunction,
};
use crate::sampler::PwiMatrix;
use crate::solver::{solve_lp, LinearProgram, Relation, Sense, Status, VarId, OPT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCounts {
    pub pwi: usize,
    pub preferences: usize,
    pub monotonicity: usize,
    pub anchors: usize,
    pub normalization: usize,
}

impl ConstraintCounts {
    pub fn total(&self) -> usize {
        self.pwi + self.preferences + self.monotonicity + self.anchors + self.normalization
    }
}

/// The base constraint system over `u_j^k` and `η`.
///
/// Rows are stored in a fixed order: winning-index rows (ordered pairs in
/// row-major order), preference statements, monotonicity, anchors,
/// normalization.
#[derive(Debug, Clone)]
pub struct BaseSystem {
    lp: LinearProgram,
    u: Vec<Vec<VarId>>,
    eta: VarId,
    scales: Vec<CriterionScale>,
    alternatives: Vec<String>,
    positions: Vec<Vec<usize>>,
    pwi: PwiMatrix,
    preferences: Vec<PreferenceStatement>,
    counts: ConstraintCounts,
    /// Number of rows in which η appears.
    eta_rows: usize,
}

/// Builds the base system for `matrix` on `scales`.
///
/// A winning-index row `U(a) − U(b) ≥ η (p(a,b) − 0.5)` is generated for
/// each ordered pair with `p(a,b) > 0.5`, compared exactly.
pub fn build_base_constraints(
    matrix: &PerformanceMatrix,
    scales: &[CriterionScale],
    pwi: &PwiMatrix,
    preferences: &[PreferenceStatement],
) -> Result<BaseSystem> {
    let n = matrix.n_alternatives();
    if pwi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pwi.len(),
        });
    }
    let ids = matrix.alternative_ids();
    if pwi.alternatives() != ids.as_slice() {
        return Err(Error::InvalidInput(
            "winning-index alternatives differ from the performance matrix".into(),
        ));
    }
    let positions = breakpoint_positions(matrix, scales)?;
    let resolved = preferences
        .iter()
        .map(|p| p.resolve(matrix))
        .collect::<Result<Vec<_>>>()?;

    let mut lp = LinearProgram::new(Sense::Maximize);
    let eta = lp.add_var("eta", 0.0, f64::INFINITY);

    let u = add_marginal_vars(&mut lp, scales);
    let mut eta_rows = 0;
    for a in 0..n {
        for b in 0..n {
            let p = pwi.get(a, b);
            if a != b && p > 0.5 {
                let mut terms = difference(&u, &positions[a], &positions[b]);
                terms.push((eta, -(p - 0.5)));
                lp.add_constraint(terms, Relation::Ge, 0.0);
                eta_rows += 1;
            }
        }
    }
    let n_pwi = eta_rows;
    for (stmt, &(a, b)) in preferences.iter().zip(&resolved) {
        let mut terms = difference(&u, &positions[a], &positions[b]);
        let relation = match stmt.kind {
            PreferenceKind::Strict => {
                terms.push((eta, -1.0));
                eta_rows += 1;
                Relation::Ge
            }
            PreferenceKind::Weak => Relation::Ge,
            PreferenceKind::Indifference => Relation::Eq,
        };
        lp.add_constraint(terms, relation, 0.0);
    }
    let marginals = add_structural_rows(&mut lp, &u);

    Ok(BaseSystem {
        lp,
        u,
        eta,
        scales: scales.to_vec(),
        alternatives: ids,
        positions,
        pwi: pwi.clone(),
        preferences: preferences.to_vec(),
        counts: ConstraintCounts {
            pwi: n_pwi,
            preferences: preferences.len(),
            monotonicity: marginals.monotonicity,
            anchors: marginals.anchors,
            normalization: marginals.normalization,
        },
        eta_rows,
    })
}

impl BaseSystem {
    /// The system with no objective set; η bounded below by 0.
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn counts(&self) -> ConstraintCounts {
        self.counts
    }

    pub fn scales(&self) -> &[CriterionScale] {
        &self.scales
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn pwi(&self) -> &PwiMatrix {
        &self.pwi
    }

    pub fn preferences(&self) -> &[PreferenceStatement] {
        &self.preferences
    }

    pub fn u_vars(&self) -> &[Vec<VarId>] {
        &self.u
    }

    pub fn eta_var(&self) -> VarId {
        self.eta
    }

    /// True when no row involves η, so η can grow without bound.
    pub fn is_vacuous(&self) -> bool {
        self.eta_rows == 0
    }

    /// Copy of the system with η pinned to `eta`. An infinite `eta` is only
    /// accepted for a vacuous system, where η appears in no row.
    pub fn with_fixed_eta(&self, eta: f64) -> Result<LinearProgram> {
        let mut lp = self.lp.clone();
        if eta.is_finite() {
            if eta < 0.0 {
                return Err(Error::Config(format!("η must be non-negative, got {eta}")));
            }
            lp.set_bounds(self.eta, eta, eta);
        } else if self.is_vacuous() && eta == f64::INFINITY {
            lp.set_bounds(self.eta, 0.0, 0.0);
        } else {
            return Err(Error::Config(format!("cannot fix η at {eta}")));
        }
        Ok(lp)
    }

    /// Reads `u_j^k` out of a solution vector of a program extending this
    /// system.
    pub fn function_from(&self, values: &[f64]) -> ValueFunction {
        ValueFunction::from_values(
            self.u
                .iter()
                .map(|u| u.iter().map(|v| values[v.0]).collect())
                .collect(),
        )
    }

    /// Full variable vector for `u` and `eta`.
    pub fn point(&self, u: &ValueFunction, eta: f64) -> Result<Vec<f64>> {
        if !u.matches_scales(&self.scales) {
            return Err(Error::DimensionMismatch {
                expected: self.u.iter().map(Vec::len).sum(),
                got: u.dimension(),
            });
        }
        let mut x = vec![0.0; self.lp.n_vars()];
        x[self.eta.0] = eta;
        for (vars, vals) in self.u.iter().zip(u.marginals()) {
            for (v, &val) in vars.iter().zip(vals) {
                x[v.0] = val;
            }
        }
        Ok(x)
    }

    /// Largest violation of any row or bound by `(u, eta)`.
    pub fn violation(&self, u: &ValueFunction, eta: f64) -> Result<f64> {
        Ok(self.lp.max_violation(&self.point(u, eta)?))
    }

    /// Utilities of the alternatives under `u`.
    pub fn utilities(&self, u: &ValueFunction) -> Result<Vec<(String, f64)>> {
        if !u.matches_scales(&self.scales) {
            return Err(Error::DimensionMismatch {
                expected: self.u.iter().map(Vec::len).sum(),
                got: u.dimension(),
            });
        }
        Ok(self
            .alternatives
            .iter()
            .zip(&self.positions)
            .map(|(id, pos)| {
                let total = pos.iter().enumerate().map(|(j, &k)| u.value(j, k)).sum();
                (id.clone(), total)
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncompatibilityReason {
    Infeasible,
    NonPositiveEta,
}

/// Why no compatible function exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompatibilityReport {
    pub reason: IncompatibilityReason,
    /// Optimal η when the system was feasible.
    pub eta: Option<f64>,
    pub pwi_constraints: usize,
    pub preference_constraints: usize,
    /// Winning-index and preference rows active at the optimum.
    pub binding_statements: Option<usize>,
}

impl fmt::Display for IncompatibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason {
            IncompatibilityReason::Infeasible => write!(
                f,
                "constraint system is infeasible ({} winning-index and {} preference statements)",
                self.pwi_constraints, self.preference_constraints
            ),
            IncompatibilityReason::NonPositiveEta => write!(
                f,
                "optimal η = {} is not positive; {} of {} statements binding",
                self.eta.unwrap_or(f64::NAN),
                self.binding_statements.unwrap_or(0),
                self.pwi_constraints + self.preference_constraints
            ),
        }
    }
}

/// Outcome of maximizing η over the base system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Lp0Outcome {
    Compatible { eta: f64, function: ValueFunction },
    /// No row involves η. Any feasible function is compatible and η* is
    /// reported as `+∞`.
    Vacuous { function: ValueFunction },
    Incompatible(IncompatibilityReport),
}

impl Lp0Outcome {
    /// η*, with `+∞` for a vacuous system.
    pub fn eta(&self) -> Option<f64> {
        match self {
            Lp0Outcome::Compatible { eta, .. } => Some(*eta),
            Lp0Outcome::Vacuous { .. } => Some(f64::INFINITY),
            Lp0Outcome::Incompatible(_) => None,
        }
    }

    pub fn function(&self) -> Option<&ValueFunction> {
        match self {
            Lp0Outcome::Compatible { function, .. } | Lp0Outcome::Vacuous { function } => {
                Some(function)
            }
            Lp0Outcome::Incompatible(_) => None,
        }
    }

    pub fn is_compatible(&self) -> bool {
        !matches!(self, Lp0Outcome::Incompatible(_))
    }
}

/// Maximizes η over the base system.
pub fn solve_lp0(base: &BaseSystem) -> Result<Lp0Outcome> {
    let counts = base.counts();
    let report = |reason, eta, binding| IncompatibilityReport {
        reason,
        eta,
        pwi_constraints: counts.pwi,
        preference_constraints: counts.preferences,
        binding_statements: binding,
    };
    let mut lp = if base.is_vacuous() {
        base.with_fixed_eta(f64::INFINITY)?
    } else {
        base.lp().clone()
    };
    lp.set_objective(vec![(base.eta, 1.0)], Sense::Maximize);
    let sol = solve_lp(&lp)?;
    match sol.status {
        Status::Infeasible => {
            return Ok(Lp0Outcome::Incompatible(report(
                IncompatibilityReason::Infeasible,
                None,
                None,
            )))
        }
        Status::Unbounded => {
            return Err(Error::Solver("η is unbounded on a non-vacuous system".into()))
        }
        Status::Optimal => {}
    }
    let function = base.function_from(&sol.values);
    if base.is_vacuous() {
        return Ok(Lp0Outcome::Vacuous { function });
    }
    let eta = sol.value(base.eta);
    if eta <= OPT_TOL {
        let statements = counts.pwi + counts.preferences;
        let binding = lp.constraints()[..statements]
            .iter()
            .filter(|c| (c.activity(&sol.values) - c.rhs).abs() <= OPT_TOL)
            .count();
        return Ok(Lp0Outcome::Incompatible(report(
            IncompatibilityReason::NonPositiveEta,
            Some(eta),
            Some(binding),
        )));
    }
    Ok(Lp0Outcome::Compatible { eta, function })
}
