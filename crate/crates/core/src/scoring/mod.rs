//! Constraint systems over additive value functions and the programs built
//! on them: the η-maximizing base LP, the all-contribute and all-increasing
//! diagnostics, big-M enumeration of compatible functions, and the DEA
//! best-case utility of each alternative.

mod base;
mod dea;
mod diagnostics;
mod enumerate;

pub use base::{
    build_base_constraints, solve_lp0, BaseSystem, ConstraintCounts, IncompatibilityReason,
    IncompatibilityReport, Lp0Outcome,
};
pub use dea::{dea_efficiency, DeaEntry, DeaResult};
pub use diagnostics::{check_all_contribute, check_all_increasing, DiagnosticKind, DiagnosticResult};
pub use enumerate::{
    build_exclusion, enumerate_compatible, EnumerationOptions, EnumerationState, ExclusionSet,
    StopReason,
};

use crate::model::CriterionScale;
use crate::solver::{LinearProgram, Relation, VarId};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_BIG_M: f64 = 10.0;
pub const DEFAULT_CAP: usize = 100;

/// Counts of the structural rows shared by every program.
pub(crate) struct StructuralRows {
    pub monotonicity: usize,
    pub anchors: usize,
    pub normalization: usize,
}

/// Adds `u_j^k ∈ [0, 1]` for every breakpoint.
pub(crate) fn add_marginal_vars(lp: &mut LinearProgram, scales: &[CriterionScale]) -> Vec<Vec<VarId>> {
    scales
        .iter()
        .map(|s| {
            (0..s.len())
                .map(|k| lp.add_var(format!("u_{}_{}", s.criterion, k), 0.0, 1.0))
                .collect()
        })
        .collect()
}

/// Adds monotonicity, zero anchors and normalization over `vars`.
pub(crate) fn add_structural_rows(lp: &mut LinearProgram, vars: &[Vec<VarId>]) -> StructuralRows {
    let mut monotonicity = 0;
    for u in vars {
        for w in u.windows(2) {
            lp.add_constraint(vec![(w[1], 1.0), (w[0], -1.0)], Relation::Ge, 0.0);
            monotonicity += 1;
        }
    }
    for u in vars {
        lp.add_constraint(vec![(u[0], 1.0)], Relation::Eq, 0.0);
    }
    // With every scale reduced to one level the anchors already pin all
    // values; a unit normalization would then be unsatisfiable.
    let tops: Vec<(VarId, f64)> = vars
        .iter()
        .filter(|u| u.len() > 1)
        .map(|u| (u[u.len() - 1], 1.0))
        .collect();
    let normalization = if tops.is_empty() {
        0
    } else {
        lp.add_constraint(tops, Relation::Eq, 1.0);
        1
    };
    StructuralRows {
        monotonicity,
        anchors: vars.len(),
        normalization,
    }
}

/// `Σ_j u_j[hi_j] − u_j[lo_j]` with cancelling terms removed.
pub(crate) fn difference(vars: &[Vec<VarId>], hi: &[usize], lo: &[usize]) -> Vec<(VarId, f64)> {
    let mut terms = Vec::new();
    for (j, u) in vars.iter().enumerate() {
        if hi[j] != lo[j] {
            terms.push((u[hi[j]], 1.0));
            terms.push((u[lo[j]], -1.0));
        }
    }
    terms
}
