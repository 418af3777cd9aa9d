use serde::{Deserialize, Serialize};

use super::BaseSystem;
use crate::error::{Error, Result};
use crate::model::ValueFunction;
use crate::solver::{solve_lp, Relation, Sense, Status, OPT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    /// Every criterion has a positive best-level value.
    AllContr,
    /// Every marginal function is strictly increasing.
    AllInc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticResult {
    pub kind: DiagnosticKind,
    pub feasible: bool,
    /// h* or ε*.
    pub value: Option<f64>,
    /// A function attaining `value`, kept only when `value` is positive.
    pub witness: Option<ValueFunction>,
}

impl DiagnosticResult {
    /// Whether the corresponding subset of compatible functions is nonempty.
    pub fn nonempty(&self) -> bool {
        self.witness.is_some()
    }
}

/// Maximizes `h` subject to the base system at `η = eta` and
/// `u_j^{n_j} ≥ h` for every criterion with at least two levels.
///
/// A constant criterion has its only level anchored at 0 and cannot
/// discriminate, so it gets no floor (it is vacuously increasing too). `h` is
/// capped at 1, which binds only when every criterion is constant.
pub fn check_all_contribute(base: &BaseSystem, eta: f64) -> Result<DiagnosticResult> {
    let mut lp = base.with_fixed_eta(eta)?;
    let h = lp.add_var("h", f64::NEG_INFINITY, 1.0);
    for u in base.u_vars().iter().filter(|u| u.len() > 1) {
        lp.add_constraint(vec![(u[u.len() - 1], 1.0), (h, -1.0)], Relation::Ge, 0.0);
    }
    lp.set_objective(vec![(h, 1.0)], Sense::Maximize);
    finish(base, DiagnosticKind::AllContr, &solve_lp(&lp)?, h)
}

/// Maximizes `ε` subject to the base system at `η = eta` and
/// `u_j^k + ε ≤ u_j^{k+1}` for every consecutive pair of breakpoints.
///
/// `ε` is capped at 1, which only binds when no criterion has two levels.
pub fn check_all_increasing(base: &BaseSystem, eta: f64) -> Result<DiagnosticResult> {
    let mut lp = base.with_fixed_eta(eta)?;
    let eps = lp.add_var("eps", f64::NEG_INFINITY, 1.0);
    for u in base.u_vars() {
        for w in u.windows(2) {
            lp.add_constraint(vec![(w[1], 1.0), (w[0], -1.0), (eps, -1.0)], Relation::Ge, 0.0);
        }
    }
    lp.set_objective(vec![(eps, 1.0)], Sense::Maximize);
    finish(base, DiagnosticKind::AllInc, &solve_lp(&lp)?, eps)
}

fn finish(
    base: &BaseSystem,
    kind: DiagnosticKind,
    sol: &crate::solver::LpSolution,
    aux: crate::solver::VarId,
) -> Result<DiagnosticResult> {
    match sol.status {
        Status::Infeasible => Ok(DiagnosticResult {
            kind,
            feasible: false,
            value: None,
            witness: None,
        }),
        Status::Unbounded => Err(Error::Solver(format!("{kind:?} program is unbounded"))),
        Status::Optimal => {
            let value = sol.value(aux);
            Ok(DiagnosticResult {
                kind,
                feasible: true,
                value: Some(value),
                witness: (value > OPT_TOL).then(|| base.function_from(&sol.values)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_scales, PerformanceMatrix};
    use crate::sampler::PwiMatrix;
    use crate::scoring::{build_base_constraints, solve_lp0};

    fn system(rows: Vec<Vec<f64>>, p: Vec<Vec<f64>>) -> BaseSystem {
        let m = PerformanceMatrix::from_rows(rows).unwrap();
        let ids = m.alternative_ids();
        let pwi = PwiMatrix::from_fractions(ids, p).unwrap();
        build_base_constraints(&m, &build_scales(&m), &pwi, &[]).unwrap()
    }

    #[test]
    fn single_criterion_contributes_fully() {
        let base = system(
            vec![vec![0.1], vec![0.6], vec![0.9]],
            vec![vec![0.0, 0.3, 0.2], vec![0.7, 0.0, 0.4], vec![0.8, 0.6, 0.0]],
        );
        let eta = solve_lp0(&base).unwrap().eta().unwrap();
        let d = check_all_contribute(&base, eta).unwrap();
        assert!(d.feasible);
        assert!((d.value.unwrap() - 1.0).abs() < 1e-9);
        assert!(d.nonempty());
    }

    #[test]
    fn one_criterion_two_levels_has_unit_slope() {
        let base = system(vec![vec![0.0], vec![1.0]], vec![vec![0.0, 0.4], vec![0.6, 0.0]]);
        let eta = solve_lp0(&base).unwrap().eta().unwrap();
        let d = check_all_increasing(&base, eta).unwrap();
        assert!((d.value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_two_criteria_toy_shares_contribution() {
        // a1 beats a2 on g1, loses on g2. U(a1) - U(a2) = u1 - u2 >= 0.1 η
        // with u1 + u2 = 1 and η maximal forces u1 = 1, so h* = 0 at η*.
        // At a smaller η the floor can lift both: at η = 5, u1 - u2 >= 0.5
        // gives h* = 0.25.
        let base = system(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 0.6], vec![0.4, 0.0]],
        );
        let eta = solve_lp0(&base).unwrap().eta().unwrap();
        assert!((eta - 10.0).abs() < 1e-9);
        let at_opt = check_all_contribute(&base, eta).unwrap();
        assert!(at_opt.value.unwrap().abs() < 1e-9);
        assert!(!at_opt.nonempty());
        let relaxed = check_all_contribute(&base, 5.0).unwrap();
        assert!((relaxed.value.unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn both_criteria_better_gives_positive_floor() {
        // a1 dominates a2 on both criteria; at η* both must contribute.
        let base = system(
            vec![vec![1.0, 1.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.6], vec![0.4, 0.0]],
        );
        let eta = solve_lp0(&base).unwrap().eta().unwrap();
        assert!((eta - 10.0).abs() < 1e-9);
        let d = check_all_contribute(&base, eta).unwrap();
        assert!((d.value.unwrap() - 0.5).abs() < 1e-9);
        d.witness.unwrap().validate(1e-9).unwrap();
    }

    #[test]
    fn infinite_eta_only_for_vacuous_systems() {
        let base = system(vec![vec![0.0], vec![1.0]], vec![vec![0.0, 0.4], vec![0.6, 0.0]]);
        assert!(check_all_contribute(&base, f64::INFINITY).is_err());
        let flat = system(vec![vec![0.0], vec![1.0]], vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert!(check_all_contribute(&flat, f64::INFINITY).unwrap().feasible);
    }

    #[test]
    fn constant_criterion_gets_no_floor() {
        // g2 never varies; g1 carries everything and both programs reach 1.
        let base = system(
            vec![vec![0.0, 0.5], vec![1.0, 0.5]],
            vec![vec![0.0, 0.4], vec![0.6, 0.0]],
        );
        let eta = solve_lp0(&base).unwrap().eta().unwrap();
        let h = check_all_contribute(&base, eta).unwrap();
        let e = check_all_increasing(&base, eta).unwrap();
        assert!((h.value.unwrap() - 1.0).abs() < 1e-9);
        assert!((e.value.unwrap() - 1.0).abs() < 1e-9);
    }
}
