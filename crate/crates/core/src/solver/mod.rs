//! Small dense LP/MILP backend.
//!
//! [`solve_lp`] runs a two-phase bounded simplex. [`solve_milp`] adds
//! depth-first branch-and-bound over binary variables, branching on the most
//! fractional binary and re-optimizing children with the dual simplex from
//! the parent's final tableau.
//!
//! Before branching, [`solve_milp`] tightens the bounds of continuous variables
//! that share rows with binaries by optimizing each of them over the rows that
//! contain no binary at all, then fixes every binary whose other value would
//! violate some row outright. Fixed variables and rows that can no longer bind
//! are removed from the search problem.

mod milp;
mod program;
mod simplex;

pub use milp::{solve_milp, solve_milp_with, MilpOptions};
pub use program::{
    Constraint, LinearProgram, LpSolution, Relation, Sense, Status, VarId, Variable,
};

use crate::error::{Error, Result};
use simplex::{Outcome, StandardForm};

/// Feasibility tolerance guaranteed on returned optimal points.
pub const FEAS_TOL: f64 = 1e-8;

/// Optimal values whose magnitude is below this are treated as zero by the
/// scoring engine.
pub const OPT_TOL: f64 = 1e-7;

pub(crate) fn standard_form(lp: &LinearProgram, lower: Vec<f64>, upper: Vec<f64>) -> StandardForm {
    let sign = match lp.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; lp.n_vars()];
    for &(v, c) in lp.objective() {
        cost[v.0] += sign * c;
    }
    StandardForm {
        cost,
        rows: lp
            .constraints()
            .iter()
            .map(|c| c.terms.iter().map(|&(v, a)| (v.0, a)).collect())
            .collect(),
        relations: lp.constraints().iter().map(|c| c.relation).collect(),
        rhs: lp.constraints().iter().map(|c| c.rhs).collect(),
        lower,
        upper,
    }
}

/// Solves a continuous linear program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    if lp.has_binaries() {
        return Err(Error::InvalidInput(
            "solve_lp does not accept binary variables; use solve_milp".into(),
        ));
    }
    let lower = lp.variables().iter().map(|v| v.lower).collect();
    let upper = lp.variables().iter().map(|v| v.upper).collect();
    let sf = standard_form(lp, lower, upper);
    let (outcome, tab) = simplex::solve(&sf)?;
    Ok(match outcome {
        Outcome::Optimal => {
            let values = tab.structural().to_vec();
            LpSolution {
                status: Status::Optimal,
                objective: lp.objective_value(&values),
                values,
                names: lp.variables().iter().map(|v| v.name.clone()).collect(),
                gap: None,
                nodes: 0,
            }
        }
        Outcome::Infeasible => LpSolution::without_point(Status::Infeasible, lp),
        Outcome::Unbounded => LpSolution::without_point(Status::Unbounded, lp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_maximum() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 3.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.value(x) - 3.0).abs() < 1e-12);
        assert_eq!(s.get("x"), Some(s.value(x)));
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0);
        lp.add_constraint(vec![(x, 1.0)], Relation::Le, 0.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        assert_eq!(solve_lp(&lp).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y s.t. x - y = 2, x + y >= -4, x, y free -> objective -4
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Relation::Eq, 2.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Ge, -4.0);
        lp.set_objective(vec![(x, 1.0), (y, 1.0)], Sense::Minimize);
        let s = solve_lp(&lp).unwrap();
        assert!((s.objective + 4.0).abs() < 1e-9);
        assert!((s.value(x) - s.value(y) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounded_only_variable() {
        // max x with x <= 5 and no lower bound.
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", f64::NEG_INFINITY, 5.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value(x), 5.0);
    }

    #[test]
    fn rejects_binaries_and_bad_programs() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_binary("y");
        assert!(solve_lp(&lp).is_err());
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 1.0, 0.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn lp_format_dump() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("u[g1][0]", 0.0, 1.0);
        let y = lp.add_binary("y");
        let z = lp.add_var("z", f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0), (y, -2.5), (z, 1.0)], Relation::Le, 4.0);
        lp.set_objective(vec![(x, 1.0)], Sense::Maximize);
        let text = lp.to_lp_format();
        assert!(text.starts_with("Maximize\n obj: 1 u_g1__0_\n"));
        assert!(text.contains(" c0: 1 u_g1__0_ - 2.5 y + 1 z <= 4\n"));
        assert!(text.contains(" z free\n"));
        assert!(text.contains("Binaries\n y\n"));
        assert!(text.ends_with("End\n"));
    }
}
