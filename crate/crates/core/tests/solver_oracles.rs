//! Randomized cross-checks of the LP/MILP backend against brute force.
//!
//! The oracles never call the solver: LP optima come from enumerating every
//! vertex of a box-bounded polytope, MILP optima from enumerating every
//! binary assignment and enumerating the vertices of the remaining
//! continuous polytope.

mod support;

use proptest::prelude::*;
use pwi_core::solver::{solve_lp, solve_milp, LinearProgram, Relation, Sense, VarId};
use support::random::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lp_matches_vertex_enumeration(inst in instance(6, 8)) {
        if let Err(e) = check_lp(&inst) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn sense_symmetry(inst in instance(5, 6)) {
        let (max_lp, _) = build(&Instance { maximize: true, ..inst.clone() }, 0);
        let negated = Instance {
            maximize: false,
            objective: inst.objective.iter().map(|c| -c).collect(),
            ..inst
        };
        let (min_lp, _) = build(&negated, 0);
        let a = solve_lp(&max_lp).unwrap();
        let b = solve_lp(&min_lp).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.is_optimal() {
            prop_assert!((a.objective + b.objective).abs() < 1e-9);
        }
    }

    #[test]
    fn solutions_are_deterministic(inst in instance(6, 8)) {
        let (lp, _) = build(&inst, 0);
        let (a, b) = (solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        prop_assert_eq!(a.values, b.values);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn milp_matches_exhaustive_enumeration((inst, nb) in milp_instance()) {
        if let Err(e) = check_milp(&inst, nb) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn strictly_increasing_implies_all_contribute((rows, seed) in small_case()) {
        if let Err(e) = check_inclusion(&rows, seed) {
            prop_assert!(false, "{}", e);
        }
    }
}

#[test]
fn knapsack_brute_force() {
    // max 2y1 + 3y2 + y3 s.t. y1 + y2 + y3 <= 2; brute force gives 5.
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..8 {
        let y: Vec<f64> = (0..3).map(|j| f64::from((mask >> j) & 1)).collect();
        if y.iter().sum::<f64>() <= 2.0 {
            best = best.max(2.0 * y[0] + 3.0 * y[1] + y[2]);
        }
    }
    assert_eq!(best, 5.0);

    let mut lp = LinearProgram::new(Sense::Maximize);
    let y: Vec<VarId> = (0..3).map(|i| lp.add_binary(format!("y{i}"))).collect();
    lp.add_constraint(y.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 2.0);
    lp.set_objective(vec![(y[0], 2.0), (y[1], 3.0), (y[2], 1.0)], Sense::Maximize);
    assert!((solve_milp(&lp).unwrap().objective - best).abs() < 1e-9);
}
