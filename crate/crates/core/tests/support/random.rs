//! Random instances and brute-force oracles shared by the solver property
//! tests and the acceptance run. The oracles never call the solver.

#![allow(dead_code)]

use proptest::prelude::*;
use pwi_core::model::{build_scales, PerformanceMatrix};
use pwi_core::sampler::compute_pwi;
use pwi_core::scoring::{build_base_constraints, check_all_contribute, check_all_increasing, solve_lp0};
use pwi_core::solver::{solve_lp, solve_milp_with, LinearProgram, MilpOptions, Relation, Sense, Status, VarId};

#[derive(Debug, Clone)]
pub struct Row {
    pub coefs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub objective: Vec<f64>,
    pub maximize: bool,
}

pub fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![
        4 => Just(Relation::Le),
        4 => Just(Relation::Ge),
        1 => Just(Relation::Eq),
    ]
}

pub fn row(n: usize) -> impl Strategy<Value = Row> {
    (
        prop::collection::vec(-4i32..=4, n),
        relation(),
        -6i32..=6,
    )
        .prop_map(|(c, relation, rhs)| Row {
            coefs: c.into_iter().map(f64::from).collect(),
            relation,
            rhs: f64::from(rhs),
        })
}

pub fn instance(max_vars: usize, max_rows: usize) -> impl Strategy<Value = Instance> {
    (1..=max_vars, 0..=max_rows).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((-3i32..=0, 1i32..=5), n),
            prop::collection::vec(row(n), m),
            prop::collection::vec(-5i32..=5, n),
            any::<bool>(),
        )
            .prop_map(|(bounds, rows, obj, maximize)| Instance {
                lower: bounds.iter().map(|&(l, _)| f64::from(l)).collect(),
                upper: bounds.iter().map(|&(l, w)| f64::from(l + w)).collect(),
                rows,
                objective: obj.into_iter().map(f64::from).collect(),
                maximize,
            })
    })
}

pub fn build(inst: &Instance, binaries: usize) -> (LinearProgram, Vec<VarId>) {
    let sense = if inst.maximize {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new(sense);
    let mut vars = Vec::new();
    for j in 0..inst.lower.len() {
        if j < binaries {
            vars.push(lp.add_binary(format!("y{j}")));
        } else {
            vars.push(lp.add_var(format!("x{j}"), inst.lower[j], inst.upper[j]));
        }
    }
    for r in &inst.rows {
        let terms = vars.iter().zip(&r.coefs).map(|(&v, &a)| (v, a)).collect();
        lp.add_constraint(terms, r.relation, r.rhs);
    }
    let obj = vars.iter().zip(&inst.objective).map(|(&v, &c)| (v, c)).collect();
    lp.set_objective(obj, sense);
    (lp, vars)
}

/// Solves `a z = b` (n × n) by Gaussian elimination; `None` if singular.
pub fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

pub fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// Best objective over the vertices of `{lower <= x <= upper, rows}`, in the
/// sense of `maximize`, or `None` when the polytope is empty.
pub fn vertex_optimum(
    lower: &[f64],
    upper: &[f64],
    rows: &[Row],
    objective: &[f64],
    maximize: bool,
) -> Option<f64> {
    let n = lower.len();
    let feasible = |x: &[f64]| {
        x.iter()
            .zip(lower.iter().zip(upper))
            .all(|(&v, (&l, &u))| v >= l - 1e-7 && v <= u + 1e-7)
            && rows.iter().all(|r| {
                let lhs: f64 = r.coefs.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.relation {
                    Relation::Le => lhs <= r.rhs + 1e-7,
                    Relation::Ge => lhs >= r.rhs - 1e-7,
                    Relation::Eq => (lhs - r.rhs).abs() <= 1e-7,
                }
            })
    };
    if n == 0 {
        return feasible(&[]).then_some(0.0);
    }
    // Hyperplanes: every row, then x_j = lower_j and x_j = upper_j.
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|r| (r.coefs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lower[j]));
        planes.push((e, upper[j]));
    }
    let mut best: Option<f64> = None;
    combinations(planes.len(), n, &mut |chosen| {
        let a = chosen.iter().map(|&i| planes[i].0.clone()).collect();
        let b = chosen.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = gauss(a, b) {
            if feasible(&x) {
                let v: f64 = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(match best {
                    None => v,
                    Some(cur) if maximize => cur.max(v),
                    Some(cur) => cur.min(v),
                });
            }
        }
    });
    best
}

/// Exhaustive MILP oracle: first `binaries` variables are 0/1.
pub fn milp_oracle(inst: &Instance, binaries: usize) -> Option<f64> {
    let n = inst.lower.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << binaries) {
        let fixed: Vec<f64> = (0..binaries).map(|j| f64::from((mask >> j) & 1)).collect();
        let rows: Vec<Row> = inst
            .rows
            .iter()
            .map(|r| Row {
                coefs: r.coefs[binaries..].to_vec(),
                relation: r.relation,
                rhs: r.rhs - r.coefs[..binaries].iter().zip(&fixed).map(|(a, v)| a * v).sum::<f64>(),
            })
            .collect();
        let base: f64 = inst.objective[..binaries].iter().zip(&fixed).map(|(c, v)| c * v).sum();
        if let Some(v) = vertex_optimum(
            &inst.lower[binaries..n],
            &inst.upper[binaries..n],
            &rows,
            &inst.objective[binaries..],
            inst.maximize,
        ) {
            let total = base + v;
            best = Some(match best {
                None => total,
                Some(cur) if inst.maximize => cur.max(total),
                Some(cur) => cur.min(total),
            });
        }
    }
    best
}

pub fn milp_instance() -> impl Strategy<Value = (Instance, usize)> {
    (1usize..=12, 0usize..=2).prop_flat_map(|(nb, nc)| {
        let n = nb + nc;
        (
            prop::collection::vec((-3i32..=0, 1i32..=4), n),
            prop::collection::vec(row(n), 1..=5),
            prop::collection::vec(-5i32..=5, n),
            any::<bool>(),
        )
            .prop_map(move |(bounds, rows, obj, maximize)| {
                let mut lower: Vec<f64> = bounds.iter().map(|&(l, _)| f64::from(l)).collect();
                let mut upper: Vec<f64> = bounds.iter().map(|&(l, w)| f64::from(l + w)).collect();
                for j in 0..nb {
                    lower[j] = 0.0;
                    upper[j] = 1.0;
                }
                let rows = rows
                    .into_iter()
                    .map(|mut r| {
                        if r.relation == Relation::Eq && nc == 0 {
                            r.relation = Relation::Le;
                        }
                        r
                    })
                    .collect();
                (
                    Instance {
                        lower,
                        upper,
                        rows,
                        objective: obj.into_iter().map(f64::from).collect(),
                        maximize,
                    },
                    nb,
                )
            })
    })
}


/// Solver against vertex enumeration on a continuous instance.
pub fn check_lp(inst: &Instance) -> Result<(), String> {
    let (lp, _) = build(inst, 0);
    let sol = solve_lp(&lp).map_err(|e| e.to_string())?;
    match vertex_optimum(&inst.lower, &inst.upper, &inst.rows, &inst.objective, inst.maximize) {
        None if sol.status == Status::Infeasible => Ok(()),
        None => Err(format!("oracle infeasible, solver {:?}", sol.status)),
        Some(best) => {
            if sol.status != Status::Optimal {
                return Err(format!("oracle {best}, solver {:?}", sol.status));
            }
            if (sol.objective - best).abs() >= 1e-6 {
                return Err(format!("objective {} vs oracle {best}", sol.objective));
            }
            let v = lp.max_violation(&sol.values);
            if v > 1e-8 {
                return Err(format!("violation {v:e}"));
            }
            Ok(())
        }
    }
}

/// Solver against exhaustive binary enumeration, with and without presolve.
pub fn check_milp(inst: &Instance, binaries: usize) -> Result<(), String> {
    let (lp, _) = build(inst, binaries);
    let oracle = milp_oracle(inst, binaries);
    for presolve in [true, false] {
        let opts = MilpOptions { presolve, ..MilpOptions::default() };
        let sol = solve_milp_with(&lp, opts).map_err(|e| e.to_string())?;
        match oracle {
            None if sol.status == Status::Infeasible => {}
            None => return Err(format!("presolve={presolve}: oracle infeasible, solver {:?}", sol.status)),
            Some(best) => {
                if sol.status != Status::Optimal || (sol.objective - best).abs() >= 1e-6 {
                    return Err(format!(
                        "presolve={presolve}: {:?} {} vs oracle {best}",
                        sol.status, sol.objective
                    ));
                }
                let v = lp.max_violation(&sol.values);
                if v > 1e-8 || sol.gap != Some(0.0) {
                    return Err(format!("presolve={presolve}: violation {v:e}, gap {:?}", sol.gap));
                }
            }
        }
    }
    Ok(())
}

/// Evaluations on a coarse grid (so ties occur) plus a sampling seed.
pub fn small_case() -> impl Strategy<Value = (Vec<Vec<f64>>, u64)> {
    (2usize..=5, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..=4, m), n),
            any::<u64>(),
        )
            .prop_map(|(rows, seed)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| f64::from(v) / 4.0).collect())
                    .collect();
                (rows, seed)
            })
    })
}

/// A strictly increasing function gives every criterion at least ε at its
/// top level, so h* ≥ ε*. Returns whether ε* was positive.
pub fn check_inclusion(rows: &[Vec<f64>], seed: u64) -> Result<bool, String> {
    let m = PerformanceMatrix::from_rows(rows.to_vec()).map_err(|e| e.to_string())?;
    let p = compute_pwi(&m, 400, seed).map_err(|e| e.to_string())?;
    let base = build_base_constraints(&m, &build_scales(&m), &p, &[]).map_err(|e| e.to_string())?;
    let out = solve_lp0(&base).map_err(|e| e.to_string())?;
    let Some(eta) = out.eta() else { return Ok(false) };
    let h = check_all_contribute(&base, eta).map_err(|e| e.to_string())?;
    let eps = check_all_increasing(&base, eta).map_err(|e| e.to_string())?;
    let (Some(h), Some(e)) = (h.value, eps.value) else {
        return Err(format!("auxiliary program infeasible at η = {eta}"));
    };
    if e > 1e-7 && !(h > 1e-7) {
        return Err(format!("ε* = {e} but h* = {h}"));
    }
    if h < e - 1e-7 {
        return Err(format!("h* = {h} < ε* = {e}"));
    }
    Ok(e > 1e-7)
}
