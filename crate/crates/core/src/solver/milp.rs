use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::program::{LinearProgram, LpSolution, Relation, Status};
use super::simplex::{self, Outcome, StandardForm, Tableau};
use super::standard_form;
use crate::error::{Error, Result};

const INT_TOL: f64 = 1e-9;
const BOUND_MARGIN: f64 = 1e-7;
const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilpOptions {
    /// Branch-and-bound nodes allowed before giving up.
    pub node_limit: usize,
    /// Bound tightening, binary fixing and row removal before branching.
    pub presolve: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            presolve: true,
        }
    }
}

/// Exact branch-and-bound with default options.
pub fn solve_milp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_milp_with(lp, MilpOptions::default())
}

pub fn solve_milp_with(lp: &LinearProgram, options: MilpOptions) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.n_vars();
    let binary: Vec<bool> = lp.variables().iter().map(|v| v.binary).collect();
    let mut lower: Vec<f64> = lp.variables().iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = lp.variables().iter().map(|v| v.upper).collect();
    for j in (0..n).filter(|&j| binary[j]) {
        lower[j] = lower[j].max(0.0).ceil();
        upper[j] = upper[j].min(1.0).floor();
        if lower[j] > upper[j] {
            return Ok(LpSolution::without_point(Status::Infeasible, lp));
        }
    }
    let mut full = standard_form(lp, lower, upper);

    let mut bounds = (full.lower.clone(), full.upper.clone());
    if options.presolve {
        if !tighten_continuous(&full, &binary, &mut bounds)?
            || !fix_binaries(&full, &binary, &mut bounds)
        {
            return Ok(LpSolution::without_point(Status::Infeasible, lp));
        }
        strengthen_coefficients(&mut full, &binary, &bounds);
    }
    let Some(reduced) = Reduced::build(&full, &binary, &bounds.0, &bounds.1) else {
        return Ok(LpSolution::without_point(Status::Infeasible, lp));
    };

    let search = branch_and_bound(&reduced, options.node_limit)?;
    let (incumbent, nodes) = match search {
        Search::Infeasible => return Ok(LpSolution::without_point(Status::Infeasible, lp)),
        Search::Unbounded => return Ok(LpSolution::without_point(Status::Unbounded, lp)),
        Search::Found { values, nodes } => (values, nodes),
    };

    // Re-solve the continuous part with binaries pinned to exact 0/1.
    let mut polished = reduced.sf.clone();
    for (k, &is_bin) in reduced.binary.iter().enumerate() {
        if is_bin {
            let v = incumbent[k].round();
            polished.lower[k] = v;
            polished.upper[k] = v;
        }
    }
    let local = match simplex::solve(&polished)? {
        (Outcome::Optimal, tab) => tab.structural().to_vec(),
        _ => {
            let mut v = incumbent.clone();
            for (k, &is_bin) in reduced.binary.iter().enumerate() {
                if is_bin {
                    v[k] = v[k].round();
                }
            }
            v
        }
    };
    let values = reduced.expand(&local);
    Ok(LpSolution {
        status: Status::Optimal,
        objective: lp.objective_value(&values),
        values,
        names: lp.variables().iter().map(|v| v.name.clone()).collect(),
        gap: Some(0.0),
        nodes,
    })
}

/// Optimizes every continuous variable that shares a row with a binary over
/// the binary-free rows. Returns `false` when those rows are infeasible.
fn tighten_continuous(
    sf: &StandardForm,
    binary: &[bool],
    bounds: &mut (Vec<f64>, Vec<f64>),
) -> Result<bool> {
    let n = binary.len();
    let mut target = vec![false; n];
    let mut keep = Vec::new();
    for (i, row) in sf.rows.iter().enumerate() {
        if row.iter().any(|&(j, _)| binary[j]) {
            for &(j, _) in row {
                if !binary[j] {
                    target[j] = true;
                }
            }
        } else {
            keep.push(i);
        }
    }
    if !target.iter().any(|&t| t) {
        return Ok(true);
    }
    let relaxed = StandardForm {
        cost: vec![0.0; n],
        rows: keep.iter().map(|&i| sf.rows[i].clone()).collect(),
        relations: keep.iter().map(|&i| sf.relations[i]).collect(),
        rhs: keep.iter().map(|&i| sf.rhs[i]).collect(),
        lower: bounds.0.clone(),
        upper: bounds.1.clone(),
    };
    let mut tab = Tableau::new(&relaxed);
    if !tab.phase_one()? {
        return Ok(false);
    }
    let mut cost = vec![0.0; n];
    for j in (0..n).filter(|&j| target[j]) {
        for (sign, is_min) in [(1.0, true), (-1.0, false)] {
            cost[j] = sign;
            tab.set_cost(&cost);
            if tab.primal()? == Outcome::Optimal {
                let v = tab.value(j);
                if is_min {
                    bounds.0[j] = bounds.0[j].max(v - BOUND_MARGIN);
                } else {
                    bounds.1[j] = bounds.1[j].min(v + BOUND_MARGIN);
                }
            }
        }
        cost[j] = 0.0;
        if bounds.0[j] > bounds.1[j] {
            let mid = 0.5 * (bounds.0[j] + bounds.1[j]);
            bounds.0[j] = mid;
            bounds.1[j] = mid;
        }
    }
    Ok(true)
}

/// Activity range of `row` with one variable left out.
struct Activity {
    min_finite: f64,
    min_inf: usize,
    max_finite: f64,
    max_inf: usize,
}

impl Activity {
    fn of(row: &[(usize, f64)], lower: &[f64], upper: &[f64]) -> Self {
        let mut act = Activity {
            min_finite: 0.0,
            min_inf: 0,
            max_finite: 0.0,
            max_inf: 0,
        };
        for &(j, a) in row {
            let (lo, hi) = term_range(a, lower[j], upper[j]);
            if lo.is_finite() {
                act.min_finite += lo;
            } else {
                act.min_inf += 1;
            }
            if hi.is_finite() {
                act.max_finite += hi;
            } else {
                act.max_inf += 1;
            }
        }
        act
    }

    fn min_without(&self, lo: f64) -> f64 {
        if lo.is_finite() {
            if self.min_inf == 0 {
                self.min_finite - lo
            } else {
                f64::NEG_INFINITY
            }
        } else if self.min_inf == 1 {
            self.min_finite
        } else {
            f64::NEG_INFINITY
        }
    }

    fn max_without(&self, hi: f64) -> f64 {
        if hi.is_finite() {
            if self.max_inf == 0 {
                self.max_finite - hi
            } else {
                f64::INFINITY
            }
        } else if self.max_inf == 1 {
            self.max_finite
        } else {
            f64::INFINITY
        }
    }

    fn min(&self) -> f64 {
        if self.min_inf == 0 {
            self.min_finite
        } else {
            f64::NEG_INFINITY
        }
    }

    fn max(&self) -> f64 {
        if self.max_inf == 0 {
            self.max_finite
        } else {
            f64::INFINITY
        }
    }
}

fn term_range(a: f64, l: f64, u: f64) -> (f64, f64) {
    let p = if a == 0.0 { 0.0 } else { a * l };
    let q = if a == 0.0 { 0.0 } else { a * u };
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

/// Fixes binaries whose other value would violate a row. Returns `false` on
/// a row that no assignment can satisfy.
fn fix_binaries(sf: &StandardForm, binary: &[bool], bounds: &mut (Vec<f64>, Vec<f64>)) -> bool {
    for _pass in 0..50 {
        let mut changed = false;
        for (i, row) in sf.rows.iter().enumerate() {
            let (lower, upper) = (&bounds.0, &bounds.1);
            let act = Activity::of(row, lower, upper);
            let rel = sf.relations[i];
            let rhs = sf.rhs[i];
            let le = matches!(rel, Relation::Le | Relation::Eq);
            let ge = matches!(rel, Relation::Ge | Relation::Eq);
            if (le && act.min() > rhs + ROW_TOL) || (ge && act.max() < rhs - ROW_TOL) {
                return false;
            }
            let mut fixes = Vec::new();
            for &(j, a) in row {
                if !binary[j] || lower[j] == upper[j] || a == 0.0 {
                    continue;
                }
                let (lo, hi) = term_range(a, lower[j], upper[j]);
                let rest_min = act.min_without(lo);
                let rest_max = act.max_without(hi);
                let allowed = |v: f64| {
                    let t = a * v;
                    !(le && rest_min + t > rhs + ROW_TOL) && !(ge && rest_max + t < rhs - ROW_TOL)
                };
                match (allowed(0.0), allowed(1.0)) {
                    (true, true) => {}
                    (true, false) => fixes.push((j, 0.0)),
                    (false, true) => fixes.push((j, 1.0)),
                    (false, false) => return false,
                }
            }
            for (j, v) in fixes {
                bounds.0[j] = v;
                bounds.1[j] = v;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// Shrinks the coefficient of a lone free binary in an inequality row to
/// the smallest value that still makes the row redundant when the binary is
/// switched on. Integer solutions are unaffected; the relaxation tightens.
fn strengthen_coefficients(sf: &mut StandardForm, binary: &[bool], bounds: &(Vec<f64>, Vec<f64>)) {
    let (lower, upper) = (&bounds.0, &bounds.1);
    for i in 0..sf.rows.len() {
        let sign = match sf.relations[i] {
            Relation::Ge => 1.0,
            Relation::Le => -1.0,
            Relation::Eq => continue,
        };
        let row = &sf.rows[i];
        let mut free_bins = row
            .iter()
            .enumerate()
            .filter(|&(_, &(j, a))| binary[j] && lower[j] != upper[j] && a != 0.0);
        let (Some((pos, &(j, a))), None) = (free_bins.next(), free_bins.next()) else {
            continue;
        };
        debug_assert!(lower[j] == 0.0 && upper[j] == 1.0);
        // In `≥` form: rest + a y ≥ b.
        let (a, b) = (sign * a, sign * sf.rhs[i]);
        if a <= 0.0 {
            continue;
        }
        let rest_min: f64 = row
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != pos)
            .map(|(_, &(k, c))| term_range(sign * c, lower[k], upper[k]).0)
            .sum();
        if !rest_min.is_finite() || rest_min >= b {
            continue;
        }
        let tight = b - rest_min;
        if tight < a - ROW_TOL {
            sf.rows[i][pos].1 = sign * tight;
        }
    }
}

/// Search problem over the variables left free by presolve.
struct Reduced {
    sf: StandardForm,
    binary: Vec<bool>,
    /// Original index of each reduced variable.
    columns: Vec<usize>,
    /// Value of every original variable that was removed.
    fixed: Vec<Option<f64>>,
    integral_objective: bool,
}

impl Reduced {
    fn build(sf: &StandardForm, binary: &[bool], lower: &[f64], upper: &[f64]) -> Option<Self> {
        let n = binary.len();
        let fixed: Vec<Option<f64>> = (0..n)
            .map(|j| (lower[j] == upper[j]).then_some(lower[j]))
            .collect();
        let mut index = vec![usize::MAX; n];
        let columns: Vec<usize> = (0..n).filter(|&j| fixed[j].is_none()).collect();
        for (k, &j) in columns.iter().enumerate() {
            index[j] = k;
        }
        let mut rows = Vec::new();
        let mut relations = Vec::new();
        let mut rhs = Vec::new();
        for (i, row) in sf.rows.iter().enumerate() {
            let mut b = sf.rhs[i];
            let mut terms = Vec::new();
            for &(j, a) in row {
                match fixed[j] {
                    Some(v) => b -= a * v,
                    None => terms.push((index[j], a)),
                }
            }
            let rel = sf.relations[i];
            if terms.is_empty() {
                let bad = match rel {
                    Relation::Le => 0.0 > b + ROW_TOL,
                    Relation::Ge => 0.0 < b - ROW_TOL,
                    Relation::Eq => b.abs() > ROW_TOL,
                };
                if bad {
                    return None;
                }
                continue;
            }
            let act = Activity::of(row, lower, upper);
            let redundant = match rel {
                Relation::Le => act.max() <= sf.rhs[i],
                Relation::Ge => act.min() >= sf.rhs[i],
                Relation::Eq => false,
            };
            if redundant {
                continue;
            }
            rows.push(terms);
            relations.push(rel);
            rhs.push(b);
        }
        let integral_objective = (0..n).all(|j| {
            let c = sf.cost[j];
            c == 0.0 || (binary[j] && c.fract() == 0.0)
        });
        Some(Self {
            sf: StandardForm {
                cost: columns.iter().map(|&j| sf.cost[j]).collect(),
                rows,
                relations,
                rhs,
                lower: columns.iter().map(|&j| lower[j]).collect(),
                upper: columns.iter().map(|&j| upper[j]).collect(),
            },
            binary: columns.iter().map(|&j| binary[j]).collect(),
            columns,
            fixed,
            integral_objective,
        })
    }

    fn expand(&self, local: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (k, &j) in self.columns.iter().enumerate() {
            out[j] = local[k];
        }
        out
    }
}

enum Search {
    Infeasible,
    Unbounded,
    Found { values: Vec<f64>, nodes: usize },
}

struct Node {
    parent: Arc<Tableau>,
    var: usize,
    value: f64,
}

fn branch_and_bound(problem: &Reduced, node_limit: usize) -> Result<Search> {
    let (outcome, root) = simplex::solve(&problem.sf)?;
    match outcome {
        Outcome::Infeasible => return Ok(Search::Infeasible),
        Outcome::Unbounded => return Ok(Search::Unbounded),
        Outcome::Optimal => {}
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut stack: Vec<Node> = Vec::new();
    let mut pending = Some(root);

    loop {
        let tab = match pending.take() {
            Some(tab) => tab,
            None => {
                let Some(node) = stack.pop() else { break };
                // The second child to be explored takes the parent over.
                let mut tab = Arc::try_unwrap(node.parent).unwrap_or_else(|p| (*p).clone());
                tab.fix(node.var, node.value);
                if !tab.dual()? {
                    continue;
                }
                if tab.primal()? != Outcome::Optimal {
                    continue;
                }
                tab
            }
        };
        nodes += 1;
        if nodes > node_limit {
            return Err(Error::Solver(format!(
                "branch-and-bound node limit {node_limit} exceeded"
            )));
        }

        let bound = tab.objective();
        if let Some((incumbent, _)) = &best {
            let prune = if problem.integral_objective {
                bound > incumbent - 1.0 + 1e-6
            } else {
                bound >= incumbent - 1e-9 * incumbent.abs().max(1.0)
            };
            if prune {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        let mut most = INT_TOL;
        for (k, &is_bin) in problem.binary.iter().enumerate() {
            if !is_bin {
                continue;
            }
            let v = tab.value(k);
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > most {
                most = frac;
                branch = Some((k, v));
            }
        }
        match branch {
            None => {
                let improves = best.as_ref().is_none_or(|(inc, _)| bound < inc - 1e-9);
                if improves {
                    best = Some((bound, tab.structural().to_vec()));
                }
            }
            Some((k, v)) => {
                let near = if v >= 0.5 { 1.0 } else { 0.0 };
                let parent = Arc::new(tab);
                stack.push(Node {
                    parent: Arc::clone(&parent),
                    var: k,
                    value: 1.0 - near,
                });
                stack.push(Node {
                    parent,
                    var: k,
                    value: near,
                });
            }
        }
    }

    Ok(match best {
        Some((_, values)) => Search::Found { values, nodes },
        None => Search::Infeasible,
    })
}
