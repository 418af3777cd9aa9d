use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Handle to a variable of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Sparse linear constraint `Σ coef · var (rel) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Linear or mixed-binary program over bounded variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    sense: Sense,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            binary: false,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            binary: true,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(&mut self, terms: Vec<(VarId, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>, sense: Sense) {
        self.objective = terms;
        self.sense = sense;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.variables[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn has_binaries(&self) -> bool {
        self.variables.iter().any(|v| v.binary)
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Structural checks: finite coefficients, consistent bounds, valid ids.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::InvalidInput(format!(
                    "variable `{}` has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!(
                    "variable `{}` has an empty domain",
                    v.name
                )));
            }
            if v.binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::InvalidInput(format!(
                    "binary variable `{}` has bounds outside {{0, 1}}",
                    v.name
                )));
            }
        }
        let check_terms = |terms: &[(VarId, f64)], what: &str| -> Result<()> {
            for &(v, a) in terms {
                if v.0 >= n {
                    return Err(Error::InvalidInput(format!(
                        "{what} references variable {}",
                        v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidInput(format!("{what} has coefficient {a}")));
                }
            }
            Ok(())
        };
        check_terms(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check_terms(&c.terms, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "constraint {i} has rhs {}",
                    c.rhs
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint, bound or integrality requirement.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| {
                let b = (v.lower - x).max(x - v.upper).max(0.0);
                if v.binary {
                    b.max(x.min(1.0 - x).max(0.0))
                } else {
                    b
                }
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// CPLEX LP text rendering, for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        let names: Vec<String> = self.variables.iter().map(|v| sanitize(&v.name)).collect();
        let expr = |terms: &[(VarId, f64)]| -> String {
            if terms.is_empty() {
                return "0".to_string();
            }
            let mut s = String::new();
            for (i, &(v, a)) in terms.iter().enumerate() {
                let sign = if a < 0.0 {
                    "-"
                } else if i > 0 {
                    "+"
                } else {
                    ""
                };
                let _ = write!(
                    s,
                    "{}{} {} {}",
                    if i > 0 { " " } else { "" },
                    sign,
                    a.abs(),
                    names[v.0]
                );
            }
            s.trim_start().to_string()
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let _ = writeln!(out, " obj: {}", expr(&self.objective));
        out.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(
                out,
                " c{}: {} {} {}",
                i,
                expr(&c.terms),
                c.relation.symbol(),
                c.rhs
            );
        }
        out.push_str("Bounds\n");
        for (v, name) in self.variables.iter().zip(&names) {
            if v.binary {
                continue;
            }
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (false, false) => {
                    let _ = writeln!(out, " {name} free");
                }
                (true, true) => {
                    let _ = writeln!(out, " {} <= {} <= {}", v.lower, name, v.upper);
                }
                (true, false) => {
                    let _ = writeln!(out, " {name} >= {}", v.lower);
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {} <= {}", name, v.upper);
                }
            }
        }
        let bins: Vec<&str> = self
            .variables
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.binary)
            .map(|(_, n)| n.as_str())
            .collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for b in bins {
                let _ = writeln!(out, " {b}");
            }
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') || s.is_empty() {
        format!("v_{s}")
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`](super::solve_lp) or [`solve_milp`](super::solve_milp).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    /// Objective in the program's own sense; NaN unless optimal.
    pub objective: f64,
    pub values: Vec<f64>,
    pub names: Vec<String>,
    /// Relative optimality gap, reported for MILPs only.
    pub gap: Option<f64>,
    /// Branch-and-bound nodes explored.
    pub nodes: usize,
}

impl LpSolution {
    pub(crate) fn without_point(status: Status, lp: &LinearProgram) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            names: lp.variables.iter().map(|v| v.name.clone()).collect(),
            gap: None,
            nodes: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .and_then(|i| self.values.get(i).copied())
    }

    /// Variable values keyed by name.
    pub fn named_values(&self) -> BTreeMap<String, f64> {
        self.names
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }
}
