use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{add_marginal_vars, add_structural_rows};
use crate::error::Result;
use crate::model::{breakpoint_positions, CriterionScale, PerformanceMatrix, ValueFunction, SOLVER_TOL};
use crate::solver::{solve_lp, LinearProgram, Sense, Status, VarId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeaEntry {
    pub id: String,
    /// Best-case utility U*(a); absent when the solve failed.
    pub utility: Option<f64>,
    pub efficient: bool,
    /// Function attaining U*(a).
    pub function: Option<ValueFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeaResult {
    pub tolerance: f64,
    pub entries: Vec<DeaEntry>,
}

impl DeaResult {
    pub fn efficient_ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.efficient)
            .map(|e| e.id.as_str())
            .collect()
    }

    pub fn all_efficient(&self) -> bool {
        self.entries.iter().all(|e| e.efficient)
    }
}

/// Maximizes U(a) for each alternative over monotone, anchored, normalized
/// value functions. An alternative is efficient when U*(a) = 1.
///
/// When every criterion is constant all alternatives coincide; each is then
/// reported efficient with U*(a) = 1 and no attaining function.
pub fn dea_efficiency(scales: &[CriterionScale], matrix: &PerformanceMatrix) -> Result<DeaResult> {
    let positions = breakpoint_positions(matrix, scales)?;
    let degenerate = scales.iter().all(|s| s.len() == 1);
    let entries = matrix
        .alternatives()
        .par_iter()
        .zip(positions.par_iter())
        .map(|(alt, pos)| {
            if degenerate {
                return DeaEntry {
                    id: alt.id.clone(),
                    utility: Some(1.0),
                    efficient: true,
                    function: None,
                    error: None,
                };
            }
            match best_case(scales, pos) {
                Ok((utility, function)) => DeaEntry {
                    id: alt.id.clone(),
                    utility: Some(utility),
                    efficient: (utility - 1.0).abs() <= SOLVER_TOL,
                    function: Some(function),
                    error: None,
                },
                Err(e) => DeaEntry {
                    id: alt.id.clone(),
                    utility: None,
                    efficient: false,
                    function: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(DeaResult {
        tolerance: SOLVER_TOL,
        entries,
    })
}

fn best_case(scales: &[CriterionScale], pos: &[usize]) -> Result<(f64, ValueFunction)> {
    let mut lp = LinearProgram::new(Sense::Maximize);
    let u = add_marginal_vars(&mut lp, scales);
    add_structural_rows(&mut lp, &u);
    let objective: Vec<(VarId, f64)> = u.iter().zip(pos).map(|(v, &k)| (v[k], 1.0)).collect();
    lp.set_objective(objective, Sense::Maximize);
    let sol = solve_lp(&lp)?;
    if sol.status != Status::Optimal {
        return Err(crate::Error::Solver(format!(
            "best-case program ended {:?}",
            sol.status
        )));
    }
    let f = ValueFunction::from_values(
        u.iter()
            .map(|vars| vars.iter().map(|v| sol.value(*v)).collect())
            .collect(),
    );
    Ok((sol.objective, f))
}
