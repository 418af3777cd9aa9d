use serde::{Deserialize, Serialize};

use super::{BaseSystem, DEFAULT_BIG_M, DEFAULT_CAP, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::model::ValueFunction;
use crate::solver::{solve_milp_with, LinearProgram, MilpOptions, Relation, Sense, Status, VarId};

/// Big-M block excluding the δ-neighbourhood of one earlier function.
///
/// For every coordinate `u_j^k` it introduces `y1, y2 ∈ {0, 1}` with
///
/// ```text
/// u_j^k ≥ c_j^k + δ − M·y1
/// u_j^k + δ ≤ c_j^k + M·y2
/// ```
///
/// and caps the block's binaries at `2·dim − 1`, so at least one binary is 0
/// and some coordinate moves by at least δ away from the centre `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionSet {
    /// 1-based round index `r`.
    pub round: usize,
    pub delta: f64,
    pub big_m: f64,
    /// Coordinates of `U^r`, flattened criterion by criterion.
    pub center: Vec<f64>,
}

impl ExclusionSet {
    pub fn n_binaries(&self) -> usize {
        2 * self.center.len()
    }

    /// Right-hand side of the cardinality row.
    pub fn max_active(&self) -> usize {
        self.n_binaries() - 1
    }

    /// Appends the block to `lp` over the flattened coordinates `u` and
    /// returns the new binaries.
    pub fn append_to(&self, lp: &mut LinearProgram, u: &[VarId]) -> Result<Vec<VarId>> {
        if u.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                got: u.len(),
            });
        }
        let mut ys = Vec::with_capacity(self.n_binaries());
        for (i, (&v, &c)) in u.iter().zip(&self.center).enumerate() {
            let y1 = lp.add_binary(format!("y1_{}_{}", self.round, i));
            let y2 = lp.add_binary(format!("y2_{}_{}", self.round, i));
            lp.add_constraint(vec![(v, 1.0), (y1, self.big_m)], Relation::Ge, c + self.delta);
            lp.add_constraint(vec![(v, 1.0), (y2, -self.big_m)], Relation::Le, c - self.delta);
            ys.push(y1);
            ys.push(y2);
        }
        lp.add_constraint(
            ys.iter().map(|&y| (y, 1.0)).collect(),
            Relation::Le,
            self.max_active() as f64,
        );
        Ok(ys)
    }
}

/// Exclusion block `E_r` around `center`.
pub fn build_exclusion(
    center: &ValueFunction,
    delta: f64,
    big_m: f64,
    round: usize,
) -> Result<ExclusionSet> {
    check_resolution(delta, big_m)?;
    if center.dimension() == 0 {
        return Err(Error::InvalidInput("cannot exclude an empty function".into()));
    }
    Ok(ExclusionSet {
        round,
        delta,
        big_m,
        center: center.flat().collect(),
    })
}

fn check_resolution(delta: f64, big_m: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("δ must be positive, got {delta}")));
    }
    // Values live in [0, 1], so any M below 1 + δ would cut feasible points.
    if !(big_m >= 1.0 + delta) || !big_m.is_finite() {
        return Err(Error::Config(format!(
            "big-M must be at least 1 + δ = {}, got {big_m}",
            1.0 + delta
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    pub delta: f64,
    pub big_m: f64,
    /// Maximum number of functions, the first one included.
    pub cap: usize,
    pub milp: MilpOptions,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            big_m: DEFAULT_BIG_M,
            cap: DEFAULT_CAP,
            milp: MilpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// No further function is δ-separated from all found ones.
    Infeasible,
    Cap,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationState {
    /// `null` in JSON when the system is vacuous and η* is unbounded.
    #[serde(with = "unbounded_eta")]
    pub eta: f64,
    pub delta: f64,
    pub big_m: f64,
    pub cap: usize,
    pub functions: Vec<ValueFunction>,
    pub exclusions: Vec<ExclusionSet>,
    /// `z_2*, …, z_t*`.
    pub objectives: Vec<f64>,
    pub stop: StopReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

mod unbounded_eta {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(eta: &f64, s: S) -> Result<S::Ok, S::Error> {
        if eta.is_finite() {
            s.serialize_f64(*eta)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl EnumerationState {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Enumerates compatible functions at `η = eta`, starting from `first`.
///
/// Round `t + 1` minimizes the total number of active binaries over all
/// blocks `E_1 … E_t` subject to the base system. The loop stops when that
/// program is infeasible, when `cap` functions have been found, or when the
/// solver fails; the last case is recorded rather than raised.
pub fn enumerate_compatible(
    base: &BaseSystem,
    first: &ValueFunction,
    eta: f64,
    options: &EnumerationOptions,
) -> Result<EnumerationState> {
    check_resolution(options.delta, options.big_m)?;
    if options.cap == 0 {
        return Err(Error::Config("enumeration cap must be at least 1".into()));
    }
    if !first.matches_scales(base.scales()) {
        return Err(Error::DimensionMismatch {
            expected: base.u_vars().iter().map(Vec::len).sum(),
            got: first.dimension(),
        });
    }
    let template = base.with_fixed_eta(eta)?;
    let u: Vec<VarId> = base.u_vars().iter().flatten().copied().collect();
    let label = |r: usize, f: ValueFunction| f.with_label(format!("U{r}"));

    let mut state = EnumerationState {
        eta,
        delta: options.delta,
        big_m: options.big_m,
        cap: options.cap,
        functions: vec![label(1, first.clone())],
        exclusions: vec![build_exclusion(first, options.delta, options.big_m, 1)?],
        objectives: Vec::new(),
        stop: StopReason::Cap,
        failure: None,
    };
    while state.functions.len() < options.cap {
        let mut lp = template.clone();
        let mut ys = Vec::new();
        for e in &state.exclusions {
            ys.extend(e.append_to(&mut lp, &u)?);
        }
        lp.set_objective(ys.iter().map(|&y| (y, 1.0)).collect(), Sense::Minimize);
        let sol = match solve_milp_with(&lp, options.milp) {
            Ok(sol) => sol,
            Err(e) => {
                state.stop = StopReason::SolverFailure;
                state.failure = Some(e.to_string());
                return Ok(state);
            }
        };
        match sol.status {
            Status::Optimal => {
                let r = state.functions.len() + 1;
                let f = base.function_from(&sol.values);
                state
                    .exclusions
                    .push(build_exclusion(&f, options.delta, options.big_m, r)?);
                state.functions.push(label(r, f));
                state.objectives.push(sol.objective);
            }
            Status::Infeasible => {
                state.stop = StopReason::Infeasible;
                return Ok(state);
            }
            Status::Unbounded => {
                state.stop = StopReason::SolverFailure;
                state.failure = Some("enumeration program is unbounded".into());
                return Ok(state);
            }
        }
    }
    Ok(state)
}
