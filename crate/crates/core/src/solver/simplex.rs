//! Dense bounded-variable simplex.
//!
//! Every row `i` of the program becomes `Σ a_ij x_j + s_i = b_i` with a slack
//! whose bounds encode the relation. Rows whose slack cannot absorb the
//! initial residual get an artificial column, driven to zero in phase one and
//! then fixed at zero. The full tableau `B⁻¹A` is kept, which is fine for the
//! few hundred rows the scoring programs produce.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule until it makes progress again. The dual simplex
//! re-optimizes after bound changes during branch-and-bound.

use std::sync::Arc;

use super::program::Relation;
use crate::error::{Error, Result};

pub(crate) const FEAS_TOL: f64 = 1e-9;
pub(crate) const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-8;
const DEGENERATE_RUN: usize = 50;

/// Program in the solver's internal shape: minimize `cost · x`.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug)]
struct Origin {
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Row and sign of each artificial column.
    artificials: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    nc: usize,
    n_struct: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    origin: Arc<Origin>,
    iteration_limit: usize,
}

impl Tableau {
    /// Builds the initial basis from slacks and artificials, with the phase
    /// one cost installed.
    pub fn new(sf: &StandardForm) -> Self {
        let n = sf.cost.len();
        let m = sf.rows.len();

        let mut lower = sf.lower.clone();
        let mut upper = sf.upper.clone();
        let mut x: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| {
                if l.is_finite() {
                    l
                } else if u.is_finite() {
                    u
                } else {
                    0.0
                }
            })
            .collect();
        for rel in &sf.relations {
            let (l, u) = match rel {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        // Residual each slack would need to take.
        let residual: Vec<f64> = sf
            .rows
            .iter()
            .zip(&sf.rhs)
            .map(|(row, &b)| b - row.iter().map(|&(j, a)| a * x[j]).sum::<f64>())
            .collect();
        let mut artificials = Vec::new();
        let mut slack_value = vec![0.0; m];
        for i in 0..m {
            let r = residual[i];
            let (l, u) = (lower[n + i], upper[n + i]);
            if r >= l && r <= u {
                slack_value[i] = r;
            } else {
                let s = r.clamp(l, u);
                slack_value[i] = s;
                artificials.push((i, (r - s).signum()));
            }
        }
        x.extend_from_slice(&slack_value);
        let n_art = artificials.len();
        let nc = n + m + n_art;
        for &(i, sign) in &artificials {
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push((residual[i] - slack_value[i]) * sign);
        }

        let mut basis = vec![0; m];
        let mut row_of = vec![NONBASIC; nc];
        let mut diag = vec![1.0; m];
        for i in 0..m {
            basis[i] = n + i;
        }
        for (k, &(i, sign)) in artificials.iter().enumerate() {
            basis[i] = n + m + k;
            diag[i] = sign;
        }
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = i;
        }

        let mut t = vec![0.0; m * nc];
        for i in 0..m {
            let row = &mut t[i * nc..(i + 1) * nc];
            for &(j, a) in &sf.rows[i] {
                row[j] += a / diag[i];
            }
            row[n + i] = 1.0 / diag[i];
        }
        for (k, &(i, sign)) in artificials.iter().enumerate() {
            t[i * nc + n + m + k] = sign / diag[i];
        }

        let mut cost = vec![0.0; nc];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        let origin = Arc::new(Origin {
            rows: sf.rows.clone(),
            rhs: sf.rhs.clone(),
            artificials,
        });
        let mut tab = Self {
            m,
            nc,
            n_struct: n,
            t,
            basis,
            row_of,
            x,
            lower,
            upper,
            cost,
            d: vec![0.0; nc],
            origin,
            iteration_limit: 20_000 + 50 * (m + nc),
        };
        tab.recompute_reduced_costs();
        tab
    }

    fn n_art(&self) -> usize {
        self.origin.artificials.len()
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.nc;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * nc..(i + 1) * nc];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Installs a new structural cost vector (minimization).
    pub fn set_cost(&mut self, cost: &[f64]) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.n_struct].copy_from_slice(cost);
        self.recompute_reduced_costs();
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    pub fn structural(&self) -> &[f64] {
        &self.x[..self.n_struct]
    }

    pub fn value(&self, j: usize) -> f64 {
        self.x[j]
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.nc;
        let piv = self.t[r * nc + j];
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[j] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for chunk in before
            .chunks_exact_mut(nc)
            .chain(after.chunks_exact_mut(nc))
        {
            let f = chunk[j];
            if f != 0.0 {
                for (v, &p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                chunk[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, &p) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NONBASIC;
        self.basis[r] = j;
        self.row_of[j] = r;
    }

    /// Moves nonbasic `j` by `delta`, updating the basic variables.
    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.x[j] += delta;
        let nc = self.nc;
        for i in 0..self.m {
            let tij = self.t[i * nc + j];
            if tij != 0.0 {
                self.x[self.basis[i]] -= tij * delta;
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            if self.row_of[j] != NONBASIC || self.is_fixed(j) {
                continue;
            }
            let dj = self.d[j];
            let at_lower = self.x[j] <= self.lower[j];
            let at_upper = self.x[j] >= self.upper[j];
            let dir = if dj < -OPT_TOL && !at_upper {
                1.0
            } else if dj > OPT_TOL && !at_lower {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Primal simplex from a primal-feasible basis.
    pub fn primal(&mut self) -> Result<Outcome> {
        let nc = self.nc;
        let mut degenerate = 0usize;
        for _ in 0..self.iteration_limit {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some((j, dir)) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };

            let mut theta = f64::INFINITY;
            let mut leave: Option<usize> = None;
            let mut leave_pivot = 0.0;
            for i in 0..self.m {
                let tij = self.t[i * nc + j];
                let rate = -dir * tij;
                let b = self.basis[i];
                let ratio = if rate < -PIVOT_TOL && self.lower[b].is_finite() {
                    ((self.x[b] - self.lower[b]) / -rate).max(0.0)
                } else if rate > PIVOT_TOL && self.upper[b].is_finite() {
                    ((self.upper[b] - self.x[b]) / rate).max(0.0)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        if ratio < theta - 1e-12 {
                            true
                        } else if ratio <= theta + 1e-12 {
                            if bland {
                                b < self.basis[cur]
                            } else {
                                tij.abs() > leave_pivot
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = ratio;
                    leave = Some(i);
                    leave_pivot = tij.abs();
                }
            }
            let flip = self.upper[j] - self.lower[j];
            if flip.is_finite() && flip <= theta {
                self.shift_nonbasic(j, dir * flip);
                self.x[j] = if dir > 0.0 {
                    self.upper[j]
                } else {
                    self.lower[j]
                };
                degenerate = 0;
                continue;
            }
            let Some(r) = leave else {
                return Ok(Outcome::Unbounded);
            };
            let b = self.basis[r];
            let rate = -dir * self.t[r * nc + j];
            self.shift_nonbasic(j, dir * theta);
            self.x[b] = if rate < 0.0 {
                self.lower[b]
            } else {
                self.upper[b]
            };
            self.pivot(r, j);
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
        Err(Error::Solver(format!(
            "simplex iteration limit {} exceeded",
            self.iteration_limit
        )))
    }

    /// Runs phase one; returns whether the program is feasible. On success the
    /// artificial columns are fixed at zero.
    pub fn phase_one(&mut self) -> Result<bool> {
        if self.n_art() == 0 {
            return Ok(true);
        }
        self.primal()?;
        let infeasibility: f64 = (self.n_struct + self.m..self.nc).map(|j| self.x[j]).sum();
        if infeasibility > PHASE1_TOL {
            return Ok(false);
        }
        let nc = self.nc;
        for j in self.n_struct + self.m..nc {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
            let r = self.row_of[j];
            if r == NONBASIC {
                self.x[j] = 0.0;
                continue;
            }
            self.x[j] = 0.0;
            let candidate = (0..self.n_struct + self.m)
                .filter(|&k| self.row_of[k] == NONBASIC)
                .max_by(|&a, &b| {
                    self.t[r * nc + a]
                        .abs()
                        .total_cmp(&self.t[r * nc + b].abs())
                        .then(b.cmp(&a))
                });
            if let Some(k) = candidate {
                if self.t[r * nc + k].abs() > 1e-7 {
                    self.pivot(r, k);
                }
            }
        }
        Ok(true)
    }

    /// Dual simplex from a dual-feasible basis; returns whether a primal
    /// feasible point exists.
    pub fn dual(&mut self) -> Result<bool> {
        let nc = self.nc;
        for _ in 0..self.iteration_limit {
            let mut leave: Option<(usize, f64)> = None;
            let mut worst = FEAS_TOL;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = self.x[b];
                let gap = if v < self.lower[b] - FEAS_TOL {
                    self.lower[b] - v
                } else if v > self.upper[b] + FEAS_TOL {
                    v - self.upper[b]
                } else {
                    continue;
                };
                if gap > worst {
                    worst = gap;
                    leave = Some((
                        i,
                        if v < self.lower[b] {
                            self.lower[b]
                        } else {
                            self.upper[b]
                        },
                    ));
                }
            }
            let Some((r, target)) = leave else {
                return Ok(true);
            };
            let b = self.basis[r];
            let increase = target > self.x[b];

            let mut enter: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_alpha = 0.0;
            for j in 0..nc {
                if self.row_of[j] != NONBASIC || self.is_fixed(j) {
                    continue;
                }
                let alpha = self.t[r * nc + j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let can_up = self.x[j] < self.upper[j];
                let can_down = self.x[j] > self.lower[j];
                // x_b moves by -alpha per unit increase of x_j.
                let ok = if increase {
                    (alpha < 0.0 && can_up) || (alpha > 0.0 && can_down)
                } else {
                    (alpha > 0.0 && can_up) || (alpha < 0.0 && can_down)
                };
                if !ok {
                    continue;
                }
                let ratio = self.d[j].abs() / alpha.abs();
                if ratio < best_ratio - 1e-12
                    || (ratio <= best_ratio + 1e-12 && alpha.abs() > best_alpha)
                {
                    best_ratio = ratio;
                    best_alpha = alpha.abs();
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                return Ok(false);
            };
            let alpha = self.t[r * nc + j];
            let delta = (self.x[b] - target) / alpha;
            self.shift_nonbasic(j, delta);
            self.x[b] = target;
            self.pivot(r, j);
        }
        Err(Error::Solver(format!(
            "dual simplex iteration limit {} exceeded",
            self.iteration_limit
        )))
    }

    /// Fixes variable `j` to `value`; the basis may become primal infeasible.
    pub fn fix(&mut self, j: usize, value: f64) {
        self.lower[j] = value;
        self.upper[j] = value;
        if self.row_of[j] == NONBASIC {
            let delta = value - self.x[j];
            self.shift_nonbasic(j, delta);
        }
    }

    /// Recomputes basic values from the original rows to shed accumulated
    /// rounding error.
    pub fn refresh_values(&mut self) {
        let m = self.m;
        if m == 0 {
            return;
        }
        let n = self.n_struct;
        let origin = Arc::clone(&self.origin);
        let column_entry = |i: usize, col: usize| -> f64 {
            if col < n {
                origin.rows[i]
                    .iter()
                    .filter(|&&(j, _)| j == col)
                    .map(|&(_, a)| a)
                    .sum()
            } else if col < n + m {
                if col - n == i {
                    1.0
                } else {
                    0.0
                }
            } else {
                let (row, sign) = origin.artificials[col - n - m];
                if row == i {
                    sign
                } else {
                    0.0
                }
            }
        };
        let mut rhs = origin.rhs.clone();
        for i in 0..m {
            for &(j, a) in &origin.rows[i] {
                if self.row_of[j] == NONBASIC {
                    rhs[i] -= a * self.x[j];
                }
            }
            if self.row_of[n + i] == NONBASIC {
                rhs[i] -= self.x[n + i];
            }
        }
        for (k, &(i, sign)) in origin.artificials.iter().enumerate() {
            let col = n + m + k;
            if self.row_of[col] == NONBASIC {
                rhs[i] -= sign * self.x[col];
            }
        }
        let mut dense = vec![0.0; m * m];
        for i in 0..m {
            for (p, &col) in self.basis.iter().enumerate() {
                if col < n {
                    continue;
                }
                dense[i * m + p] = column_entry(i, col);
            }
            for &(j, a) in &origin.rows[i] {
                let p = self.row_of[j];
                if p != NONBASIC {
                    dense[i * m + p] += a;
                }
            }
        }
        if let Some(z) = solve_dense(&mut dense, &mut rhs, m) {
            for (p, &col) in self.basis.iter().enumerate() {
                self.x[col] = z[p];
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv =
            (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * z[k]).sum();
        z[row] = (b[row] - s) / a[row * n + row];
    }
    Some(z)
}

/// Two-phase solve. Returns the outcome and, when optimal, the final tableau.
pub(crate) fn solve(sf: &StandardForm) -> Result<(Outcome, Tableau)> {
    let mut tab = Tableau::new(sf);
    if !tab.phase_one()? {
        return Ok((Outcome::Infeasible, tab));
    }
    tab.set_cost(&sf.cost);
    let outcome = tab.primal()?;
    if outcome == Outcome::Optimal {
        tab.refresh_values();
    }
    Ok((outcome, tab))
}
