//! Dense two-phase primal simplex with Bland's rule, returning optimal or
//! feasible points, unbounded rays, or Farkas infeasibility certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pivot and reduced-cost tolerance used for every comparison in the solver.
pub const PIVOT_TOL: f64 = 1e-9;
/// Returned points and certificates are checked against this.
pub const CHECK_TOL: f64 = 1e-8;
const MIN_PIVOT: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub coeffs: Vec<f64>,
    pub direction: Direction,
}

/// Variables are nonnegative unless marked free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    vars: usize,
    free: Vec<bool>,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        Self { vars, free: vec![false; vars], constraints: Vec::new(), objective: None }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free[j]
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<(), LpError> {
        if coeffs.len() != self.vars {
            return Err(LpError::Malformed(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.vars
            )));
        }
        if coeffs.iter().chain([&rhs]).any(|x| !x.is_finite()) {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> Result<(), LpError> {
        let mut coeffs = vec![0.0; self.vars];
        for &(j, a) in terms {
            if j >= self.vars {
                return Err(LpError::Malformed(format!("variable {j} out of range")));
            }
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    fn set_objective(&mut self, coeffs: Vec<f64>, direction: Direction) -> Result<(), LpError> {
        if coeffs.len() != self.vars || coeffs.iter().any(|x| !x.is_finite()) {
            return Err(LpError::Malformed("objective length or entries invalid".into()));
        }
        self.objective = Some(Objective { coeffs, direction });
        Ok(())
    }

    pub fn maximize(&mut self, coeffs: Vec<f64>) -> Result<(), LpError> {
        self.set_objective(coeffs, Direction::Maximize)
    }

    pub fn minimize(&mut self, coeffs: Vec<f64>) -> Result<(), LpError> {
        self.set_objective(coeffs, Direction::Minimize)
    }

    /// Largest violation of any constraint or sign restriction at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            if !self.free[j] {
                worst = worst.max(-v);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> Option<f64> {
        self.objective.as_ref().map(|o| o.coeffs.iter().zip(x).map(|(a, b)| a * b).sum())
    }
}

/// One multiplier per constraint. Each `≥` row is read as `−a·x ≤ −b`; the
/// multipliers of inequality rows are nonnegative, those of equalities free.
/// The combination must have coefficients `≥ 0` on nonnegative variables and
/// `= 0` on free ones while its right-hand side is negative, i.e. `0 ≥ gap > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub multipliers: Vec<f64>,
}

impl FarkasCertificate {
    /// Re-multiplies the certificate against the program; returns the
    /// certified gap (after scaling multipliers to unit max-norm).
    pub fn verify(&self, lp: &LinearProgram, tol: f64) -> Result<f64, String> {
        if self.multipliers.len() != lp.constraints.len() {
            return Err("multiplier count differs from constraint count".into());
        }
        let scale = self.multipliers.iter().fold(0.0f64, |a, y| a.max(y.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err("zero or non-finite multipliers".into());
        }
        let mut combo = vec![0.0; lp.vars];
        let mut rhs = 0.0;
        for (c, &y) in lp.constraints.iter().zip(&self.multipliers) {
            let y = y / scale;
            let sign = match c.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => 1.0,
            };
            if c.relation != Relation::Eq && y < -tol {
                return Err(format!("multiplier {y} has the wrong sign"));
            }
            for (acc, a) in combo.iter_mut().zip(&c.coeffs) {
                *acc += y * sign * a;
            }
            rhs += y * sign * c.rhs;
        }
        for (j, &v) in combo.iter().enumerate() {
            if lp.free[j] && v.abs() > tol {
                return Err(format!("free variable {j} keeps coefficient {v}"));
            }
            if !lp.free[j] && v < -tol {
                return Err(format!("variable {j} has negative coefficient {v}"));
            }
        }
        let gap = -rhs;
        if gap <= tol {
            return Err(format!("combination gap {gap} is not positive"));
        }
        Ok(gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// Feasible point of a program without objective.
    Feasible {
        x: Vec<f64>,
    },
    Infeasible(FarkasCertificate),
    /// Feasible point and a direction along which the objective improves without bound.
    Unbounded {
        x: Vec<f64>,
        ray: Vec<f64>,
    },
}

#[derive(Clone, Copy, PartialEq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`, right-hand side last.
    data: Vec<f64>,
    /// Reduced costs, with `-objective` in the last slot.
    cost: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), LpError> {
        let w = self.cols + 1;
        let p = self.data[r * w + c];
        if p.abs() < MIN_PIVOT {
            return Err(LpError::NumericalBreakdown(format!("pivot magnitude {p:.3e}")));
        }
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(LpError::NumericalBreakdown("pivot limit reached".into()));
        }
        let inv = 1.0 / p;
        for j in 0..w {
            self.data[r * w + j] *= inv;
        }
        self.data[r * w + c] = 1.0;
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (x, pr) in row.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            row[c] = 0.0;
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Minimizes the current cost row with Bland's rule. Returns the
    /// unbounded entering column, if any.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<Option<usize>, LpError> {
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed(j) && self.cost[j] < -PIVOT_TOL) else {
                return Ok(None);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Ok(Some(c)),
                Some((r, _)) => self.pivot(r, c)?,
            }
        }
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let w = self.cols + 1;
        self.cost = costs.to_vec();
        self.cost.push(0.0);
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..w {
                self.cost[j] -= cb * self.data[i * w + j];
            }
        }
    }

    fn basic_solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(i).max(0.0);
        }
        x
    }
}

/// Structural column layout: nonnegative variables take one column, free
/// variables a `(+, −)` pair.
struct Layout {
    var_cols: Vec<(usize, Option<usize>)>,
    structural: usize,
}

impl Layout {
    fn new(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.vars);
        let mut next = 0;
        for j in 0..lp.vars {
            if lp.free[j] {
                var_cols.push((next, Some(next + 1)));
                next += 2;
            } else {
                var_cols.push((next, None));
                next += 1;
            }
        }
        Self { var_cols, structural: next }
    }

    fn extract(&self, cols: &[f64]) -> Vec<f64> {
        self.var_cols.iter().map(|&(p, m)| cols[p] - m.map_or(0.0, |m| cols[m])).collect()
    }
}

struct PhaseOne {
    tableau: Tableau,
    layout: Layout,
    /// Sign applied to each row to make its right-hand side nonnegative.
    row_sign: Vec<f64>,
    /// Initial basic column of each row and its phase-one cost.
    initial: Vec<(usize, f64)>,
    infeasibility: f64,
}

fn phase_one(lp: &LinearProgram) -> Result<PhaseOne, LpError> {
    for c in &lp.constraints {
        if c.coeffs.len() != lp.vars {
            return Err(LpError::Malformed("ragged constraint".into()));
        }
    }
    let layout = Layout::new(lp);
    let m = lp.constraints.len();
    let slack_count = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let mut row_sign = Vec::with_capacity(m);
    let mut needs_artificial = Vec::with_capacity(m);
    for c in &lp.constraints {
        let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
        let slack = match c.relation {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        row_sign.push(sign);
        needs_artificial.push(slack.is_none_or(|s| s * sign < 0.0));
    }
    let art_count = needs_artificial.iter().filter(|&&b| b).count();
    let cols = layout.structural + slack_count + art_count;
    let w = cols + 1;
    let mut data = vec![0.0; m * w];
    let mut kinds = vec![ColumnKind::Structural; layout.structural];
    kinds.extend(std::iter::repeat_n(ColumnKind::Slack, slack_count));
    kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, art_count));
    let mut basis = vec![0; m];
    let mut initial = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (layout.structural, layout.structural + slack_count);
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = row_sign[i];
        let row = &mut data[i * w..(i + 1) * w];
        for (j, &a) in c.coeffs.iter().enumerate() {
            let (p, mcol) = layout.var_cols[j];
            row[p] = s * a;
            if let Some(mcol) = mcol {
                row[mcol] = -s * a;
            }
        }
        row[cols] = s * c.rhs;
        let mut slack_col = None;
        if c.relation != Relation::Eq {
            let e = if c.relation == Relation::Le { 1.0 } else { -1.0 };
            row[next_slack] = s * e;
            slack_col = Some(next_slack);
            next_slack += 1;
        }
        if needs_artificial[i] {
            row[next_art] = 1.0;
            basis[i] = next_art;
            initial.push((next_art, 1.0));
            next_art += 1;
        } else {
            let sc = slack_col.expect("rows without artificial start on their slack");
            basis[i] = sc;
            initial.push((sc, 0.0));
        }
    }
    let mut tableau = Tableau { rows: m, cols, data, cost: Vec::new(), basis, kinds, pivots: 0 };
    let costs: Vec<f64> = tableau.kinds.iter().map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 }).collect();
    tableau.set_costs(&costs);
    if tableau.run(&|_| true)?.is_some() {
        return Err(LpError::NumericalBreakdown("phase one reported unbounded".into()));
    }
    let infeasibility = -tableau.cost[cols];
    Ok(PhaseOne { tableau, layout, row_sign, initial, infeasibility })
}

/// Optimal value of the phase-one problem: total artificial infeasibility.
/// Zero (within tolerance) iff the program is feasible.
pub fn phase_one_infeasibility(lp: &LinearProgram) -> Result<f64, LpError> {
    Ok(phase_one(lp)?.infeasibility)
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let PhaseOne { mut tableau, layout, row_sign, initial, infeasibility } = phase_one(lp)?;
    let rhs_scale = lp.constraints.iter().fold(1.0f64, |a, c| a.max(c.rhs.abs()));

    if infeasibility > PIVOT_TOL * rhs_scale {
        // phase-one duals: pi_i = cost(initial_i) - reduced_cost(initial_i)
        let multipliers = lp
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (col, cost) = initial[i];
                let pi = cost - tableau.cost[col];
                let z = -pi * row_sign[i];
                match c.relation {
                    Relation::Ge => -z,
                    _ => z,
                }
            })
            .collect();
        let cert = FarkasCertificate { multipliers };
        cert.verify(lp, CHECK_TOL)
            .map_err(|e| LpError::NumericalBreakdown(format!("certificate failed re-verification: {e}")))?;
        return Ok(LpOutcome::Infeasible(cert));
    }

    // drive artificial variables out of the basis where possible
    for i in 0..tableau.rows {
        if tableau.kinds[tableau.basis[i]] != ColumnKind::Artificial {
            continue;
        }
        let candidate = (0..tableau.cols)
            .filter(|&j| tableau.kinds[j] != ColumnKind::Artificial)
            .max_by(|&a, &b| tableau.at(i, a).abs().total_cmp(&tableau.at(i, b).abs()));
        if let Some(j) = candidate {
            if tableau.at(i, j).abs() > PIVOT_TOL {
                tableau.pivot(i, j)?;
            }
        }
    }

    let kinds = tableau.kinds.clone();
    let not_artificial = move |j: usize| kinds[j] != ColumnKind::Artificial;

    let Some(objective) = &lp.objective else {
        let x = layout.extract(&tableau.basic_solution());
        return finish(lp, LpOutcome::Feasible { x });
    };

    let sign = match objective.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut costs = vec![0.0; tableau.cols];
    for (j, &c) in objective.coeffs.iter().enumerate() {
        let (p, m) = layout.var_cols[j];
        costs[p] = sign * c;
        if let Some(m) = m {
            costs[m] = -sign * c;
        }
    }
    tableau.set_costs(&costs);
    match tableau.run(&not_artificial)? {
        None => {
            let x = layout.extract(&tableau.basic_solution());
            let objective = lp.objective_value(&x).unwrap_or(0.0);
            finish(lp, LpOutcome::Optimal { x, objective })
        }
        Some(c) => {
            let mut dir = vec![0.0; tableau.cols];
            dir[c] = 1.0;
            for i in 0..tableau.rows {
                dir[tableau.basis[i]] = -tableau.at(i, c);
            }
            let x = layout.extract(&tableau.basic_solution());
            let ray = layout.extract(&dir);
            finish(lp, LpOutcome::Unbounded { x, ray })
        }
    }
}

fn finish(lp: &LinearProgram, outcome: LpOutcome) -> Result<LpOutcome, LpError> {
    let x = match &outcome {
        LpOutcome::Optimal { x, .. } | LpOutcome::Feasible { x } | LpOutcome::Unbounded { x, .. } => x,
        LpOutcome::Infeasible(_) => return Ok(outcome),
    };
    let scale = lp.constraints.iter().fold(1.0f64, |a, c| a.max(c.rhs.abs()));
    let violation = lp.max_violation(x);
    if violation > CHECK_TOL * scale {
        return Err(LpError::NumericalBreakdown(format!("returned point violates constraints by {violation:.3e}")));
    }
    Ok(outcome)
}
