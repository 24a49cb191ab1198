//! Dense linear programming for desk-scale problems.
//!
//! [`solve_lp`] runs a two-phase primal simplex on a dense tableau with
//! Bland's anti-cycling rule, then re-solves the final basis from the
//! original data to report clean primal values, row duals, reduced costs and
//! the dual objective. Infeasible problems come back with a Farkas ray taken
//! from the phase-one duals. [`enumerate_vertices`] lists the vertices of a
//! small bounded polytope by exhaustive basis enumeration and serves as an
//! oracle for extreme-point claims elsewhere in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Numeric tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility: f64,
    pub duality: f64,
    pub dedup: f64,
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-9,
            duality: 1e-8,
            dedup: 1e-9,
            pivot: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tolerances: Tolerances,
    pub max_vars: usize,
    pub max_rows: usize,
    pub max_pivots: usize,
    pub max_condition: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerances: Tolerances::default(),
            max_vars: 2000,
            max_rows: 2000,
            max_pivots: 200_000,
            max_condition: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
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

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable bounds; infinite ends serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    #[serde(with = "lower_inf")]
    pub lower: f64,
    #[serde(with = "upper_inf")]
    pub upper: f64,
}

impl Bound {
    pub const NONNEG: Bound = Bound {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bound { lower, upper }
    }
}

macro_rules! inf_serde {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                if v.is_infinite() {
                    s.serialize_none()
                } else {
                    s.serialize_some(v)
                }
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
            }
        }
    };
}

inf_serde!(lower_inf, f64::NEG_INFINITY);
inf_serde!(upper_inf, f64::INFINITY);

/// `sense cᵀx` subject to row constraints and per-variable bounds.
/// Variables default to `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![Bound::NONNEG; n],
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Min, objective)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Max, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = Bound::new(lower, upper);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.bounds[var] = Bound::FREE;
        self
    }

    /// JSON debug dump for reproducing solver failures.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("LP serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    fn validate(&self, cfg: &SolverConfig) -> Result<()> {
        let n = self.num_vars();
        if n > cfg.max_vars || self.constraints.len() > cfg.max_rows {
            return Err(Error::SizeLimit(format!(
                "LP has {} variables and {} rows (limits {} / {})",
                n,
                self.constraints.len(),
                cfg.max_vars,
                cfg.max_rows
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.bounds.len(),
            });
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective entry".into()));
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite constraint entry".into()));
            }
        }
        for b in &self.bounds {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
                return Err(Error::InvalidInput("invalid variable bound".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (empty unless optimal).
    pub x: Vec<f64>,
    /// Row duals as sensitivities of the objective (in the LP's own sense) to each rhs.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Original variables whose column is basic at the optimum.
    pub basis: Vec<usize>,
    /// Some basic variable sits at zero.
    pub degenerate: bool,
    /// For infeasible problems, `y` with `yᵀ(rows)` certifying infeasibility
    /// in the phase-one normal form (see [`LpSolution::farkas`]).
    pub farkas: Option<Vec<f64>>,
    pub pivots: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, farkas: Option<Vec<f64>>, pivots: usize) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            dual_objective: f64::NAN,
            basis: Vec::new(),
            degenerate: false,
            farkas,
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone)]
struct VarMap {
    cols: Vec<(usize, f64)>,
    offset: f64,
}

struct StandardForm {
    /// Rows over all columns (structural, slack, artificial).
    a: Matrix,
    b: Vec<f64>,
    cost: Vec<f64>,
    n_struct: usize,
    artificial_start: usize,
    basis: Vec<usize>,
    /// Row `i` was multiplied by -1 to make its rhs nonnegative.
    negated: Vec<bool>,
    /// Number of rows that come from the LP itself (the rest encode upper bounds).
    n_orig_rows: usize,
    var_maps: Vec<VarMap>,
}

fn standardize(lp: &LinearProgram) -> Result<StandardForm> {
    let n = lp.num_vars();
    let sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut var_maps = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        if b.upper < b.lower {
            // empty box: encode as an impossible row later
            var_maps.push(VarMap {
                cols: vec![(n_struct, 1.0)],
                offset: b.lower,
            });
            bound_rows.push((n_struct, b.upper - b.lower));
            n_struct += 1;
        } else if b.lower.is_finite() {
            var_maps.push(VarMap {
                cols: vec![(n_struct, 1.0)],
                offset: b.lower,
            });
            if b.upper.is_finite() {
                bound_rows.push((n_struct, b.upper - b.lower));
            }
            n_struct += 1;
        } else if b.upper.is_finite() {
            var_maps.push(VarMap {
                cols: vec![(n_struct, -1.0)],
                offset: b.upper,
            });
            n_struct += 1;
        } else {
            var_maps.push(VarMap {
                cols: vec![(n_struct, 1.0), (n_struct + 1, -1.0)],
                offset: 0.0,
            });
            n_struct += 2;
        }
    }

    // rows over structural columns
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![0.0; n_struct];
        let mut rhs = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(col, coef) in &var_maps[j].cols {
                row[col] += a * coef;
            }
            rhs -= a * var_maps[j].offset;
        }
        rows.push((row, c.relation, rhs));
    }
    let n_orig_rows = rows.len();
    for &(col, ub) in &bound_rows {
        let mut row = vec![0.0; n_struct];
        row[col] = 1.0;
        rows.push((row, Relation::Le, ub));
    }

    let mut negated = vec![false; rows.len()];
    for (i, (row, rel, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *rel = rel.flipped();
            negated[i] = true;
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let artificial_start = n_struct + n_slack;
    let total = artificial_start + n_art;
    let mut a = Matrix::zeros(m, total);
    let mut b = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut t) = (n_struct, artificial_start);
    for (i, (row, rel, rhs)) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[(i, j)] = v;
        }
        b[i] = *rhs;
        match rel {
            Relation::Le => {
                a[(i, s)] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                a[(i, s)] = -1.0;
                s += 1;
                a[(i, t)] = 1.0;
                basis[i] = t;
                t += 1;
            }
            Relation::Eq => {
                a[(i, t)] = 1.0;
                basis[i] = t;
                t += 1;
            }
        }
    }

    let mut cost = vec![0.0; total];
    for (j, vm) in var_maps.iter().enumerate() {
        for &(col, coef) in &vm.cols {
            cost[col] += sign * lp.objective[j] * coef;
        }
    }

    Ok(StandardForm {
        a,
        b,
        cost,
        n_struct,
        artificial_start,
        basis,
        negated,
        n_orig_rows,
        var_maps,
    })
}

enum SimplexOutcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    t: Matrix,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Row indices still present (redundant rows get dropped).
    active: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.t.cols();
        let p = self.t[(r, c)];
        for j in 0..cols {
            self.t[(r, j)] /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.t.rows() {
            if i == r || !self.active[i] {
                continue;
            }
            let f = self.t[(i, c)];
            if f == 0.0 {
                continue;
            }
            for j in 0..cols {
                let v = self.t[(r, j)];
                if v != 0.0 {
                    self.t[(i, j)] -= f * v;
                }
            }
            self.t[(i, c)] = 0.0;
            self.rhs[i] -= f * self.rhs[r];
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-11 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.t.rows() {
            if !self.active[i] {
                continue;
            }
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.t[(i, j)];
            }
        }
        d
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test go
    /// to the lowest-index basic variable.
    fn run(&mut self, cost: &[f64], allowed: usize, cfg: &SolverConfig) -> Result<SimplexOutcome> {
        let scale = cost.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let rc_tol = 1e-11 * scale;
        let piv_tol = cfg.tolerances.pivot;
        let mut d = self.reduced_costs(cost);
        loop {
            if self.pivots > cfg.max_pivots {
                return Err(Error::NumericBreakdown(format!(
                    "pivot limit {} reached",
                    cfg.max_pivots
                )));
            }
            let entering = (0..allowed).find(|&j| d[j] < -rc_tol);
            let Some(c) = entering else {
                return Ok(SimplexOutcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.t.rows() {
                if !self.active[i] {
                    continue;
                }
                let a = self.t[(i, c)];
                if a <= piv_tol {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
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
            let Some((r, _)) = best else {
                return Ok(SimplexOutcome::Unbounded);
            };
            self.pivot(r, c);
            // refresh the objective row incrementally
            let dc = d[c];
            for (j, dj) in d.iter_mut().enumerate() {
                let v = self.t[(r, j)];
                if v != 0.0 {
                    *dj -= dc * v;
                }
            }
            d[c] = 0.0;
        }
    }
}

/// Solves `lp` with the default configuration.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SolverConfig::default())
}

pub fn solve_lp_with(lp: &LinearProgram, cfg: &SolverConfig) -> Result<LpSolution> {
    lp.validate(cfg)?;
    let sf = standardize(lp)?;
    let m = sf.a.rows();
    let total = sf.a.cols();
    let mut tab = Tableau {
        t: sf.a.clone(),
        rhs: sf.b.clone(),
        basis: sf.basis.clone(),
        active: vec![true; m],
        pivots: 0,
    };

    // phase one
    if sf.artificial_start < total {
        let mut c1 = vec![0.0; total];
        for c in c1.iter_mut().skip(sf.artificial_start) {
            *c = 1.0;
        }
        tab.run(&c1, total, cfg)?;
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= sf.artificial_start)
            .map(|i| tab.rhs[i])
            .sum();
        let bscale = sf.b.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        if infeas > cfg.tolerances.feasibility * bscale {
            let y = basis_duals(&sf, &tab, &c1, cfg)?;
            let farkas = (0..sf.n_orig_rows)
                .map(|i| if sf.negated[i] { -y[i] } else { y[i] })
                .collect();
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, Some(farkas), tab.pivots));
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if tab.basis[i] < sf.artificial_start {
                continue;
            }
            let col = (0..sf.artificial_start)
                .filter(|&j| tab.t[(i, j)].abs() > cfg.tolerances.pivot)
                .max_by(|&a, &b| tab.t[(i, a)].abs().total_cmp(&tab.t[(i, b)].abs()).then(b.cmp(&a)));
            match col {
                Some(j) => tab.pivot(i, j),
                None => tab.active[i] = false,
            }
        }
    }

    // phase two
    let outcome = tab.run(&sf.cost, sf.artificial_start, cfg)?;
    if let SimplexOutcome::Unbounded = outcome {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, None, tab.pivots));
    }

    // re-solve the final basis from the original data
    let rows: Vec<usize> = (0..m).filter(|&i| tab.active[i]).collect();
    let k = rows.len();
    let mut bmat = Matrix::zeros(k, k);
    for (r, &i) in rows.iter().enumerate() {
        for (c, &ri) in rows.iter().enumerate() {
            bmat[(r, c)] = sf.a[(i, tab.basis[ri])];
        }
    }
    let binv = invert_checked(&bmat, cfg)?;
    let bb: Vec<f64> = rows.iter().map(|&i| sf.b[i]).collect();
    let xb = binv.mul_vec(&bb);
    let mut xs = vec![0.0; total];
    for (r, &i) in rows.iter().enumerate() {
        let v = xb[r];
        xs[tab.basis[i]] = if v < 0.0 && v > -cfg.tolerances.feasibility { 0.0 } else { v };
    }
    let cb: Vec<f64> = rows.iter().map(|&i| sf.cost[tab.basis[i]]).collect();
    let yk = binv.transpose().mul_vec(&cb);
    let mut ystd = vec![0.0; m];
    for (r, &i) in rows.iter().enumerate() {
        ystd[i] = yk[r];
    }

    let n = lp.num_vars();
    let x: Vec<f64> = sf
        .var_maps
        .iter()
        .map(|vm| vm.offset + vm.cols.iter().map(|&(c, coef)| coef * xs[c]).sum::<f64>())
        .collect();
    let sense_sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let duals: Vec<f64> = (0..sf.n_orig_rows)
        .map(|i| {
            let y = if sf.negated[i] { -ystd[i] } else { ystd[i] };
            sense_sign * y
        })
        .collect();
    let reduced_costs: Vec<f64> = (0..n)
        .map(|j| {
            lp.objective[j]
                - lp
                    .constraints
                    .iter()
                    .zip(&duals)
                    .map(|(c, y)| c.coeffs[j] * y)
                    .sum::<f64>()
        })
        .collect();
    let objective = linalg::dot(&lp.objective, &x);
    let rc_tol = cfg.tolerances.duality;
    let mut dual_objective: f64 = lp.constraints.iter().zip(&duals).map(|(c, y)| c.rhs * y).sum();
    for j in 0..n {
        let d = reduced_costs[j] * sense_sign;
        let b = lp.bounds[j];
        let at = if d > 0.0 { b.lower } else { b.upper };
        let term = if at.is_finite() {
            reduced_costs[j] * at
        } else if d.abs() <= rc_tol {
            reduced_costs[j] * x[j]
        } else {
            sense_sign * f64::NEG_INFINITY
        };
        dual_objective += term;
    }

    let mut basis: Vec<usize> = Vec::new();
    for &i in &rows {
        let col = tab.basis[i];
        if col < sf.n_struct {
            if let Some(j) = sf.var_maps.iter().position(|vm| vm.cols.iter().any(|&(c, _)| c == col)) {
                basis.push(j);
            }
        }
    }
    basis.sort_unstable();
    basis.dedup();
    let degenerate = rows.iter().any(|&i| xs[tab.basis[i]].abs() <= 1e-12);

    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        duals,
        reduced_costs,
        objective,
        dual_objective,
        basis,
        degenerate,
        farkas: None,
        pivots: tab.pivots,
    })
}

fn invert_checked(bmat: &Matrix, cfg: &SolverConfig) -> Result<Matrix> {
    if bmat.rows() == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let binv = bmat
        .inverse(1e-14)
        .ok_or_else(|| Error::NumericBreakdown("final basis is singular".into()))?;
    let cond = bmat.norm1() * binv.norm1();
    if !cond.is_finite() || cond > cfg.max_condition {
        return Err(Error::NumericBreakdown(format!(
            "basis condition estimate {cond:e} exceeds {:e}",
            cfg.max_condition
        )));
    }
    Ok(binv)
}

fn basis_duals(sf: &StandardForm, tab: &Tableau, cost: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let m = sf.a.rows();
    let rows: Vec<usize> = (0..m).filter(|&i| tab.active[i]).collect();
    let k = rows.len();
    let mut bmat = Matrix::zeros(k, k);
    for (r, &i) in rows.iter().enumerate() {
        for (c, &ri) in rows.iter().enumerate() {
            bmat[(r, c)] = sf.a[(i, tab.basis[ri])];
        }
    }
    let binv = invert_checked(&bmat, cfg)?;
    let cb: Vec<f64> = rows.iter().map(|&i| cost[tab.basis[i]]).collect();
    let yk = binv.transpose().mul_vec(&cb);
    let mut y = vec![0.0; m];
    for (r, &i) in rows.iter().enumerate() {
        y[i] = yk[r];
    }
    Ok(y)
}

/// Independent re-verification of an optimal solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    /// Largest violation of a row or bound.
    pub primal_residual: f64,
    /// Largest sign violation among duals and reduced costs.
    pub dual_residual: f64,
    pub gap: f64,
    /// Largest `|y_i · slack_i|` or `|d_j · (x_j - bound)|` product.
    pub complementarity: f64,
}

impl Certificate {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.primal_residual <= tol.feasibility
            && self.dual_residual <= tol.duality
            && self.gap <= tol.duality
            && self.complementarity <= tol.duality
    }
}

pub fn certify(lp: &LinearProgram, sol: &LpSolution) -> Certificate {
    let s = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut primal_residual = 0.0_f64;
    let mut dual_residual = 0.0_f64;
    let mut complementarity = 0.0_f64;
    for (c, &y) in lp.constraints.iter().zip(&sol.duals) {
        let lhs = linalg::dot(&c.coeffs, &sol.x);
        let slack = c.rhs - lhs;
        let scale = 1.0 + c.rhs.abs();
        match c.relation {
            Relation::Le => {
                primal_residual = primal_residual.max(-slack / scale);
                dual_residual = dual_residual.max(s * y);
            }
            Relation::Ge => {
                primal_residual = primal_residual.max(slack / scale);
                dual_residual = dual_residual.max(-s * y);
            }
            Relation::Eq => primal_residual = primal_residual.max(slack.abs() / scale),
        }
        complementarity = complementarity.max((y * slack).abs());
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let x = sol.x[j];
        primal_residual = primal_residual.max(b.lower - x).max(x - b.upper);
        let d = s * sol.reduced_costs[j];
        let dist = if d > 0.0 { x - b.lower } else { b.upper - x };
        if dist.is_finite() {
            complementarity = complementarity.max((d * dist).abs());
        } else {
            dual_residual = dual_residual.max(d.abs());
        }
    }
    let scale = 1.0 + sol.objective.abs();
    Certificate {
        primal_residual,
        dual_residual,
        gap: (sol.objective - sol.dual_objective).abs() / scale,
        complementarity,
    }
}

/// `{x : E x = e, A x ≤ b}` in dimension `dim`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HalfspaceSystem {
    pub dim: usize,
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub inequalities: Vec<(Vec<f64>, f64)>,
}

impl HalfspaceSystem {
    pub fn new(dim: usize) -> Self {
        HalfspaceSystem {
            dim,
            ..Default::default()
        }
    }

    pub fn eq(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.equalities.push((a, b));
        self
    }

    pub fn le(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.inequalities.push((a, b));
        self
    }

    /// Adds `x_j ≥ 0` for every coordinate.
    pub fn nonnegative(&mut self) -> &mut Self {
        for j in 0..self.dim {
            let mut a = vec![0.0; self.dim];
            a[j] = -1.0;
            self.inequalities.push((a, 0.0));
        }
        self
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.equalities
            .iter()
            .all(|(a, b)| (linalg::dot(a, x) - b).abs() <= tol * (1.0 + b.abs()))
            && self
                .inequalities
                .iter()
                .all(|(a, b)| linalg::dot(a, x) <= b + tol * (1.0 + b.abs()))
    }

    fn as_lp(&self, objective: Vec<f64>, sense: Sense) -> LinearProgram {
        let mut lp = LinearProgram::new(sense, objective);
        for j in 0..self.dim {
            lp.set_free(j);
        }
        for (a, b) in &self.equalities {
            lp.constrain(a.clone(), Relation::Eq, *b);
        }
        for (a, b) in &self.inequalities {
            lp.constrain(a.clone(), Relation::Le, *b);
        }
        lp
    }
}

pub const MAX_VERTEX_DIM: usize = 12;
const MAX_BASES: u64 = 5_000_000;

/// Every vertex of a bounded polytope, in lexicographic order.
pub fn enumerate_vertices(system: &HalfspaceSystem) -> Result<Vec<Vec<f64>>> {
    let d = system.dim;
    if d > MAX_VERTEX_DIM {
        return Err(Error::SizeLimit(format!(
            "vertex enumeration capped at dimension {MAX_VERTEX_DIM}, got {d}"
        )));
    }
    for (a, _) in system.equalities.iter().chain(&system.inequalities) {
        if a.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len(),
            });
        }
    }
    // boundedness and emptiness
    for j in 0..d {
        for sense in [Sense::Min, Sense::Max] {
            let mut c = vec![0.0; d];
            c[j] = 1.0;
            let sol = solve_lp(&system.as_lp(c, sense))?;
            match sol.status {
                LpStatus::Infeasible => return Ok(Vec::new()),
                LpStatus::Unbounded => {
                    return Err(Error::Unbounded(format!("polytope is unbounded along coordinate {j}")))
                }
                LpStatus::Optimal => {}
            }
        }
    }
    if d == 0 {
        return Ok(vec![Vec::new()]);
    }

    let tol = Tolerances::default();
    let eq_rows: Vec<Vec<f64>> = system.equalities.iter().map(|(a, _)| a.clone()).collect();
    let eq_rank = if eq_rows.is_empty() {
        0
    } else {
        linalg::rank(&Matrix::from_rows(&eq_rows), tol.pivot)
    };
    let k = d.saturating_sub(eq_rank);
    let m = system.inequalities.len();
    if k > m {
        return Ok(Vec::new());
    }
    if binomial(m as u64, k as u64) > MAX_BASES {
        return Err(Error::SizeLimit(format!("C({m}, {k}) candidate bases")));
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        if let Some(v) = solve_active_set(system, &combo, tol.pivot) {
            if system.contains(&v, tol.feasibility)
                && !vertices.iter().any(|w| linalg::dist2(w, &v) <= tol.dedup)
            {
                vertices.push(v);
            }
        }
        if !next_combination(&mut combo, m) {
            break;
        }
    }
    for v in &mut vertices {
        for x in v.iter_mut() {
            if x.abs() < 1e-13 {
                *x = 0.0;
            }
        }
    }
    vertices.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(vertices)
}

fn solve_active_set(system: &HalfspaceSystem, active: &[usize], pivot_tol: f64) -> Option<Vec<f64>> {
    let d = system.dim;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (a, b) in &system.equalities {
        let mut r = a.clone();
        r.push(*b);
        rows.push(r);
    }
    for &i in active {
        let (a, b) = &system.inequalities[i];
        let mut r = a.clone();
        r.push(*b);
        rows.push(r);
    }
    let mut aug = Matrix::from_rows(&rows);
    let pivots = linalg::rref(&mut aug, pivot_tol);
    if pivots.len() != d || pivots.iter().any(|&p| p >= d) {
        return None;
    }
    Some((0..d).map(|i| aug[(i, d)]).collect())
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}
