//! Invariant decision problems: maximin tests over finite hypothesis and
//! alternative families, their invariant versions, and minimization of an
//! invariant support function over an invariant polytope.

use serde::Serialize;

use crate::actions::{validate_probability, Action, PointAction};
use crate::averaging::reynolds_apply;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{enumerate_vertices, solve_lp, HalfspaceSystem, LinearProgram, LpStatus, Relation};

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const VALUE_TOL: f64 = 1e-9;
const MEMBER_TOL: f64 = 1e-9;

/// Testing `H` against `A` at level `α` on a finite carrier.
#[derive(Debug, Clone, Serialize)]
pub struct TestingProblem {
    #[serde(skip)]
    action: PointAction,
    pub hypotheses: Vec<Vec<f64>>,
    pub alternatives: Vec<Vec<f64>>,
    pub alpha: f64,
}

fn contains_close(set: &[Vec<f64>], p: &[f64]) -> bool {
    set.iter().any(|q| linalg::dist_inf(q, p) <= MEMBER_TOL)
}

/// Index of a member whose pushforward leaves the set, if any.
fn invariance_witness<A: Action + ?Sized>(action: &A, set: &[Vec<f64>]) -> Result<Option<(usize, String)>> {
    for g in action.group().elements()? {
        for (i, p) in set.iter().enumerate() {
            if !contains_close(set, &action.apply(g, p)?) {
                return Ok(Some((i, g.to_string())));
            }
        }
    }
    Ok(None)
}

impl TestingProblem {
    /// Validates measures, the level, invariance of both families and disjointness.
    pub fn new(action: PointAction, hypotheses: Vec<Vec<f64>>, alternatives: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        let p = Self::allowing_overlap(action, hypotheses, alternatives, alpha)?;
        if let Some(q) = p.hypotheses.iter().find(|q| contains_close(&p.alternatives, q)) {
            return Err(Error::InvalidInput(format!("{q:?} is both a hypothesis and an alternative")));
        }
        Ok(p)
    }

    /// As [`TestingProblem::new`], but `H` and `A` may share members.
    pub fn allowing_overlap(
        action: PointAction,
        hypotheses: Vec<Vec<f64>>,
        alternatives: Vec<Vec<f64>>,
        alpha: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("level {alpha} outside [0, 1]")));
        }
        if hypotheses.is_empty() || alternatives.is_empty() {
            return Err(Error::InvalidInput("H and A must be nonempty".into()));
        }
        let m = action.carrier();
        for p in hypotheses.iter().chain(&alternatives) {
            if p.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: p.len() });
            }
            validate_probability(p)?;
        }
        for (name, set) in [("H", &hypotheses), ("A", &alternatives)] {
            if let Some((i, g)) = invariance_witness(&action, set)? {
                return Err(Error::NotInvariant(format!("{name}[{i}] pushed forward by {g} leaves {name}")));
            }
        }
        Ok(TestingProblem {
            action,
            hypotheses,
            alternatives,
            alpha,
        })
    }

    pub fn action(&self) -> &PointAction {
        &self.action
    }

    /// `min_{P∈A} P(w)`.
    pub fn power(&self, w: &[f64]) -> f64 {
        self.alternatives
            .iter()
            .map(|p| linalg::dot(p, w))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_{Q∈H} Q(w)`.
    pub fn size(&self, w: &[f64]) -> f64 {
        self.hypotheses
            .iter()
            .map(|q| linalg::dot(q, w))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_feasible(&self, w: &[f64]) -> bool {
        w.len() == self.action.carrier()
            && w.iter().all(|&v| (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&v))
            && self.size(w) <= self.alpha + FEASIBILITY_TOL
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximinTest {
    /// Critical function.
    pub w: Vec<f64>,
    pub value: f64,
}

/// `max t` subject to `P(w) ≥ t` on `A`, `Q(w) ≤ α` on `H`, `0 ≤ w ≤ 1`.
pub fn solve_maximin_test(problem: &TestingProblem) -> Result<MaximinTest> {
    let m = problem.action.carrier();
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    for j in 0..m {
        lp.set_bound(j, 0.0, 1.0);
    }
    lp.set_free(m);
    for p in &problem.alternatives {
        let mut row = p.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Ge, 0.0);
    }
    for q in &problem.hypotheses {
        let mut row = q.clone();
        row.push(0.0);
        lp.constrain(row, Relation::Le, problem.alpha);
    }
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible(format!("maximin LP ended {:?}", sol.status)));
    }
    let w: Vec<f64> = sol.x[..m].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(MaximinTest {
        value: problem.power(&w),
        w,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantTest {
    pub w_bar: Vec<f64>,
    /// `min_A P(ŵ)`.
    pub value_hat: f64,
    /// `min_A P(w̄)`.
    pub value_bar: f64,
    /// `max_H Q(w̄)`.
    pub size_bar: f64,
    pub invariance_defect: f64,
    /// `min_φ φP(ŵ) ≤ P(w̄) ≤ max_φ φP(ŵ)` for every member of `H ∪ A`.
    pub sandwich_holds: bool,
}

impl InvariantTest {
    pub fn value_preserved(&self) -> bool {
        (self.value_bar - self.value_hat).abs() <= VALUE_TOL
    }
}

/// Reynolds average of a feasible critical function, with its certificates.
pub fn invariantize_test(problem: &TestingProblem, w_hat: &[f64]) -> Result<InvariantTest> {
    if !problem.is_feasible(w_hat) {
        return Err(Error::Infeasible("critical function violates the box or the level".into()));
    }
    let action = &problem.action;
    let w_bar = action.reynolds(w_hat)?;
    let mut sandwich_holds = true;
    for p in problem.hypotheses.iter().chain(&problem.alternatives) {
        let mid = linalg::dot(p, &w_bar);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for g in action.group().elements()? {
            let v = linalg::dot(&action.apply(g, p)?, w_hat);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        sandwich_holds &= lo - VALUE_TOL <= mid && mid <= hi + VALUE_TOL;
    }
    let result = InvariantTest {
        value_hat: problem.power(w_hat),
        value_bar: problem.power(&w_bar),
        size_bar: problem.size(&w_bar),
        invariance_defect: action.invariance_defect(&w_bar),
        sandwich_holds,
        w_bar,
    };
    if !problem.is_feasible(&result.w_bar) {
        return Err(Error::NumericBreakdown("averaged critical function is infeasible".into()));
    }
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportMinimization {
    pub y_hat: Vec<f64>,
    pub value_hat: f64,
    pub y_bar: Vec<f64>,
    pub value_bar: f64,
    pub y_bar_feasible: bool,
    /// `−H(−x | Π(ŷ)) ≤ ⟨x, ȳ⟩ ≤ H(x | Π(ŷ))` for every `x ∈ E`.
    pub bracket_holds: bool,
}

impl SupportMinimization {
    pub fn passes(&self) -> bool {
        self.y_bar_feasible && self.bracket_holds && (self.value_bar - self.value_hat).abs() <= VALUE_TOL
    }
}

/// `max_{x∈E} ⟨x, y⟩`.
pub fn support_value(e: &[Vec<f64>], y: &[f64]) -> f64 {
    e.iter().map(|x| linalg::dot(x, y)).fold(f64::NEG_INFINITY, f64::max)
}

/// Minimizes `H(y | E)` over a polytope `F`, for a finite invariant `E` and an
/// invariant `F`, and averages the minimizer.
pub fn minimize_support_function<A: Action + ?Sized>(
    e: &[Vec<f64>],
    f: &HalfspaceSystem,
    action: &A,
) -> Result<SupportMinimization> {
    let d = action.dim();
    if f.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim });
    }
    if e.is_empty() {
        return Err(Error::InvalidInput("E must be nonempty".into()));
    }
    for x in e {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
    }
    if let Some((i, g)) = invariance_witness(action, e)? {
        return Err(Error::NotInvariant(format!("E[{i}] moved by {g} leaves E")));
    }
    let vertices = enumerate_vertices(f)?;
    if vertices.is_empty() {
        return Err(Error::Infeasible("feasible polytope is empty".into()));
    }
    if let Some((i, g)) = invariance_witness(action, &vertices)? {
        return Err(Error::NotInvariant(format!("vertex {i} of F moved by {g} leaves F")));
    }

    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let mut lp = LinearProgram::minimize(obj);
    for j in 0..=d {
        lp.set_free(j);
    }
    for x in e {
        let mut row = x.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Le, 0.0);
    }
    for (a, b) in &f.equalities {
        let mut row = a.clone();
        row.push(0.0);
        lp.constrain(row, Relation::Eq, *b);
    }
    for (a, b) in &f.inequalities {
        let mut row = a.clone();
        row.push(0.0);
        lp.constrain(row, Relation::Le, *b);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("feasible polytope is empty".into())),
        LpStatus::Unbounded => return Err(Error::Unbounded("support function is unbounded below".into())),
    }
    let y_hat = sol.x[..d].to_vec();
    let y_bar = reynolds_apply(action, &y_hat)?;
    let mut bracket_holds = true;
    let orbit: Vec<Vec<f64>> = action
        .group()
        .elements()?
        .iter()
        .map(|g| action.apply(g, &y_hat))
        .collect::<Result<_>>()?;
    for x in e {
        let v = linalg::dot(x, &y_bar);
        let hi = support_value(&orbit, x);
        let lo = orbit.iter().map(|y| linalg::dot(x, y)).fold(f64::INFINITY, f64::min);
        bracket_holds &= lo - VALUE_TOL <= v && v <= hi + VALUE_TOL;
    }
    Ok(SupportMinimization {
        value_hat: support_value(e, &y_hat),
        value_bar: support_value(e, &y_bar),
        y_bar_feasible: f.contains(&y_bar, FEASIBILITY_TOL),
        y_hat,
        y_bar,
        bracket_holds,
    })
}
