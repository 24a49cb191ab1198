//! Optimal transport on finite carriers: the Monge–Kantorovich LP and its
//! dual, invariant couplings and potentials, extremality of invariant
//! couplings, and coupling symmetrization.

use serde::Serialize;

use crate::actions::{validate_probability, PointAction};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{enumerate_vertices, solve_lp, HalfspaceSystem, LinearProgram, LpSolution, Relation};

pub const MARGINAL_TOL: f64 = 1e-10;
pub const DUALITY_TOL: f64 = 1e-8;
pub const INVARIANT_GAP_TOL: f64 = 1e-7;
pub const INVARIANCE_TOL: f64 = 1e-9;
const SUPPORT_TOL: f64 = 1e-12;
const NULLSPACE_PIVOT: f64 = 1e-10;

/// A nonnegative cost table over `Ω₁ × Ω₂`.
#[derive(Debug, Clone, Serialize)]
pub struct CostMatrix {
    table: Matrix,
}

impl CostMatrix {
    pub fn new(table: Matrix) -> Result<Self> {
        if table.data().iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidInput("costs must be finite and nonnegative".into()));
        }
        Ok(CostMatrix { table })
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.table.rows(), self.table.cols())
    }

    /// First `(element, i, j)` with `c(φi, φj) ≠ c(i, j)`.
    pub fn diagonal_violation(&self, ax: &PointAction, ay: &PointAction) -> Result<Option<(usize, usize, usize)>> {
        check_actions(self, ax, ay)?;
        for (k, (p, q)) in ax.perms().iter().zip(ay.perms()).enumerate() {
            for i in 0..ax.carrier() {
                for j in 0..ay.carrier() {
                    if self.table[(p.apply(i), q.apply(j))] != self.table[(i, j)] {
                        return Ok(Some((k, i, j)));
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn is_diagonally_invariant(&self, ax: &PointAction, ay: &PointAction) -> Result<bool> {
        Ok(self.diagonal_violation(ax, ay)?.is_none())
    }

    /// `c(φi, ψj) = c(i, j)` for all pairs of elements.
    pub fn is_separately_invariant(&self, ax: &PointAction, ay: &PointAction) -> Result<bool> {
        check_actions(self, ax, ay)?;
        let ix = ax.orbit_ids();
        let iy = ay.orbit_ids();
        let mut class: std::collections::HashMap<(usize, usize), f64> = Default::default();
        for (i, &oi) in ix.iter().enumerate() {
            for (j, &oj) in iy.iter().enumerate() {
                let v = self.table[(i, j)];
                if *class.entry((oi, oj)).or_insert(v) != v {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Σ c(i,j) P(i,j)`.
    pub fn risk(&self, plan: &Matrix) -> f64 {
        linalg::dot(self.table.data(), plan.data())
    }
}

fn check_actions(cost: &CostMatrix, ax: &PointAction, ay: &PointAction) -> Result<()> {
    if ax.group() != ay.group() {
        return Err(Error::InvalidInput("both carriers must carry the same group".into()));
    }
    let (n1, n2) = cost.shape();
    if n1 != ax.carrier() {
        return Err(Error::DimensionMismatch {
            expected: ax.carrier(),
            got: n1,
        });
    }
    if n2 != ay.carrier() {
        return Err(Error::DimensionMismatch {
            expected: ay.carrier(),
            got: n2,
        });
    }
    Ok(())
}

/// Row and column sums of a plan.
pub fn marginals(plan: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let rows = (0..plan.rows()).map(|i| plan.row(i).iter().sum()).collect();
    let cols = (0..plan.cols()).map(|j| (0..plan.rows()).map(|i| plan[(i, j)]).sum()).collect();
    (rows, cols)
}

/// Largest marginal violation of `plan` against `(p1, p2)`.
pub fn marginal_error(plan: &Matrix, p1: &[f64], p2: &[f64]) -> f64 {
    let (r, c) = marginals(plan);
    linalg::dist_inf(&r, p1).max(linalg::dist_inf(&c, p2))
}

#[derive(Debug, Clone, Serialize)]
pub struct DualPotentials {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    /// `min c(i,j) − f₁(i) − f₂(j)`.
    pub margin: f64,
}

impl DualPotentials {
    fn new(cost: &CostMatrix, f1: Vec<f64>, f2: Vec<f64>) -> Self {
        let mut margin = f64::INFINITY;
        for (i, a) in f1.iter().enumerate() {
            for (j, b) in f2.iter().enumerate() {
                margin = margin.min(cost.table[(i, j)] - a - b);
            }
        }
        DualPotentials { f1, f2, margin }
    }

    pub fn value(&self, p1: &[f64], p2: &[f64]) -> f64 {
        linalg::dot(&self.f1, p1) + linalg::dot(&self.f2, p2)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MkSolution {
    pub coupling: Matrix,
    pub potentials: DualPotentials,
    pub primal: f64,
    pub dual: f64,
    pub marginal_error: f64,
    /// Largest `P(i,j) · (c(i,j) − f₁(i) − f₂(j))`.
    pub complementarity: f64,
    pub degenerate: bool,
}

fn check_marginals(p1: &[f64], p2: &[f64]) -> Result<()> {
    let (s1, s2): (f64, f64) = (p1.iter().sum(), p2.iter().sum());
    if (s1 - s2).abs() > 1e-9 {
        return Err(Error::MassMismatch(s1, s2));
    }
    validate_probability(p1)?;
    validate_probability(p2)
}

fn clean_plan(rows: usize, cols: usize, x: &[f64]) -> Matrix {
    Matrix::from_row_major(rows, cols, x.iter().map(|&v| v.max(0.0)).collect())
}

/// Solves the transportation LP for `(c, p1, p2)` with duals as potentials.
pub fn solve_mk(cost: &CostMatrix, p1: &[f64], p2: &[f64]) -> Result<MkSolution> {
    let (n1, n2) = cost.shape();
    if p1.len() != n1 || p2.len() != n2 {
        return Err(Error::DimensionMismatch {
            expected: n1 * n2,
            got: p1.len() * p2.len(),
        });
    }
    check_marginals(p1, p2)?;
    let mut lp = LinearProgram::minimize(cost.table.data().to_vec());
    for i in 0..n1 {
        let mut row = vec![0.0; n1 * n2];
        row[i * n2..(i + 1) * n2].fill(1.0);
        lp.constrain(row, Relation::Eq, p1[i]);
    }
    for j in 0..n2 {
        let mut row = vec![0.0; n1 * n2];
        for i in 0..n1 {
            row[i * n2 + j] = 1.0;
        }
        lp.constrain(row, Relation::Eq, p2[j]);
    }
    let sol = expect_optimal(solve_lp(&lp)?, "transport")?;
    let coupling = clean_plan(n1, n2, &sol.x);
    let potentials = DualPotentials::new(cost, sol.duals[..n1].to_vec(), sol.duals[n1..].to_vec());
    let primal = cost.risk(&coupling);
    let dual = potentials.value(p1, p2);
    let mut complementarity = 0.0_f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let slack = cost.table[(i, j)] - potentials.f1[i] - potentials.f2[j];
            complementarity = complementarity.max((coupling[(i, j)] * slack).abs());
        }
    }
    if potentials.margin < -INVARIANCE_TOL || (primal - dual).abs() > DUALITY_TOL {
        return Err(Error::NumericBreakdown(format!(
            "transport duality check failed: primal {primal}, dual {dual}, margin {:e}",
            potentials.margin
        )));
    }
    Ok(MkSolution {
        marginal_error: marginal_error(&coupling, p1, p2),
        coupling,
        potentials,
        primal,
        dual,
        complementarity,
        degenerate: sol.degenerate,
    })
}

fn expect_optimal(sol: LpSolution, what: &str) -> Result<LpSolution> {
    if sol.is_optimal() {
        Ok(sol)
    } else {
        Err(Error::Infeasible(format!("{what} LP ended {:?}", sol.status)))
    }
}

/// Diagonal-orbit structure of `Ω₁ × Ω₂`.
struct OrbitClasses {
    diag: PointAction,
    n2: usize,
    /// Per diagonal orbit: pair counts with a given first (second) coordinate orbit representative.
    row_counts: Vec<Vec<usize>>,
    col_counts: Vec<Vec<usize>>,
}

impl OrbitClasses {
    fn new(ax: &PointAction, ay: &PointAction) -> Result<Self> {
        let diag = PointAction::diagonal(ax, ay)?;
        let n2 = ay.carrier();
        let rx: Vec<usize> = ax.orbits().iter().map(|o| o[0]).collect();
        let ry: Vec<usize> = ay.orbits().iter().map(|o| o[0]).collect();
        let mut row_counts = Vec::new();
        let mut col_counts = Vec::new();
        for o in diag.orbits() {
            let mut rc = vec![0; rx.len()];
            let mut cc = vec![0; ry.len()];
            for &k in o {
                let (x, y) = (k / n2, k % n2);
                if let Some(a) = rx.iter().position(|&r| r == x) {
                    rc[a] += 1;
                }
                if let Some(b) = ry.iter().position(|&r| r == y) {
                    cc[b] += 1;
                }
            }
            row_counts.push(rc);
            col_counts.push(cc);
        }
        Ok(OrbitClasses {
            diag,
            n2,
            row_counts,
            col_counts,
        })
    }

    fn orbits(&self) -> &[Vec<usize>] {
        self.diag.orbits()
    }

    /// Equality rows `Σ_O m_O · count/|O| = p(rep)` in orbit-mass coordinates.
    fn marginal_rows(&self, ax: &PointAction, ay: &PointAction, p1: &[f64], p2: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let orbits = self.orbits();
        let mut rows = Vec::new();
        for (a, o) in ax.orbits().iter().enumerate() {
            let coeffs = orbits.iter().enumerate().map(|(k, ob)| self.row_counts[k][a] as f64 / ob.len() as f64).collect();
            rows.push((coeffs, p1[o[0]]));
        }
        for (b, o) in ay.orbits().iter().enumerate() {
            let coeffs = orbits.iter().enumerate().map(|(k, ob)| self.col_counts[k][b] as f64 / ob.len() as f64).collect();
            rows.push((coeffs, p2[o[0]]));
        }
        rows
    }

    fn plan(&self, masses: &[f64], n1: usize) -> Matrix {
        let mut plan = Matrix::zeros(n1, self.n2);
        for (o, &m) in self.orbits().iter().zip(masses) {
            let w = m.max(0.0) / o.len() as f64;
            for &k in o {
                plan[(k / self.n2, k % self.n2)] = w;
            }
        }
        plan
    }
}

/// `sup Σ w₁(A) u_A + Σ w₂(B) v_B` over orbit-constant potentials below `c`.
fn invariant_dual(
    cost: &CostMatrix,
    ax: &PointAction,
    ay: &PointAction,
    classes: &OrbitClasses,
    p1: &[f64],
    p2: &[f64],
) -> Result<(DualPotentials, f64)> {
    let na = ax.orbits().len();
    let nb = ay.orbits().len();
    let mut obj = Vec::with_capacity(na + nb);
    for o in ax.orbits() {
        obj.push(linalg::canonical_sum(o.iter().map(|&i| p1[i]).collect()));
    }
    for o in ay.orbits() {
        obj.push(linalg::canonical_sum(o.iter().map(|&j| p2[j]).collect()));
    }
    let mut lp = LinearProgram::maximize(obj);
    for v in 0..na + nb {
        lp.set_free(v);
    }
    let (ix, iy) = (ax.orbit_ids(), ay.orbit_ids());
    for o in classes.orbits() {
        let (x, y) = (o[0] / classes.n2, o[0] % classes.n2);
        let mut row = vec![0.0; na + nb];
        row[ix[x]] += 1.0;
        row[na + iy[y]] += 1.0;
        lp.constrain(row, Relation::Le, cost.table[(x, y)]);
    }
    let sol = expect_optimal(solve_lp(&lp)?, "invariant dual")?;
    let f1 = (0..ax.carrier()).map(|i| sol.x[ix[i]]).collect();
    let f2 = (0..ay.carrier()).map(|j| sol.x[na + iy[j]]).collect();
    let pot = DualPotentials::new(cost, f1, f2);
    let value = pot.value(p1, p2);
    Ok((pot, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalityCertificate {
    /// Nondegenerate optimal basis of the orbit LP.
    Basis,
    /// Trivial solution space of the conditional-expectation system.
    Nullspace,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantMkSolution {
    pub coupling: Matrix,
    pub potentials: DualPotentials,
    /// `min` over all couplings.
    pub primal: f64,
    /// `min` over invariant couplings.
    pub invariant_primal: f64,
    /// `sup` over invariant potentials.
    pub invariant_dual: f64,
    /// Largest pairwise difference of the three values.
    pub gap: f64,
    pub marginal_error: f64,
    pub extreme: bool,
    pub certified_by: ExtremalityCertificate,
    pub unconstrained: MkSolution,
}

fn require_invariant(action: &PointAction, p: &[f64], what: &str) -> Result<()> {
    let d = action.invariance_defect(p);
    if d > INVARIANCE_TOL {
        return Err(Error::NotInvariant(format!("{what} deviates from its orbit means by {d:e}")));
    }
    Ok(())
}

/// Min over `Λ`, min over `Λ_G` and sup over `Γ_G`, with the invariant optimum.
pub fn solve_mk_invariant(
    cost: &CostMatrix,
    p1: &[f64],
    p2: &[f64],
    ax: &PointAction,
    ay: &PointAction,
) -> Result<InvariantMkSolution> {
    if let Some((k, i, j)) = cost.diagonal_violation(ax, ay)? {
        return Err(Error::NotDiagonallyInvariant {
            element: ax.group().elements()?[k].clone(),
            row: i,
            col: j,
        });
    }
    check_marginals(p1, p2)?;
    require_invariant(ax, p1, "first marginal")?;
    require_invariant(ay, p2, "second marginal")?;
    let unconstrained = solve_mk(cost, p1, p2)?;

    let classes = OrbitClasses::new(ax, ay)?;
    let n2 = ay.carrier();
    let obj: Vec<f64> = classes
        .orbits()
        .iter()
        .map(|o| cost.table[(o[0] / n2, o[0] % n2)])
        .collect();
    let mut lp = LinearProgram::minimize(obj);
    for (row, rhs) in classes.marginal_rows(ax, ay, p1, p2) {
        lp.constrain(row, Relation::Eq, rhs);
    }
    let sol = expect_optimal(solve_lp(&lp)?, "invariant transport")?;
    let coupling = classes.plan(&sol.x, ax.carrier());
    let invariant_primal = cost.risk(&coupling);
    let (potentials, invariant_dual) = invariant_dual(cost, ax, ay, &classes, p1, p2)?;
    let values = [unconstrained.primal, invariant_primal, invariant_dual];
    let gap = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let (extreme, certified_by) = if sol.degenerate {
        let r = extremality(&coupling, ax, ay, &classes)?;
        (r.extreme, ExtremalityCertificate::Nullspace)
    } else {
        (true, ExtremalityCertificate::Basis)
    };
    Ok(InvariantMkSolution {
        marginal_error: marginal_error(&coupling, p1, p2),
        coupling,
        potentials,
        primal: unconstrained.primal,
        invariant_primal,
        invariant_dual,
        gap,
        extreme,
        certified_by,
        unconstrained,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalityReport {
    pub extreme: bool,
    /// Diagonal orbits carrying mass.
    pub support_orbits: usize,
    /// Orbit-constant `f` with vanishing conditional expectations, sup norm 1.
    pub witness: Option<Matrix>,
}

/// Extremality of an invariant coupling within the invariant couplings of its marginals.
pub fn is_extreme_invariant_coupling(plan: &Matrix, ax: &PointAction, ay: &PointAction) -> Result<ExtremalityReport> {
    if ax.group() != ay.group() {
        return Err(Error::InvalidInput("both carriers must carry the same group".into()));
    }
    if plan.rows() != ax.carrier() || plan.cols() != ay.carrier() {
        return Err(Error::DimensionMismatch {
            expected: ax.carrier() * ay.carrier(),
            got: plan.rows() * plan.cols(),
        });
    }
    let classes = OrbitClasses::new(ax, ay)?;
    let d = classes.diag.invariance_defect(plan.data());
    if d > INVARIANCE_TOL {
        return Err(Error::NotInvariant(format!("coupling deviates from its orbit means by {d:e}")));
    }
    extremality(plan, ax, ay, &classes)
}

fn extremality(plan: &Matrix, ax: &PointAction, ay: &PointAction, classes: &OrbitClasses) -> Result<ExtremalityReport> {
    let (n1, n2) = (ax.carrier(), ay.carrier());
    let support: Vec<usize> = classes
        .orbits()
        .iter()
        .enumerate()
        .filter(|(_, o)| o.iter().any(|&k| plan.data()[k] > SUPPORT_TOL))
        .map(|(i, _)| i)
        .collect();
    let mut column_of = vec![usize::MAX; n1 * n2];
    for (c, &o) in support.iter().enumerate() {
        for &k in &classes.orbits()[o] {
            column_of[k] = c;
        }
    }
    let (p1, p2) = marginals(plan);
    let mut system = Matrix::zeros(n1 + n2, support.len());
    for x in 0..n1 {
        for y in 0..n2 {
            let c = column_of[x * n2 + y];
            if c == usize::MAX {
                continue;
            }
            let w = plan[(x, y)];
            if p1[x] > 0.0 {
                system[(x, c)] += w / p1[x];
            }
            if p2[y] > 0.0 {
                system[(n1 + y, c)] += w / p2[y];
            }
        }
    }
    let kernel = linalg::nullspace(&system, NULLSPACE_PIVOT);
    let witness = kernel.first().map(|v| {
        let s = linalg::norm_inf(v);
        let lead = v.iter().copied().find(|a| a.abs() > NULLSPACE_PIVOT).unwrap_or(1.0).signum();
        let mut f = Matrix::zeros(n1, n2);
        for k in 0..n1 * n2 {
            if column_of[k] != usize::MAX {
                f[(k / n2, k % n2)] = lead * v[column_of[k]] / s;
            }
        }
        f
    });
    Ok(ExtremalityReport {
        extreme: witness.is_none(),
        support_orbits: support.len(),
        witness,
    })
}

/// All vertices of the invariant coupling polytope of `(p1, p2)`, by enumeration.
pub fn invariant_coupling_vertices(p1: &[f64], p2: &[f64], ax: &PointAction, ay: &PointAction) -> Result<Vec<Matrix>> {
    check_marginals(p1, p2)?;
    let classes = OrbitClasses::new(ax, ay)?;
    let dim = classes.orbits().len();
    let mut sys = HalfspaceSystem::new(dim);
    for (row, rhs) in classes.marginal_rows(ax, ay, p1, p2) {
        sys.eq(row, rhs);
    }
    sys.nonnegative();
    Ok(enumerate_vertices(&sys)?
        .iter()
        .map(|m| classes.plan(m, ax.carrier()))
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizedCoupling {
    pub coupling: Matrix,
    pub was_invariant: bool,
    pub marginal_error: f64,
}

/// Average of `(φ⊗φ)`-pushforwards of a coupling with invariant marginals.
pub fn symmetrize_coupling(plan: &Matrix, ax: &PointAction, ay: &PointAction) -> Result<SymmetrizedCoupling> {
    if ax.group() != ay.group() {
        return Err(Error::InvalidInput("both carriers must carry the same group".into()));
    }
    if plan.rows() != ax.carrier() || plan.cols() != ay.carrier() {
        return Err(Error::DimensionMismatch {
            expected: ax.carrier() * ay.carrier(),
            got: plan.rows() * plan.cols(),
        });
    }
    let (p1, p2) = marginals(plan);
    require_invariant(ax, &p1, "first marginal")?;
    require_invariant(ay, &p2, "second marginal")?;
    let diag = PointAction::diagonal(ax, ay)?;
    let was_invariant = diag.invariance_defect(plan.data()) <= INVARIANCE_TOL;
    let coupling = Matrix::from_row_major(plan.rows(), plan.cols(), diag.reynolds(plan.data())?);
    Ok(SymmetrizedCoupling {
        marginal_error: marginal_error(&coupling, &p1, &p2),
        coupling,
        was_invariant,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxCouplingReport {
    /// `inf` over couplings of `(q1, q2)`.
    pub primal: f64,
    /// `sup` over invariant potentials of `q1(f₁) + q2(f₂)`.
    pub invariant_dual: f64,
    pub gap: f64,
    pub passes: bool,
}

/// Gap between transport of non-invariant marginals and the invariant dual,
/// for separately invariant costs.
pub fn approx_marginal_coupling(
    cost: &CostMatrix,
    q1: &[f64],
    q2: &[f64],
    ax: &PointAction,
    ay: &PointAction,
) -> Result<ApproxCouplingReport> {
    if !cost.is_separately_invariant(ax, ay)? {
        return Err(Error::NotInvariant("cost is not separately invariant".into()));
    }
    let primal = solve_mk(cost, q1, q2)?.primal;
    let classes = OrbitClasses::new(ax, ay)?;
    let (_, invariant_dual) = invariant_dual(cost, ax, ay, &classes, q1, q2)?;
    let gap = (primal - invariant_dual).abs();
    Ok(ApproxCouplingReport {
        primal,
        invariant_dual,
        gap,
        passes: gap <= INVARIANT_GAP_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Group;

    fn natural(spec: &str) -> PointAction {
        PointAction::natural(Group::parse(spec).unwrap()).unwrap()
    }

    fn trivial(m: usize) -> PointAction {
        PointAction::from_fn(Group::trivial(), m, |_, i| i).unwrap()
    }

    fn cost(rows: &[Vec<f64>]) -> CostMatrix {
        CostMatrix::new(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn mk_examples() {
        let zero = cost(&[vec![0.0; 2], vec![0.0; 2]]);
        assert_eq!(solve_mk(&zero, &[0.5, 0.5], &[0.3, 0.7]).unwrap().primal, 0.0);

        let flip = cost(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = solve_mk(&flip, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(s.primal.abs() < 1e-12);
        assert!(s.coupling.max_abs_diff(&Matrix::diag(&[0.5, 0.5])) < 1e-12);
        assert!(s.complementarity < 1e-12);

        let c = cost(&[vec![0.0, 3.0], vec![2.0, 0.0]]);
        let s = solve_mk(&c, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((s.primal - 3.0).abs() < 1e-12);
        assert!((s.dual - 3.0).abs() < 1e-9);
        assert!(s.potentials.margin >= -1e-9);

        assert!(matches!(solve_mk(&c, &[1.0, 0.0], &[0.5, 0.4]), Err(Error::MassMismatch(..))));
    }

    #[test]
    fn invariant_examples() {
        let z3 = natural("cyclic:3");
        let c = CostMatrix::new(Matrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ]))
        .unwrap();
        let u = [1.0 / 3.0; 3];
        let s = solve_mk_invariant(&c, &u, &u, &z3, &z3).unwrap();
        assert!(s.primal.abs() < 1e-12 && s.invariant_primal.abs() < 1e-12 && s.invariant_dual.abs() < 1e-9);
        assert!(s.extreme);

        let t = trivial(2);
        let c2 = cost(&[vec![0.0, 3.0], vec![2.0, 1.0]]);
        let s = solve_mk_invariant(&c2, &[0.4, 0.6], &[0.7, 0.3], &t, &t).unwrap();
        assert!(s.gap < 1e-9);
        assert!((s.invariant_primal - s.unconstrained.primal).abs() < 1e-12);

        let bad = cost(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert!(matches!(
            solve_mk_invariant(&bad, &u, &u, &z3, &z3),
            Err(Error::NotDiagonallyInvariant { .. })
        ));
        assert!(matches!(
            solve_mk_invariant(&c, &[0.5, 0.25, 0.25], &u, &z3, &z3),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn extremality_examples() {
        let t = trivial(2);
        let product = Matrix::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]);
        let r = is_extreme_invariant_coupling(&product, &t, &t).unwrap();
        assert!(!r.extreme);
        let w = r.witness.unwrap();
        assert_eq!(w.data(), &[1.0, -1.0, -1.0, 1.0]);

        let diag = Matrix::diag(&[0.5, 0.5]);
        assert!(is_extreme_invariant_coupling(&diag, &t, &t).unwrap().extreme);

        let z3 = natural("cyclic:3");
        let d3 = Matrix::diag(&[1.0 / 3.0; 3]);
        assert!(is_extreme_invariant_coupling(&d3, &z3, &z3).unwrap().extreme);
        let prod3 = Matrix::from_row_major(3, 3, vec![1.0 / 9.0; 9]);
        assert!(!is_extreme_invariant_coupling(&prod3, &z3, &z3).unwrap().extreme);

        let v = invariant_coupling_vertices(&[0.5, 0.5], &[0.5, 0.5], &t, &t).unwrap();
        assert_eq!(v.len(), 2);
        let v = invariant_coupling_vertices(&[1.0 / 3.0; 3], &[1.0 / 3.0; 3], &z3, &z3).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().any(|m| m.max_abs_diff(&d3) < 1e-12));
    }

    #[test]
    fn symmetrize_examples() {
        let z3 = natural("cyclic:3");
        let third = 1.0 / 3.0;
        let q = Matrix::from_rows(&[vec![0.0, third, 0.0], vec![third, 0.0, 0.0], vec![0.0, 0.0, third]]);
        let s = symmetrize_coupling(&q, &z3, &z3).unwrap();
        assert!(!s.was_invariant);
        assert!(s.coupling.data().iter().all(|&v| (v - 1.0 / 9.0).abs() < 1e-15));
        assert!(s.marginal_error < 1e-15);

        let d3 = Matrix::diag(&[third; 3]);
        let s = symmetrize_coupling(&d3, &z3, &z3).unwrap();
        assert!(s.was_invariant);
        assert_eq!(s.coupling, d3);

        let skew = Matrix::from_rows(&[vec![0.5, 0.0, 0.0], vec![0.0, 0.25, 0.0], vec![0.0, 0.0, 0.25]]);
        assert!(matches!(symmetrize_coupling(&skew, &z3, &z3), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn approx_marginal_examples() {
        let c2 = natural("cyclic:2");
        let ones = cost(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let r = approx_marginal_coupling(&ones, &[0.7, 0.3], &[0.4, 0.6], &c2, &c2).unwrap();
        assert!(r.passes);
        assert!((r.primal - 1.0).abs() < 1e-12);
        let flip = cost(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(approx_marginal_coupling(&flip, &[0.7, 0.3], &[0.4, 0.6], &c2, &c2).is_err());
    }
}
