//! Orbitopes `Π(x0) = conv{g·x0}`: LP membership with separating
//! functionals, support functions, invariant elements, invariant
//! minimization, point-mass probatopes and Minkowski combinations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::actions::{Action, LinearAction, PointAction};
use crate::averaging::{ergodic_limit, reynolds_apply};
use crate::error::{Error, Result};
use crate::groups::Element;
use crate::linalg;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation};

/// An enumerated orbit together with the action that produced it.
#[derive(Debug, Clone)]
pub struct OrbitopeHandle<A: Action> {
    action: A,
    generator: Vec<f64>,
    points: Vec<Vec<f64>>,
    elements: Vec<Element>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Membership {
    /// Convex weights over the orbit points and `‖Σλᵢvᵢ − z‖∞`.
    Inside { weights: Vec<f64>, residual: f64 },
    /// `⟨z, y⟩ − maxᵢ⟨vᵢ, y⟩ = margin > tol`, with `‖y‖∞ = 1`.
    Outside { functional: Vec<f64>, margin: f64 },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

/// Convex-hull membership of `z` over `points` by a phase-one LP.
pub fn hull_membership(points: &[Vec<f64>], z: &[f64], tol: f64) -> Result<Membership> {
    let d = z.len();
    let k = points.len();
    if k == 0 {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
    }
    let mut lp = LinearProgram::minimize(vec![0.0; k]);
    for r in 0..d {
        lp.constrain(points.iter().map(|p| p[r]).collect(), Relation::Eq, z[r]);
    }
    lp.constrain(vec![1.0; k], Relation::Eq, 1.0);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut combo = vec![0.0; d];
            for (p, &w) in points.iter().zip(&sol.x) {
                linalg::axpy(w, p, &mut combo);
            }
            Ok(Membership::Inside {
                residual: linalg::dist_inf(&combo, z),
                weights: sol.x,
            })
        }
        LpStatus::Infeasible => {
            let ray = sol.farkas.unwrap_or_default();
            let mut y: Vec<f64> = ray.iter().take(d).copied().collect();
            if y.len() == d {
                if let Some(m) = separation_margin(points, z, &mut y) {
                    if m > tol {
                        return Ok(Membership::Outside { functional: y, margin: m });
                    }
                }
            }
            let (y, m) = separating_lp(points, z)?;
            if m > tol {
                Ok(Membership::Outside { functional: y, margin: m })
            } else {
                Err(Error::NumericBreakdown(format!(
                    "point is within {m:e} of the hull but the feasibility LP reports it outside"
                )))
            }
        }
        LpStatus::Unbounded => unreachable!("feasibility LP has a zero objective"),
    }
}

/// Normalizes `y` to unit sup norm and returns `⟨z,y⟩ − max⟨vᵢ,y⟩`.
fn separation_margin(points: &[Vec<f64>], z: &[f64], y: &mut [f64]) -> Option<f64> {
    let s = linalg::norm_inf(y);
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    for v in y.iter_mut() {
        *v /= s;
    }
    let best = points.iter().map(|p| linalg::dot(p, y)).fold(f64::NEG_INFINITY, f64::max);
    Some(linalg::dot(z, y) - best)
}

/// `max ⟨z,y⟩ − t` over `‖y‖∞ ≤ 1` with `⟨vᵢ,y⟩ ≤ t`.
fn separating_lp(points: &[Vec<f64>], z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = z.len();
    let mut obj = z.to_vec();
    obj.push(-1.0);
    let mut lp = LinearProgram::maximize(obj);
    for j in 0..d {
        lp.set_bound(j, -1.0, 1.0);
    }
    lp.set_free(d);
    for p in points {
        let mut row = p.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Le, 0.0);
    }
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::NumericBreakdown("separation LP did not reach an optimum".into()));
    }
    let mut y = sol.x[..d].to_vec();
    let m = separation_margin(points, z, &mut y).unwrap_or(0.0);
    Ok((y, m))
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportValue {
    pub value: f64,
    /// Index of the first maximizing orbit point.
    pub argmax: usize,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantElement {
    pub value: Vec<f64>,
    pub invariance_defect: f64,
    pub membership: Membership,
    /// For orthogonal actions: largest `‖R vᵢ − x̄‖∞` over orbit points; zero
    /// means `x̄` is the only invariant point of the orbitope.
    pub projection_spread: Option<f64>,
}

/// What [`OrbitopeHandle::minimize`] minimizes.
pub enum Objective<'a> {
    /// `z ↦ ⟨c, z⟩`.
    Linear(Vec<f64>),
    /// A convex function, evaluated on a barycentric grid.
    BlackBox(&'a dyn Fn(&[f64]) -> f64),
}

impl Objective<'_> {
    fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Objective::Linear(c) => linalg::dot(c, z),
            Objective::BlackBox(f) => f(z),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeReport {
    pub minimum: f64,
    pub minimizer: Vec<f64>,
    /// Reynolds average of the minimizer.
    pub invariant_minimizer: Vec<f64>,
    pub invariant_value: f64,
    /// `|minimum − invariant_value|`.
    pub gap: f64,
    pub evaluations: usize,
}

const MAX_GRID_POINTS: u64 = 200_000;
const INVARIANCE_TOL: f64 = 1e-9;

impl<A: Action + Clone> OrbitopeHandle<A> {
    /// Enumerates the orbit of `x0`: the whole group if finite, else `window`.
    pub fn new(action: A, x0: Vec<f64>, window: Option<usize>) -> Result<Self> {
        if x0.len() != action.dim() {
            return Err(Error::DimensionMismatch {
                expected: action.dim(),
                got: x0.len(),
            });
        }
        let group = action.group().clone();
        let elements: Vec<Element> = if group.is_finite() {
            group.elements()?.to_vec()
        } else {
            let n = window.ok_or_else(|| Error::NotEnumerable(group.to_string()))?;
            group.family().window(n)?
        };
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut producers = Vec::new();
        for g in elements {
            let v = action.apply(&g, &x0)?;
            if points.iter().all(|p| linalg::dist2(p, &v) > 1e-9) {
                points.push(v);
                producers.push(g);
            }
        }
        Ok(OrbitopeHandle {
            action,
            generator: x0,
            points,
            elements: producers,
        })
    }

    pub fn action(&self) -> &A {
        &self.action
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    /// Distinct orbit points, in the order their producing elements are enumerated.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// The element that produced each orbit point.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn membership(&self, z: &[f64], tol: f64) -> Result<Membership> {
        if z.len() != self.generator.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generator.len(),
                got: z.len(),
            });
        }
        hull_membership(&self.points, z, tol)
    }

    /// `H(y | Π(x0)) = maxᵢ ⟨vᵢ, y⟩`.
    pub fn support_function(&self, y: &[f64]) -> Result<SupportValue> {
        if y.len() != self.generator.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generator.len(),
                got: y.len(),
            });
        }
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let v = linalg::dot(p, y);
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(SupportValue {
            value: best.1,
            argmax: best.0,
            point: self.points[best.0].clone(),
        })
    }

    /// `x̄ = R x0` for finite groups, with membership and invariance checks.
    pub fn invariant_element(&self) -> Result<InvariantElement> {
        let xbar = reynolds_apply(&self.action, &self.generator)?;
        self.certify_invariant(xbar)
    }

    fn certify_invariant(&self, xbar: Vec<f64>) -> Result<InvariantElement> {
        let invariance_defect = crate::averaging::invariance_defect(&self.action, &xbar)?;
        let membership = self.membership(&xbar, 1e-9)?;
        let projection_spread = if self.action.is_orthogonal() && self.action.group().is_finite() {
            let mut spread = 0.0_f64;
            for p in &self.points {
                spread = spread.max(linalg::dist_inf(&reynolds_apply(&self.action, p)?, &xbar));
            }
            Some(spread)
        } else {
            None
        };
        Ok(InvariantElement {
            value: xbar,
            invariance_defect,
            membership,
            projection_spread,
        })
    }

    fn check_invariance(&self, f: &Objective) -> Result<()> {
        let probes = self.action.group().probes();
        let mut samples: Vec<Vec<f64>> = self.points.clone();
        let k = self.points.len().min(12);
        for i in 0..k {
            for j in (i + 1)..k {
                samples.push(
                    self.points[i]
                        .iter()
                        .zip(&self.points[j])
                        .map(|(a, b)| 0.5 * (a + b))
                        .collect(),
                );
            }
        }
        for (idx, z) in samples.iter().enumerate() {
            let fz = f.eval(z);
            for g in &probes {
                let fg = f.eval(&self.action.apply(g, z)?);
                let dev = (fg - fz).abs();
                if dev > INVARIANCE_TOL * (1.0 + fz.abs()) {
                    return Err(Error::NonInvariantObjective {
                        element: g.clone(),
                        point: idx,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }

    /// Minimizes a convex invariant objective over `Π(x0)` and compares the
    /// result with the value at the invariant minimizer.
    pub fn minimize(&self, f: &Objective, resolution: usize) -> Result<MinimizeReport> {
        self.check_invariance(f)?;
        let d = self.generator.len();
        let k = self.points.len();
        let combine = |w: &[f64]| {
            let mut z = vec![0.0; d];
            for (p, &c) in self.points.iter().zip(w) {
                if c != 0.0 {
                    linalg::axpy(c, p, &mut z);
                }
            }
            z
        };
        let (weights, evaluations) = match f {
            Objective::Linear(c) => {
                let obj: Vec<f64> = self.points.iter().map(|p| linalg::dot(p, c)).collect();
                let mut lp = LinearProgram::minimize(obj);
                lp.constrain(vec![1.0; k], Relation::Eq, 1.0);
                let sol = solve_lp(&lp)?;
                (sol.x, 1)
            }
            Objective::BlackBox(_) => grid_search(k, resolution.max(1), |w| f.eval(&combine(w))),
        };
        let minimizer = combine(&weights);
        let minimum = f.eval(&minimizer);
        let invariant_minimizer = if self.action.group().is_finite() {
            reynolds_apply(&self.action, &minimizer)?
        } else {
            minimizer.clone()
        };
        let invariant_value = f.eval(&invariant_minimizer);
        let (minimum, minimizer) = if invariant_value < minimum {
            (invariant_value, invariant_minimizer.clone())
        } else {
            (minimum, minimizer)
        };
        Ok(MinimizeReport {
            gap: (minimum - invariant_value).abs(),
            minimum,
            minimizer,
            invariant_minimizer,
            invariant_value,
            evaluations,
        })
    }
}

impl OrbitopeHandle<LinearAction> {
    /// Invariant element of a windowed orthogonal action via its ergodic limit.
    pub fn invariant_element_windowed(&self, tol: f64, n_max: usize) -> Result<InvariantElement> {
        let family = self.action.group().family();
        let rep = ergodic_limit(&self.action, &family, &self.generator, tol, n_max)?;
        self.certify_invariant(rep.limit)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Barycentric grid search over the simplex on `k` vertices followed by a
/// pairwise mass-transfer refinement. Returns weights and the evaluation count.
fn grid_search<F: Fn(&[f64]) -> f64>(k: usize, m: usize, f: F) -> (Vec<f64>, usize) {
    let mut best_w = vec![0.0; k];
    best_w[0] = 1.0;
    let mut best = f(&best_w);
    let mut evals = 1usize;
    let consider = |w: &[f64], best: &mut f64, best_w: &mut Vec<f64>, evals: &mut usize| {
        let v = f(w);
        *evals += 1;
        if v < *best {
            *best = v;
            best_w.copy_from_slice(w);
        }
    };
    if binomial((m + k - 1) as u64, (k - 1) as u64) <= MAX_GRID_POINTS {
        // all compositions of m into k parts
        let mut parts = vec![0usize; k];
        parts[k - 1] = m;
        loop {
            let w: Vec<f64> = parts.iter().map(|&p| p as f64 / m as f64).collect();
            consider(&w, &mut best, &mut best_w, &mut evals);
            if !next_composition(&mut parts) {
                break;
            }
        }
    } else {
        // vertices, edges at resolution m, and the barycenter
        for i in 0..k {
            for j in (i + 1)..k {
                for s in 0..=m {
                    let mut w = vec![0.0; k];
                    w[i] = s as f64 / m as f64;
                    w[j] = 1.0 - w[i];
                    consider(&w, &mut best, &mut best_w, &mut evals);
                }
            }
        }
        let w = vec![1.0 / k as f64; k];
        consider(&w, &mut best, &mut best_w, &mut evals);
    }
    // refinement: move mass between pairs of vertices with shrinking steps
    let mut step = 1.0 / (2 * m) as f64;
    while step >= 1.0 / (64 * m) as f64 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..k {
                for j in 0..k {
                    if i == j || best_w[i] <= 0.0 {
                        continue;
                    }
                    let delta = step.min(best_w[i]);
                    let mut w = best_w.clone();
                    w[i] -= delta;
                    w[j] += delta;
                    let v = f(&w);
                    evals += 1;
                    if v < best - 1e-15 {
                        best = v;
                        best_w = w;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    (best_w, evals)
}

/// Advances `parts` to the next composition of its sum (colex order).
fn next_composition(parts: &mut [usize]) -> bool {
    let k = parts.len();
    // find the rightmost nonzero part that is not the first
    let Some(j) = (1..k).rev().find(|&j| parts[j] > 0) else {
        return false;
    };
    let moved = parts[j];
    parts[j] = 0;
    parts[j - 1] += 1;
    parts[k - 1] += moved - 1;
    true
}

/// `z` is majorized by `lambda`: equal sums and dominated partial sums of the
/// decreasing rearrangements. Oracle for permutation orbitopes.
pub fn majorizes(lambda: &[f64], z: &[f64], tol: f64) -> bool {
    if lambda.len() != z.len() {
        return false;
    }
    let mut a = lambda.to_vec();
    let mut b = z.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let (mut sa, mut sb) = (0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sa += x;
        sb += y;
        if sb > sa + tol {
            return false;
        }
    }
    (sa - sb).abs() <= tol
}

/// `Π(δ_ω)` for a point action: all measures supported on the orbit of `ω`.
#[derive(Debug, Clone)]
pub struct PointMassProbatope {
    pub point: usize,
    pub orbit: Vec<usize>,
    handle: OrbitopeHandle<PointAction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbatopeCheck {
    pub by_support: bool,
    pub by_lp: bool,
}

pub fn probatope_pointmass(action: &PointAction, omega: usize) -> Result<PointMassProbatope> {
    let m = action.carrier();
    if omega >= m {
        return Err(Error::InvalidInput(format!("carrier point {omega} out of range")));
    }
    let mut delta = vec![0.0; m];
    delta[omega] = 1.0;
    let handle = OrbitopeHandle::new(action.clone(), delta, None)?;
    let orbit = action.orbit_of(omega).to_vec();
    let probatope = PointMassProbatope {
        point: omega,
        orbit,
        handle,
    };
    // extreme points: each δ_z lies outside the hull of the others
    for (i, p) in probatope.handle.points.iter().enumerate() {
        let others: Vec<Vec<f64>> = probatope
            .handle
            .points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        if !others.is_empty() && hull_membership(&others, p, 1e-9)?.is_inside() {
            return Err(Error::NumericBreakdown("a point mass is not extreme".into()));
        }
    }
    Ok(probatope)
}

impl PointMassProbatope {
    /// Point masses `δ_z`, `z` in the orbit.
    pub fn extreme_points(&self) -> &[Vec<f64>] {
        self.handle.points()
    }

    /// Membership by the support rule: a probability vector supported on the orbit.
    pub fn contains(&self, p: &[f64]) -> bool {
        crate::actions::validate_probability(p).is_ok()
            && p.iter()
                .enumerate()
                .all(|(i, &w)| w <= 1e-12 || self.orbit.binary_search(&i).is_ok())
    }

    /// Support rule and LP membership side by side.
    pub fn cross_check(&self, p: &[f64]) -> Result<ProbatopeCheck> {
        Ok(ProbatopeCheck {
            by_support: self.contains(p),
            by_lp: self.handle.membership(p, 1e-9)?.is_inside(),
        })
    }

    /// Face property: if a proper mixture `t p + (1−t) q` lies in `Π(δ_ω)`,
    /// so do `p` and `q`. Returns whether the implication holds for this pair.
    pub fn face_test(&self, p: &[f64], q: &[f64], t: f64) -> Result<bool> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput("mixture weight must lie in (0, 1)".into()));
        }
        let mix: Vec<f64> = p.iter().zip(q).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        if !self.handle.membership(&mix, 1e-9)?.is_inside() {
            return Ok(true);
        }
        Ok(self.handle.membership(p, 1e-9)?.is_inside() && self.handle.membership(q, 1e-9)?.is_inside())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiReport {
    /// Samples of `Π(Σcᵢxᵢ)` found in `Σcᵢ Π(xᵢ)`.
    pub forward_ok: usize,
    pub forward_total: usize,
    /// Samples of `Σcᵢ Π(xᵢ)` found in `Π(Σcᵢxᵢ)`.
    pub reverse_ok: usize,
    pub reverse_total: usize,
    /// First reverse-direction sample outside `Π(Σcᵢxᵢ)`.
    pub reverse_counterexample: Option<Vec<f64>>,
}

impl MinkowskiReport {
    pub fn forward_holds(&self) -> bool {
        self.forward_ok == self.forward_total
    }

    pub fn reverse_holds(&self) -> bool {
        self.reverse_ok == self.reverse_total
    }

    pub fn passes(&self) -> bool {
        self.forward_holds() && self.reverse_holds()
    }
}

/// Membership in the Minkowski combination `Σ cᵢ conv(Vᵢ)`.
fn minkowski_membership(sets: &[&[Vec<f64>]], weights: &[f64], z: &[f64]) -> Result<bool> {
    let d = z.len();
    let nvars: usize = sets.iter().map(|s| s.len()).sum();
    let mut lp = LinearProgram::minimize(vec![0.0; nvars]);
    for r in 0..d {
        let mut row = Vec::with_capacity(nvars);
        for (s, &c) in sets.iter().zip(weights) {
            row.extend(s.iter().map(|p| c * p[r]));
        }
        lp.constrain(row, Relation::Eq, z[r]);
    }
    let mut offset = 0;
    for s in sets {
        let mut row = vec![0.0; nvars];
        for v in &mut row[offset..offset + s.len()] {
            *v = 1.0;
        }
        offset += s.len();
        lp.constrain(row, Relation::Eq, 1.0);
    }
    Ok(solve_lp(&lp)?.is_optimal())
}

fn random_convex(points: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = points.iter().map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    let mut z = vec![0.0; points[0].len()];
    for (p, c) in points.iter().zip(&w) {
        linalg::axpy(c / s, p, &mut z);
    }
    z
}

/// Checks `Π(Σcᵢxᵢ) = Σcᵢ Π(xᵢ)` in both directions on orbit-vertex
/// combinations and `samples` random points per direction.
pub fn minkowski_check<A: Action + Clone>(
    handles: &[OrbitopeHandle<A>],
    weights: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MinkowskiReport> {
    if handles.is_empty() || handles.len() != weights.len() {
        return Err(Error::InvalidInput("need one weight per orbitope".into()));
    }
    if weights.iter().any(|&c| c < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("weights must be nonnegative and sum to 1".into()));
    }
    let d = handles[0].generator.len();
    let mut x = vec![0.0; d];
    for (h, &c) in handles.iter().zip(weights) {
        if h.action.group() != handles[0].action.group() || h.generator.len() != d {
            return Err(Error::InvalidInput("orbitopes must share one action".into()));
        }
        linalg::axpy(c, &h.generator, &mut x);
    }
    let combined = OrbitopeHandle::new(handles[0].action.clone(), x, None)?;
    let sets: Vec<&[Vec<f64>]> = handles.iter().map(|h| h.points.as_slice()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut forward: Vec<Vec<f64>> = combined.points.clone();
    for _ in 0..samples {
        forward.push(random_convex(&combined.points, &mut rng));
    }
    let mut forward_ok = 0;
    for z in &forward {
        if minkowski_membership(&sets, weights, z)? {
            forward_ok += 1;
        }
    }

    // vertex combinations, capped, then random combinations
    let mut reverse: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; handles.len()];
    'outer: loop {
        let mut z = vec![0.0; d];
        for ((h, &i), &c) in handles.iter().zip(&idx).zip(weights) {
            linalg::axpy(c, &h.points[i], &mut z);
        }
        reverse.push(z);
        if reverse.len() >= 256 {
            break;
        }
        for t in 0..idx.len() {
            idx[t] += 1;
            if idx[t] < handles[t].points.len() {
                continue 'outer;
            }
            idx[t] = 0;
        }
        break;
    }
    for _ in 0..samples {
        let mut z = vec![0.0; d];
        for (h, &c) in handles.iter().zip(weights) {
            linalg::axpy(c, &random_convex(&h.points, &mut rng), &mut z);
        }
        reverse.push(z);
    }
    let mut reverse_ok = 0;
    let mut counterexample = None;
    for z in &reverse {
        if combined.membership(z, 1e-9)?.is_inside() {
            reverse_ok += 1;
        } else if counterexample.is_none() {
            counterexample = Some(z.clone());
        }
    }
    Ok(MinkowskiReport {
        forward_ok,
        forward_total: forward.len(),
        reverse_ok,
        reverse_total: reverse.len(),
        reverse_counterexample: counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Group;

    fn bits() -> PointAction {
        PointAction::on_tuples(Group::symmetric(2).unwrap(), 2).unwrap()
    }

    fn swap() -> LinearAction {
        LinearAction::permutation(Group::cyclic(2).unwrap()).unwrap()
    }

    #[test]
    fn bernoulli_orbitope_membership() {
        // carrier order 00, 01, 10, 11
        let h = OrbitopeHandle::new(bits(), vec![0.0, 1.0, 0.0, 0.0], None).unwrap();
        assert!(h.membership(&[0.0, 0.5, 0.5, 0.0], 1e-9).unwrap().is_inside());
        match h.membership(&[1.0, 0.0, 0.0, 0.0], 1e-9).unwrap() {
            Membership::Outside { functional, margin } => {
                assert!(margin > 1e-9);
                let zy = functional[0];
                let best = h.points().iter().map(|p| linalg::dot(p, &functional)).fold(f64::MIN, f64::max);
                assert!(zy > best + 1e-9);
            }
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn generator_has_unit_weight() {
        let h = OrbitopeHandle::new(swap(), vec![0.3, 0.9], None).unwrap();
        match h.membership(&[0.3, 0.9], 1e-9).unwrap() {
            Membership::Inside { weights, .. } => assert_eq!(weights, vec![1.0, 0.0]),
            m => panic!("{m:?}"),
        }
    }

    #[test]
    fn permutohedron_membership() {
        let a = LinearAction::permutation(Group::symmetric(3).unwrap()).unwrap();
        let h = OrbitopeHandle::new(a, vec![2.0, 1.0, 0.0], None).unwrap();
        assert!(h.membership(&[1.0, 1.0, 1.0], 1e-9).unwrap().is_inside());
        assert!(!h.membership(&[2.5, 0.5, 0.0], 1e-9).unwrap().is_inside());
        assert!(majorizes(&[2.0, 1.0, 0.0], &[1.0, 1.0, 1.0], 1e-12));
        assert!(!majorizes(&[2.0, 1.0, 0.0], &[2.5, 0.5, 0.0], 1e-12));
    }

    #[test]
    fn support_function_examples() {
        let h = OrbitopeHandle::new(swap(), vec![1.0, 0.0], None).unwrap();
        let s = h.support_function(&[0.0, 1.0]).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.point, vec![0.0, 1.0]);
        assert_eq!(h.support_function(&[0.0, 0.0]).unwrap().value, 0.0);
    }

    #[test]
    fn invariant_elements() {
        let h = OrbitopeHandle::new(swap(), vec![3.0, 1.0], None).unwrap();
        let e = h.invariant_element().unwrap();
        assert_eq!(e.value, vec![2.0, 2.0]);
        assert!(e.membership.is_inside());
        assert!(e.projection_spread.unwrap() < 1e-12);

        let a = LinearAction::permutation(Group::symmetric(3).unwrap()).unwrap();
        let h = OrbitopeHandle::new(a, vec![2.0, 1.0, 0.0], None).unwrap();
        let e = h.invariant_element().unwrap();
        assert!(linalg::dist_inf(&e.value, &[1.0, 1.0, 1.0]) < 1e-15);

        let h = OrbitopeHandle::new(swap(), vec![1.0, 1.0], None).unwrap();
        assert_eq!(h.invariant_element().unwrap().value, vec![1.0, 1.0]);
    }

    #[test]
    fn minimize_max_over_segment() {
        let h = OrbitopeHandle::new(swap(), vec![1.0, 0.0], None).unwrap();
        let f = |z: &[f64]| z[0].max(z[1]);
        let r = h.minimize(&Objective::BlackBox(&f), 32).unwrap();
        assert!((r.minimum - 0.5).abs() < 1e-12);
        assert!(linalg::dist_inf(&r.minimizer, &[0.5, 0.5]) < 1e-12);
        assert!(r.gap < 1e-12);

        let r = h.minimize(&Objective::Linear(vec![1.0, 1.0]), 32).unwrap();
        assert!((r.minimum - 1.0).abs() < 1e-12);

        let bad = |z: &[f64]| z[0];
        assert!(matches!(
            h.minimize(&Objective::BlackBox(&bad), 32),
            Err(Error::NonInvariantObjective { .. })
        ));

        let t = OrbitopeHandle::new(
            LinearAction::permutation(Group::trivial()).unwrap(),
            vec![4.0],
            None,
        )
        .unwrap();
        let sq = |z: &[f64]| z[0] * z[0];
        assert_eq!(t.minimize(&Objective::BlackBox(&sq), 32).unwrap().minimum, 16.0);
    }

    #[test]
    fn grid_covers_simplex() {
        let (w, evals) = grid_search(3, 4, |w| (w[0] - 0.25).powi(2) + (w[1] - 0.5).powi(2));
        assert!(evals >= 15);
        assert!((w[0] - 0.25).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn point_mass_probatopes() {
        let p = probatope_pointmass(&bits(), 1).unwrap();
        assert_eq!(p.orbit, vec![1, 2]);
        let half = [0.0, 0.5, 0.5, 0.0];
        assert!(p.contains(&half));
        assert!(!p.contains(&[1.0, 0.0, 0.0, 0.0]));
        let c = p.cross_check(&half).unwrap();
        assert!(c.by_support && c.by_lp);
        assert!(p.face_test(&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], 0.5).unwrap());

        let triv = PointAction::natural(Group::parse("product(trivial,trivial)").unwrap()).unwrap();
        let p = probatope_pointmass(&triv, 0).unwrap();
        assert_eq!(p.extreme_points(), &[vec![1.0, 0.0]]);

        let c3 = PointAction::natural(Group::cyclic(3).unwrap()).unwrap();
        let p = probatope_pointmass(&c3, 0).unwrap();
        let c = p.cross_check(&[0.2, 0.3, 0.5]).unwrap();
        assert!(c.by_support && c.by_lp);
    }

    #[test]
    fn minkowski_combinations() {
        let h1 = OrbitopeHandle::new(bits(), vec![0.0, 1.0, 0.0, 0.0], None).unwrap();
        let h0 = OrbitopeHandle::new(bits(), vec![1.0, 0.0, 0.0, 0.0], None).unwrap();
        let r = minkowski_check(&[h1.clone(), h0], &[0.5, 0.5], 20, 3).unwrap();
        assert!(r.passes(), "{r:?}");
        let r = minkowski_check(&[h1], &[1.0], 20, 3).unwrap();
        assert!(r.passes());

        // the reverse inclusion fails once both orbitopes are non-trivial
        let a = OrbitopeHandle::new(swap(), vec![1.0, 0.0], None).unwrap();
        let b = OrbitopeHandle::new(swap(), vec![0.0, 1.0], None).unwrap();
        let r = minkowski_check(&[a, b], &[0.5, 0.5], 10, 3).unwrap();
        assert!(r.forward_holds());
        assert!(!r.reverse_holds());
        // ½(0,1) + ½(0,1) is not in Π((½,½)) = {(½,½)}
        assert_eq!(r.reverse_counterexample, Some(vec![0.0, 1.0]));
    }
}
