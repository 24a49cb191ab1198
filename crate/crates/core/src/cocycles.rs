//! Cocycles over finite point actions, the surrogate action they induce on
//! function tables, Θ-averaging, skew-symmetrization and equivariant
//! conditional-probability kernels.
//!
//! Function tables have one row per carrier point and one column per value
//! coordinate. The surrogate action is the left action
//! `Θ(φ, x)(s) = θ(φ, φ⁻¹s) · x(φ⁻¹s)`, which for a simple cocycle reads
//! `θ(φ) · x ∘ φ⁻¹`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::actions::{validate_probability, LinearAction, PointAction};
use crate::error::{Error, Result};
use crate::groups::{Element, Group};
use crate::linalg::{self, Matrix};

pub const COCYCLE_TOL: f64 = 1e-12;
pub const AVERAGE_TOL: f64 = 1e-10;
pub const MAX_SKEW_ARITY: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleKind {
    Identity,
    Sign,
    Equivariance,
    Character,
    Simple,
    General,
}

#[derive(Debug, Clone)]
enum Theta {
    /// One table per group element.
    Simple(Vec<Matrix>),
    /// `[element][carrier point]`.
    General(Vec<Vec<Matrix>>),
}

#[derive(Debug, Clone)]
pub struct Cocycle {
    carrier: PointAction,
    dim: usize,
    kind: CocycleKind,
    theta: Theta,
}

impl Cocycle {
    pub fn identity(carrier: PointAction, dim: usize) -> Result<Self> {
        let n = order(&carrier)?;
        Self::build(carrier, dim, CocycleKind::Identity, Theta::Simple(vec![Matrix::identity(dim); n]))
    }

    /// `θ(σ) = sign(σ) · I`.
    pub fn sign(carrier: PointAction, dim: usize) -> Result<Self> {
        let tables = carrier
            .group()
            .elements()?
            .iter()
            .map(|g| {
                let p = g
                    .as_perm()
                    .ok_or_else(|| Error::InvalidInput("sign cocycle needs permutations".into()))?;
                Ok(Matrix::identity(dim).scale(p.sign() as f64))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(carrier, dim, CocycleKind::Sign, Theta::Simple(tables))
    }

    /// `θ(φ) = χ(φ) · I` for a character `χ` into `{−1, 1}`, listed in element order.
    pub fn character(carrier: PointAction, dim: usize, chi: &[f64]) -> Result<Self> {
        if chi.len() != order(&carrier)? {
            return Err(Error::DimensionMismatch {
                expected: order(&carrier)?,
                got: chi.len(),
            });
        }
        if chi.iter().any(|&c| c != 1.0 && c != -1.0) {
            return Err(Error::CocycleViolation("character values must be ±1".into()));
        }
        let tables = chi.iter().map(|&c| Matrix::identity(dim).scale(c)).collect();
        Self::build(carrier, dim, CocycleKind::Character, Theta::Simple(tables))
    }

    /// `θ(φ) = ρ(φ)` for a linear action on the value space; invariant
    /// tables are then exactly the equivariant maps `x(φs) = ρ(φ) x(s)`.
    pub fn equivariance(carrier: PointAction, target: &LinearAction) -> Result<Self> {
        if target.group() != carrier.group() {
            return Err(Error::InvalidInput("value action must carry the carrier's group".into()));
        }
        let tables = carrier
            .group()
            .elements()?
            .iter()
            .map(|g| target.matrix(g))
            .collect::<Result<Vec<_>>>()?;
        Self::build(carrier, target.dim(), CocycleKind::Equivariance, Theta::Simple(tables))
    }

    /// A simple cocycle from one table per element (a homomorphism into `GL(T)`).
    pub fn simple(carrier: PointAction, tables: Vec<Matrix>) -> Result<Self> {
        let dim = tables.first().map_or(0, |t| t.rows());
        Self::build(carrier, dim, CocycleKind::Simple, Theta::Simple(tables))
    }

    /// A general cocycle `θ(φ, s)`.
    pub fn general<F: Fn(&Element, usize) -> Matrix>(carrier: PointAction, dim: usize, theta: F) -> Result<Self> {
        let m = carrier.carrier();
        let tables = carrier
            .group()
            .elements()?
            .iter()
            .map(|g| (0..m).map(|s| theta(g, s)).collect())
            .collect();
        Self::build(carrier, dim, CocycleKind::General, Theta::General(tables))
    }

    fn build(carrier: PointAction, dim: usize, kind: CocycleKind, theta: Theta) -> Result<Self> {
        let c = Cocycle {
            carrier,
            dim,
            kind,
            theta,
        };
        c.validate()?;
        Ok(c)
    }

    fn table(&self, g: usize, s: usize) -> &Matrix {
        match &self.theta {
            Theta::Simple(t) => &t[g],
            Theta::General(t) => &t[g][s],
        }
    }

    /// Exhaustive check of `θ(ψφ, s) = θ(ψ, φs) θ(φ, s)` and `θ(e, s) = I`.
    fn validate(&self) -> Result<()> {
        let group = self.carrier.group();
        let elements = group.elements()?;
        let m = self.carrier.carrier();
        let points: Vec<usize> = match self.theta {
            Theta::Simple(_) => vec![0],
            Theta::General(_) => (0..m).collect(),
        };
        let n = elements.len();
        let bad_shape = match &self.theta {
            Theta::Simple(t) => t.len() != n || t.iter().any(|a| a.rows() != self.dim || a.cols() != self.dim),
            Theta::General(t) => {
                t.len() != n || t.iter().flatten().any(|a| a.rows() != self.dim || a.cols() != self.dim)
            }
        };
        if bad_shape {
            return Err(Error::CocycleViolation(format!(
                "expected {n} tables of size {0}x{0}",
                self.dim
            )));
        }
        let e = group.index_of(&group.identity()).expect("identity is enumerated");
        let id = Matrix::identity(self.dim);
        for &s in &points {
            if self.table(e, s).max_abs_diff(&id) > COCYCLE_TOL {
                return Err(Error::CocycleViolation(format!("θ(e, {s}) is not the identity")));
            }
        }
        for (a, psi) in elements.iter().enumerate() {
            for (b, phi) in elements.iter().enumerate() {
                let ab = group
                    .index_of(&group.compose(psi, phi)?)
                    .expect("closed under composition");
                let perm = self.carrier.perm(b);
                for &s in &points {
                    let lhs = self.table(ab, s);
                    let rhs = self.table(a, perm.apply(s)).mul(self.table(b, s));
                    if lhs.max_abs_diff(&rhs) > COCYCLE_TOL {
                        return Err(Error::CocycleViolation(format!(
                            "θ({psi}·{phi}, {s}) ≠ θ({psi}, {phi}·{s}) θ({phi}, {s})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> CocycleKind {
        self.kind
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.theta, Theta::Simple(_))
    }

    pub fn carrier(&self) -> &PointAction {
        &self.carrier
    }

    pub fn group(&self) -> &Group {
        self.carrier.group()
    }

    /// Width of the value space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_table(&self, x: &Matrix) -> Result<()> {
        if x.rows() != self.carrier.carrier() || x.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.carrier.carrier() * self.dim,
                got: x.rows() * x.cols(),
            });
        }
        Ok(())
    }

    fn apply_index(&self, g: usize, x: &Matrix) -> Matrix {
        let perm = self.carrier.perm(g);
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for u in 0..x.rows() {
            let v = self.table(g, u).mul_vec(x.row(u));
            let s = perm.apply(u);
            for (k, val) in v.into_iter().enumerate() {
                out[(s, k)] = val;
            }
        }
        out
    }

    /// `Θ(g, x)`.
    pub fn apply(&self, g: &Element, x: &Matrix) -> Result<Matrix> {
        self.check_table(x)?;
        let k = self
            .group()
            .index_of(g)
            .ok_or_else(|| Error::ForeignElement(g.to_string()))?;
        Ok(self.apply_index(k, x))
    }

    /// `max_g ‖Θ(g, x) − x‖∞`.
    pub fn invariance_defect(&self, x: &Matrix) -> Result<f64> {
        self.check_table(x)?;
        let n = order(&self.carrier)?;
        Ok((0..n)
            .map(|k| self.apply_index(k, x).max_abs_diff(x))
            .fold(0.0, f64::max))
    }

    /// Largest `‖Θ(g)Θ(h)x − Θ(gh)x‖∞` over random element pairs and tables.
    pub fn action_defect(&self, probes: usize, seed: u64) -> Result<f64> {
        let group = self.group();
        let elements = group.elements()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..probes {
            let a = rng.gen_range(0..elements.len());
            let b = rng.gen_range(0..elements.len());
            let ab = group
                .index_of(&group.compose(&elements[a], &elements[b])?)
                .expect("closed under composition");
            let x = Matrix::from_row_major(
                self.carrier.carrier(),
                self.dim,
                (0..self.carrier.carrier() * self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let lhs = self.apply_index(a, &self.apply_index(b, &x));
            worst = worst.max(lhs.max_abs_diff(&self.apply_index(ab, &x)));
        }
        Ok(worst)
    }
}

fn order(carrier: &PointAction) -> Result<usize> {
    carrier
        .group()
        .order()
        .ok_or_else(|| Error::NotEnumerable(carrier.group().to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaAverage {
    pub value: Matrix,
    /// `max_g ‖Θ(g, value) − value‖∞`.
    pub defect: f64,
}

/// `(1/|G|) Σ_g Θ(g, x)`, the projector onto θ-invariant tables.
pub fn theta_average(cocycle: &Cocycle, x: &Matrix) -> Result<ThetaAverage> {
    if !cocycle.is_simple() {
        return Err(Error::InvalidInput("averaging requires a simple cocycle".into()));
    }
    cocycle.check_table(x)?;
    let n = order(&cocycle.carrier)?;
    let mut acc = Matrix::zeros(x.rows(), x.cols());
    for k in 0..n {
        acc = acc.add(&cocycle.apply_index(k, x));
    }
    let value = acc.scale(1.0 / n as f64);
    let defect = cocycle.invariance_defect(&value)?;
    if defect > AVERAGE_TOL {
        return Err(Error::NumericBreakdown(format!("θ-average is off by {defect:e}")));
    }
    Ok(ThetaAverage { value, defect })
}

/// Antisymmetric part of a `k`-argument table over `{0..n}`, flattened
/// big-endian: `(1/k!) Σ_σ sign(σ) x∘σ`.
pub fn skew_symmetrize(x: &[f64], n: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > MAX_SKEW_ARITY {
        return Err(Error::SizeLimit(format!("arity {k} outside 1..={MAX_SKEW_ARITY}")));
    }
    let expected = n.pow(k as u32);
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    let carrier = PointAction::on_tuples(Group::symmetric(k)?, n)?;
    let cocycle = Cocycle::sign(carrier, 1)?;
    let table = Matrix::from_row_major(expected, 1, x.to_vec());
    Ok(theta_average(&cocycle, &table)?.value.data().to_vec())
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskCertificate {
    /// `Σ_t P(t) Σ_s η̄(s|t) h(s,t)`.
    pub averaged: f64,
    /// `max_φ Σ_t P(t) Σ_s η(s|t) h(φs, φt)`.
    pub worst_case: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivariantKernel {
    /// Rows indexed by the conditioning point `t`, columns by `s`.
    pub kernel: Matrix,
    /// `max |η̄(φs | φt) − η̄(s | t)|`.
    pub equivariance_defect: f64,
    pub row_sum_error: f64,
    /// Invariance defect of `Σ_t η̄(·|t) P(t)`.
    pub marginal_defect: f64,
    pub risk: Option<RiskCertificate>,
}

pub const RISK_TOL: f64 = 1e-10;

/// Averages a Markov kernel over the diagonal action, `η̄(s|t) = mean_φ η(φs | φt)`.
/// `h`, if given, uses the same layout as `eta`.
pub fn equivariant_kernel(eta: &Matrix, p: &[f64], action: &PointAction, h: Option<&Matrix>) -> Result<EquivariantKernel> {
    let m = action.carrier();
    if eta.rows() != m || eta.cols() != m {
        return Err(Error::DimensionMismatch {
            expected: m * m,
            got: eta.rows() * eta.cols(),
        });
    }
    for t in 0..m {
        validate_probability(eta.row(t)).map_err(|e| Error::InvalidInput(format!("row {t}: {e}")))?;
    }
    if p.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: p.len() });
    }
    validate_probability(p)?;
    let d = action.invariance_defect(p);
    if d > 1e-9 {
        return Err(Error::NotInvariant(format!("P deviates from its orbit means by {d:e}")));
    }
    let diag = PointAction::diagonal(action, action)?;
    let kernel = Matrix::from_row_major(m, m, diag.reynolds(eta.data())?);
    let equivariance_defect = diag.invariance_defect(kernel.data());
    let row_sum_error = (0..m)
        .map(|t| (kernel.row(t).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let marginal: Vec<f64> = (0..m)
        .map(|s| linalg::canonical_sum((0..m).map(|t| kernel[(t, s)] * p[t]).collect()))
        .collect();
    let marginal_defect = action.invariance_defect(&marginal);
    let risk = match h {
        None => None,
        Some(h) => {
            if h.rows() != m || h.cols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m * m,
                    got: h.rows() * h.cols(),
                });
            }
            let integrate = |k: &Matrix, f: &dyn Fn(usize, usize) -> f64| {
                (0..m)
                    .map(|t| p[t] * (0..m).map(|s| k[(t, s)] * f(t, s)).sum::<f64>())
                    .sum::<f64>()
            };
            let averaged = integrate(&kernel, &|t, s| h[(t, s)]);
            let worst_case = action
                .perms()
                .iter()
                .map(|g| integrate(eta, &|t, s| h[(g.apply(t), g.apply(s))]))
                .fold(f64::NEG_INFINITY, f64::max);
            Some(RiskCertificate {
                averaged,
                worst_case,
                holds: averaged <= worst_case + RISK_TOL,
            })
        }
    };
    Ok(EquivariantKernel {
        kernel,
        equivariance_defect,
        row_sum_error,
        marginal_defect,
        risk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2_pairs() -> PointAction {
        PointAction::on_tuples(Group::symmetric(2).unwrap(), 2).unwrap()
    }

    #[test]
    fn builtins_satisfy_identity() {
        let c3 = PointAction::natural(Group::cyclic(3).unwrap()).unwrap();
        Cocycle::identity(c3.clone(), 2).unwrap();
        let rho = LinearAction::permutation(Group::cyclic(3).unwrap()).unwrap();
        let eq = Cocycle::equivariance(c3.clone(), &rho).unwrap();
        assert!(eq.action_defect(20, 1).unwrap() < 1e-15);
        Cocycle::sign(PointAction::on_tuples(Group::symmetric(3).unwrap(), 2).unwrap(), 1).unwrap();
        let c2 = PointAction::natural(Group::cyclic(2).unwrap()).unwrap();
        Cocycle::character(c2.clone(), 1, &[1.0, -1.0]).unwrap();
        assert!(matches!(
            Cocycle::character(c3.clone(), 1, &[1.0, -1.0, -1.0]),
            Err(Error::CocycleViolation(_))
        ));
        // θ(φ, s) = 2 for s = 0 only breaks the identity
        let bad = Cocycle::general(c2, 1, |g, s| {
            let v = if s == 0 && g.as_perm().is_some_and(|p| !p.is_identity()) { 2.0 } else { 1.0 };
            Matrix::diag(&[v])
        });
        assert!(matches!(bad, Err(Error::CocycleViolation(_))));
    }

    #[test]
    fn sign_surrogate_action() {
        let c = Cocycle::sign(s2_pairs(), 1).unwrap();
        // x(a, b) = a over {0,1}², big-endian
        let x = Matrix::from_row_major(4, 1, vec![0.0, 0.0, 1.0, 1.0]);
        let swap = Group::symmetric(2).unwrap().parse_element("(0 1)").unwrap();
        let y = c.apply(&swap, &x).unwrap();
        // −x(b, a) = −b
        assert_eq!(y.data(), &[0.0, -1.0, 0.0, -1.0]);
    }

    #[test]
    fn averages() {
        let c = Cocycle::sign(s2_pairs(), 1).unwrap();
        let sym = Matrix::from_row_major(4, 1, vec![1.0, 2.0, 2.0, 5.0]);
        assert_eq!(theta_average(&c, &sym).unwrap().value.data(), &[0.0; 4]);

        let c3 = PointAction::natural(Group::cyclic(3).unwrap()).unwrap();
        let rho = LinearAction::permutation(Group::cyclic(3).unwrap()).unwrap();
        let eq = Cocycle::equivariance(c3, &rho).unwrap();
        let mut e11 = Matrix::zeros(3, 3);
        e11[(0, 0)] = 1.0;
        let avg = theta_average(&eq, &e11).unwrap();
        assert!(avg.value.max_abs_diff(&Matrix::identity(3).scale(1.0 / 3.0)) < 1e-15);
        let twice = theta_average(&eq, &avg.value).unwrap();
        assert!(twice.value.max_abs_diff(&avg.value) < 1e-12);
    }

    #[test]
    fn skew_examples() {
        // x(a, b) = a + 1 on carrier {1, 2}
        let x = [1.0, 1.0, 2.0, 2.0];
        assert_eq!(skew_symmetrize(&x, 2, 2).unwrap(), vec![0.0, -0.5, 0.5, 0.0]);
        let anti = [0.0, -0.5, 0.5, 0.0];
        assert_eq!(skew_symmetrize(&anti, 2, 2).unwrap(), anti.to_vec());
        assert!(skew_symmetrize(&[1.0; 7], 2, 3).is_err());
        assert!(skew_symmetrize(&[], 1, 7).is_err());
    }

    #[test]
    fn kernel_examples() {
        let c2 = PointAction::natural(Group::cyclic(2).unwrap()).unwrap();
        let eta = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]]);
        let h = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = equivariant_kernel(&eta, &[0.5, 0.5], &c2, Some(&h)).unwrap();
        assert_eq!(r.kernel.data(), &[0.75, 0.25, 0.25, 0.75]);
        assert_eq!(r.equivariance_defect, 0.0);
        assert!(r.risk.unwrap().holds);

        let again = equivariant_kernel(&r.kernel, &[0.5, 0.5], &c2, None).unwrap();
        assert_eq!(again.kernel, r.kernel);

        let triv = PointAction::from_fn(Group::trivial(), 2, |_, i| i).unwrap();
        assert_eq!(equivariant_kernel(&eta, &[0.3, 0.7], &triv, None).unwrap().kernel, eta);

        assert!(matches!(
            equivariant_kernel(&eta, &[0.3, 0.7], &c2, None),
            Err(Error::NotInvariant(_))
        ));
        let bad = Matrix::from_rows(&[vec![0.9, 0.0], vec![0.5, 0.5]]);
        assert!(equivariant_kernel(&bad, &[0.5, 0.5], &c2, None).is_err());
    }
}
