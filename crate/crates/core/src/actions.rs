//! Group actions: linear actions on `R^d`, permutation actions on finite
//! carriers with their induced function and measure actions, dual actions
//! and the fixed space `X_G`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groups::{compose_unchecked, Element, Group, GroupKind, Perm};
use crate::linalg::{self, Matrix};

const ORTHOGONAL_TOL: f64 = 1e-10;
const HOMOMORPHISM_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-10;
const EXHAUSTIVE_PAIRS: usize = 40_000;
const SAMPLED_PAIRS: usize = 2_000;
const PROBE_SEED: u64 = 0x5eed_f01e;
/// Largest dimension accepted by [`invariant_subspace_basis`].
pub const MAX_BASIS_DIM: usize = 512;

/// Anything that moves vectors of a fixed length around.
pub trait Action {
    fn group(&self) -> &Group;
    fn dim(&self) -> usize;
    /// `g · x`.
    fn apply(&self, g: &Element, x: &[f64]) -> Result<Vec<f64>>;
    fn is_orthogonal(&self) -> bool;
    /// The underlying carrier permutation action, if any.
    fn point_action(&self) -> Option<&PointAction> {
        None
    }
}

#[derive(Debug, Clone)]
enum Representation {
    /// One table per element of a finite group, in canonical element order.
    Tables(Arc<Vec<Matrix>>),
    /// Natural permutation action of a permutation group: `ρ(g) e_j = e_{g(j)}`.
    Permutation,
    /// `Z^d`: commuting generator tables and their inverses.
    Lattice { gens: Vec<Matrix>, invs: Vec<Matrix> },
    /// Heisenberg: `ρ(a,b,c) = Z^c Y^b X^a`; tables and inverses for X, Y, Z.
    Heisenberg { gens: [Matrix; 3], invs: [Matrix; 3] },
}

/// A linear representation `g ↦ ρ(g)` on `R^dim`.
#[derive(Debug, Clone)]
pub struct LinearAction {
    group: Group,
    dim: usize,
    rep: Representation,
    orthogonal: bool,
}

fn is_orthogonal_table(m: &Matrix) -> bool {
    m.transpose().mul(m).max_abs_diff(&Matrix::identity(m.rows())) <= ORTHOGONAL_TOL
}

fn check_square(m: &Matrix, dim: usize) -> Result<()> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if m.rows() != dim { m.rows() } else { m.cols() },
        });
    }
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite representation entry".into()));
    }
    Ok(())
}

fn invert(m: &Matrix, what: &dyn std::fmt::Display) -> Result<Matrix> {
    m.inverse(1e-12).ok_or_else(|| Error::SingularTable(what.to_string()))
}

fn power(m: &Matrix, inv: &Matrix, k: i64) -> Matrix {
    if k >= 0 {
        m.pow(k as u64)
    } else {
        inv.pow(k.unsigned_abs())
    }
}

fn close(a: &Matrix, b: &Matrix, scale: f64) -> bool {
    a.max_abs_diff(b) <= HOMOMORPHISM_TOL * scale.max(1.0)
}

/// Index pairs to check a homomorphism on: all of them when cheap, else a seeded sample.
fn probe_pairs(n: usize) -> Vec<(usize, usize)> {
    if n * n <= EXHAUSTIVE_PAIRS {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        (0..SAMPLED_PAIRS).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    }
}

impl LinearAction {
    /// One table per element of a finite group, in [`Group::elements`] order.
    pub fn from_tables(group: Group, tables: Vec<Matrix>) -> Result<Self> {
        let els = group.elements()?;
        if tables.len() != els.len() {
            return Err(Error::DimensionMismatch {
                expected: els.len(),
                got: tables.len(),
            });
        }
        let dim = tables.first().map_or(0, Matrix::rows);
        for (t, g) in tables.iter().zip(els) {
            check_square(t, dim)?;
            invert(t, g)?;
        }
        if tables[0].max_abs_diff(&Matrix::identity(dim)) > HOMOMORPHISM_TOL {
            return Err(Error::NotHomomorphism("identity is not mapped to the identity table".into()));
        }
        for (a, b) in probe_pairs(els.len()) {
            let ab = group
                .index_of(&compose_unchecked(&els[a], &els[b]))
                .expect("finite group is closed");
            let prod = tables[a].mul(&tables[b]);
            if !close(&prod, &tables[ab], tables[a].max_abs() * tables[b].max_abs()) {
                return Err(Error::NotHomomorphism(format!(
                    "ρ({})ρ({}) differs from ρ({}) by {:e}",
                    els[a],
                    els[b],
                    els[ab],
                    prod.max_abs_diff(&tables[ab])
                )));
            }
        }
        let orthogonal = tables.iter().all(is_orthogonal_table);
        Ok(LinearAction {
            group,
            dim,
            rep: Representation::Tables(Arc::new(tables)),
            orthogonal,
        })
    }

    /// Extends tables given on [`Group::generators`] to the whole finite group.
    pub fn from_generator_tables(group: Group, gen_tables: Vec<Matrix>) -> Result<Self> {
        let gens = group.generators()?;
        if gens.len() != gen_tables.len() {
            return Err(Error::DimensionMismatch {
                expected: gens.len(),
                got: gen_tables.len(),
            });
        }
        let els = group.elements()?;
        let dim = match gen_tables.first() {
            Some(t) => t.rows(),
            None => {
                return Err(Error::InvalidInput(
                    "group has no generators; give tables for every element".into(),
                ))
            }
        };
        for t in &gen_tables {
            check_square(t, dim)?;
        }
        let mut tables: Vec<Option<Matrix>> = vec![None; els.len()];
        tables[0] = Some(Matrix::identity(dim));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            let te = tables[e].clone().expect("visited");
            for (g, tg) in gens.iter().zip(&gen_tables) {
                let ge = group.index_of(&compose_unchecked(g, &els[e])).expect("closed");
                if tables[ge].is_none() {
                    tables[ge] = Some(tg.mul(&te));
                    queue.push_back(ge);
                }
            }
        }
        let tables = tables.into_iter().map(|t| t.expect("generators span the group")).collect();
        Self::from_tables(group, tables)
    }

    /// `ρ(g)` given as a closure over the elements of a finite group.
    pub fn from_fn<F: Fn(&Element) -> Matrix>(group: Group, f: F) -> Result<Self> {
        let tables = group.elements()?.iter().map(f).collect();
        Self::from_tables(group, tables)
    }

    /// The defining permutation representation of a permutation group.
    pub fn permutation(group: Group) -> Result<Self> {
        let dim = match group.kind() {
            GroupKind::Finite { degree } => degree,
            GroupKind::FinitarySymmetric { n } => n,
            _ => return Err(Error::InvalidInput(format!("`{group}` is not a permutation group"))),
        };
        Ok(LinearAction {
            group,
            dim,
            rep: Representation::Permutation,
            orthogonal: true,
        })
    }

    /// `Z^d` acting through commuting invertible tables, one per coordinate.
    pub fn lattice(group: Group, gens: Vec<Matrix>) -> Result<Self> {
        let GroupKind::Lattice { dim: d } = group.kind() else {
            return Err(Error::InvalidInput(format!("`{group}` is not a lattice group")));
        };
        if gens.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: gens.len(),
            });
        }
        let dim = gens[0].rows();
        let mut invs = Vec::with_capacity(d);
        for (i, g) in gens.iter().enumerate() {
            check_square(g, dim)?;
            invs.push(invert(g, &format!("generator {i}"))?);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let scale = gens[i].max_abs() * gens[j].max_abs();
                if !close(&gens[i].mul(&gens[j]), &gens[j].mul(&gens[i]), scale) {
                    return Err(Error::NotHomomorphism(format!("generators {i} and {j} do not commute")));
                }
            }
        }
        let orthogonal = gens.iter().all(is_orthogonal_table);
        Ok(LinearAction {
            group,
            dim,
            rep: Representation::Lattice { gens, invs },
            orthogonal,
        })
    }

    /// `Z` acting on `R^2` by rotation through `angle` radians.
    pub fn rotation(angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let r = Matrix::from_rows(&[vec![c, -s], vec![s, c]]);
        Self::lattice(Group::parse("z:box")?, vec![r])
    }

    /// Heisenberg group through tables for `X = (1,0,0)`, `Y = (0,1,0)`,
    /// `Z = (0,0,1)`; requires `XY = ZYX` with `Z` central.
    pub fn heisenberg(group: Group, x: Matrix, y: Matrix, z: Matrix) -> Result<Self> {
        if group.kind() != GroupKind::Heisenberg {
            return Err(Error::InvalidInput(format!("`{group}` is not the Heisenberg group")));
        }
        let dim = x.rows();
        for m in [&x, &y, &z] {
            check_square(m, dim)?;
        }
        let scale = x.max_abs() * y.max_abs() * z.max_abs().max(1.0);
        if !close(&x.mul(&y), &z.mul(&y).mul(&x), scale) {
            return Err(Error::NotHomomorphism("XY differs from ZYX".into()));
        }
        if !close(&z.mul(&x), &x.mul(&z), scale) || !close(&z.mul(&y), &y.mul(&z), scale) {
            return Err(Error::NotHomomorphism("Z is not central".into()));
        }
        let invs = [invert(&x, &"X")?, invert(&y, &"Y")?, invert(&z, &"Z")?];
        let orthogonal = [&x, &y, &z].into_iter().all(is_orthogonal_table);
        Ok(LinearAction {
            group,
            dim,
            rep: Representation::Heisenberg { gens: [x, y, z], invs },
            orthogonal,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// `ρ(g)` as a table.
    pub fn matrix(&self, g: &Element) -> Result<Matrix> {
        self.group.check(g)?;
        Ok(match (&self.rep, g) {
            (Representation::Tables(t), _) => t[self.group.index_of(g).expect("checked")].clone(),
            (Representation::Permutation, Element::Perm(p)) => {
                let mut m = Matrix::zeros(self.dim, self.dim);
                for j in 0..self.dim {
                    m[(p.apply(j), j)] = 1.0;
                }
                m
            }
            (Representation::Lattice { gens, invs }, Element::Lattice(v)) => {
                let mut m = Matrix::identity(self.dim);
                for (i, &k) in v.iter().enumerate() {
                    m = m.mul(&power(&gens[i], &invs[i], k));
                }
                m
            }
            (Representation::Heisenberg { gens, invs }, Element::Heisenberg([a, b, c])) => power(&gens[2], &invs[2], *c)
                .mul(&power(&gens[1], &invs[1], *b))
                .mul(&power(&gens[0], &invs[0], *a)),
            _ => return Err(Error::ForeignElement(g.to_string())),
        })
    }

    /// Dual action `g ↦ (ρ(g)⁻¹)ᵀ`, verified on seeded pairing probes.
    pub fn dual(&self) -> Result<LinearAction> {
        let dual_of = |m: &Matrix, what: &dyn std::fmt::Display| -> Result<Matrix> { Ok(invert(m, what)?.transpose()) };
        let rep = match &self.rep {
            Representation::Tables(t) => {
                let els = self.group.elements()?;
                Representation::Tables(Arc::new(
                    t.iter().zip(els).map(|(m, g)| dual_of(m, g)).collect::<Result<_>>()?,
                ))
            }
            Representation::Permutation => Representation::Permutation,
            Representation::Lattice { gens, invs } => Representation::Lattice {
                gens: invs.iter().map(Matrix::transpose).collect(),
                invs: gens.iter().map(Matrix::transpose).collect(),
            },
            Representation::Heisenberg { gens, invs } => Representation::Heisenberg {
                gens: [invs[0].transpose(), invs[1].transpose(), invs[2].transpose()],
                invs: [gens[0].transpose(), gens[1].transpose(), gens[2].transpose()],
            },
        };
        let dual = LinearAction {
            group: self.group.clone(),
            dim: self.dim,
            rep,
            orthogonal: self.orthogonal,
        };
        let defect = pairing_defect(self, &dual, 100, PROBE_SEED)?;
        if defect > PAIRING_TOL {
            return Err(Error::NumericBreakdown(format!(
                "dual pairing probe off by {defect:e}"
            )));
        }
        Ok(dual)
    }

    /// The carrier permutations of a permutation-type action, for finite groups.
    pub fn to_point_action(&self) -> Option<PointAction> {
        match self.rep {
            Representation::Permutation if self.group.is_finite() => PointAction::natural(self.group.clone()).ok(),
            _ => None,
        }
    }
}

/// Largest relative pairing error `|⟨ρx, ρ*y⟩ − ⟨x, y⟩|` over seeded probes.
pub fn pairing_defect(action: &LinearAction, dual: &LinearAction, probes: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = match action.group.elements() {
        Ok(e) => e.to_vec(),
        Err(_) => {
            let mut p = action.group.probes();
            p.push(action.group.identity());
            p
        }
    };
    let d = action.dim;
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let g = elements.choose(&mut rng).expect("nonempty group");
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gx = action.apply(g, &x)?;
        let gy = dual.apply(g, &y)?;
        let scale = (linalg::norm2(&gx) * linalg::norm2(&gy)).max(1.0);
        worst = worst.max((linalg::dot(&gx, &gy) - linalg::dot(&x, &y)).abs() / scale);
    }
    Ok(worst)
}

impl Action for LinearAction {
    fn group(&self) -> &Group {
        &self.group
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, g: &Element, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let (Representation::Permutation, Element::Perm(p)) = (&self.rep, g) {
            self.group.check(g)?;
            let mut out = vec![0.0; self.dim];
            for (j, &v) in x.iter().enumerate() {
                out[p.apply(j)] = v;
            }
            return Ok(out);
        }
        Ok(self.matrix(g)?.mul_vec(x))
    }

    fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }
}

/// A finite group permuting the carrier `0..m`.
#[derive(Debug, Clone)]
pub struct PointAction {
    group: Group,
    carrier: usize,
    /// Carrier permutation per group element, in canonical element order.
    perms: Arc<Vec<Perm>>,
    orbit_id: Arc<Vec<usize>>,
    orbits: Arc<Vec<Vec<usize>>>,
}

impl PointAction {
    /// Builds an action from per-element carrier permutations (canonical element order).
    pub fn from_perms(group: Group, carrier: usize, perms: Vec<Perm>) -> Result<Self> {
        let els = group.elements()?;
        if perms.len() != els.len() {
            return Err(Error::DimensionMismatch {
                expected: els.len(),
                got: perms.len(),
            });
        }
        for p in &perms {
            if p.degree() != carrier {
                return Err(Error::DimensionMismatch {
                    expected: carrier,
                    got: p.degree(),
                });
            }
        }
        if !perms[0].is_identity() {
            return Err(Error::NotHomomorphism("identity does not fix the carrier".into()));
        }
        for (a, b) in probe_pairs(els.len()) {
            let ab = group.index_of(&compose_unchecked(&els[a], &els[b])).expect("closed");
            if perms[a].compose(&perms[b]) != perms[ab] {
                return Err(Error::NotHomomorphism(format!(
                    "carrier maps of {} and {} do not compose to {}",
                    els[a], els[b], els[ab]
                )));
            }
        }
        let (orbit_id, orbits) = orbit_partition(carrier, &perms);
        Ok(PointAction {
            group,
            carrier,
            perms: Arc::new(perms),
            orbit_id: Arc::new(orbit_id),
            orbits: Arc::new(orbits),
        })
    }

    /// `g ↦ (i ↦ f(g, i))` for each element of a finite group.
    pub fn from_fn<F: Fn(&Element, usize) -> usize>(group: Group, carrier: usize, f: F) -> Result<Self> {
        let perms = group
            .elements()?
            .iter()
            .map(|g| Perm::from_images((0..carrier).map(|i| f(g, i)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_perms(group, carrier, perms)
    }

    /// A finite permutation group acting on its own points.
    pub fn natural(group: Group) -> Result<Self> {
        let GroupKind::Finite { degree } = group.kind() else {
            return Err(Error::NotEnumerable(group.to_string()));
        };
        let perms = group
            .elements()?
            .iter()
            .map(|g| g.as_perm().expect("finite groups are permutation groups").clone())
            .collect();
        Self::from_perms(group, degree, perms)
    }

    /// A permutation group of degree `k` acting on tuples in `{0..base}^k` by
    /// moving coordinates: `(g ω)_{g(j)} = ω_j`. Tuples are indexed in
    /// big-endian base-`base` order.
    pub fn on_tuples(group: Group, base: usize) -> Result<Self> {
        let GroupKind::Finite { degree: k } = group.kind() else {
            return Err(Error::NotEnumerable(group.to_string()));
        };
        let carrier = base
            .checked_pow(k as u32)
            .filter(|&m| m <= 1 << 20)
            .ok_or_else(|| Error::SizeLimit(format!("{base}^{k} tuples")))?;
        Self::from_fn(group, carrier, |g, idx| {
            let p = g.as_perm().expect("permutation group");
            let digits = tuple_digits(idx, base, k);
            let mut out = vec![0; k];
            for (j, &d) in digits.iter().enumerate() {
                out[p.apply(j)] = d;
            }
            tuple_index(&out, base)
        })
    }

    /// The diagonal action `g(i, j) = (g i, g j)` on `Ω₁ × Ω₂`, indexed `i * m₂ + j`.
    pub fn diagonal(a: &PointAction, b: &PointAction) -> Result<Self> {
        if a.group != b.group {
            return Err(Error::InvalidInput("diagonal action needs a shared group".into()));
        }
        let m2 = b.carrier;
        let perms = a
            .perms
            .iter()
            .zip(b.perms.iter())
            .map(|(p, q)| {
                Perm::from_images(
                    (0..a.carrier * m2)
                        .map(|idx| p.apply(idx / m2) * m2 + q.apply(idx % m2))
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_perms(a.group.clone(), a.carrier * m2, perms)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    /// Carrier permutation of the `k`-th group element.
    pub fn perm(&self, k: usize) -> &Perm {
        &self.perms[k]
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn perm_of(&self, g: &Element) -> Result<&Perm> {
        let k = self.group.index_of(g).ok_or_else(|| Error::ForeignElement(g.to_string()))?;
        Ok(&self.perms[k])
    }

    /// `g · i` on the carrier.
    pub fn image(&self, g: &Element, i: usize) -> Result<usize> {
        if i >= self.carrier {
            return Err(Error::InvalidInput(format!("carrier point {i} out of range")));
        }
        Ok(self.perm_of(g)?.apply(i))
    }

    /// Orbits in order of their smallest point, each sorted.
    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    /// Index into [`PointAction::orbits`] for every carrier point.
    pub fn orbit_ids(&self) -> &[usize] {
        &self.orbit_id
    }

    pub fn orbit_of(&self, i: usize) -> &[usize] {
        &self.orbits[self.orbit_id[i]]
    }

    /// `f` is constant on orbits, within `tol`.
    pub fn is_invariant(&self, f: &[f64], tol: f64) -> bool {
        f.len() == self.carrier
            && self.orbits.iter().all(|o| {
                let first = f[o[0]];
                o.iter().all(|&i| (f[i] - first).abs() <= tol)
            })
    }

    /// Largest change `max_g ‖g·f − f‖∞`.
    pub fn invariance_defect(&self, f: &[f64]) -> f64 {
        self.orbits
            .iter()
            .map(|o| {
                let (lo, hi) = o
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(f[i]), hi.max(f[i])));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Full-group average of a function or measure table: orbit means,
    /// summed in sorted order so the result is exactly constant on orbits.
    pub fn reynolds(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.carrier {
            return Err(Error::DimensionMismatch {
                expected: self.carrier,
                got: f.len(),
            });
        }
        let mut out = vec![0.0; self.carrier];
        for o in self.orbits.iter() {
            let mean = linalg::canonical_sum(o.iter().map(|&i| f[i]).collect()) / o.len() as f64;
            for &i in o {
                out[i] = mean;
            }
        }
        Ok(out)
    }

    /// The Reynolds table of the function/measure action.
    pub fn reynolds_matrix(&self) -> Matrix {
        let mut r = Matrix::zeros(self.carrier, self.carrier);
        for o in self.orbits.iter() {
            let w = 1.0 / o.len() as f64;
            for &i in o {
                for &j in o {
                    r[(i, j)] = w;
                }
            }
        }
        r
    }

    /// The linear action on function tables.
    pub fn to_linear(&self) -> LinearAction {
        let tables = self
            .perms
            .iter()
            .map(|p| {
                let mut m = Matrix::zeros(self.carrier, self.carrier);
                for j in 0..self.carrier {
                    m[(p.apply(j), j)] = 1.0;
                }
                m
            })
            .collect();
        LinearAction {
            group: self.group.clone(),
            dim: self.carrier,
            rep: Representation::Tables(Arc::new(tables)),
            orthogonal: true,
        }
    }
}

fn orbit_partition(carrier: usize, perms: &[Perm]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut id = vec![usize::MAX; carrier];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for start in 0..carrier {
        if id[start] != usize::MAX {
            continue;
        }
        let k = orbits.len();
        let mut members = vec![start];
        id[start] = k;
        let mut head = 0;
        while head < members.len() {
            let i = members[head];
            head += 1;
            for p in perms {
                let j = p.apply(i);
                if id[j] == usize::MAX {
                    id[j] = k;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    (id, orbits)
}

pub fn tuple_digits(mut idx: usize, base: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for j in (0..k).rev() {
        d[j] = idx % base;
        idx /= base;
    }
    d
}

pub fn tuple_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

fn check_probability(p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::NotProbability("negative or NaN weight".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotProbability(format!("weights sum to {total}")));
    }
    Ok(())
}

pub(crate) fn validate_probability(p: &[f64]) -> Result<()> {
    check_probability(p)
}

impl Action for PointAction {
    fn group(&self) -> &Group {
        &self.group
    }

    fn dim(&self) -> usize {
        self.carrier
    }

    /// `(g·h)(j) = h(g⁻¹ j)`, which is both `h ∘ g⁻¹` and the pushforward of weights.
    fn apply(&self, g: &Element, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.carrier {
            return Err(Error::DimensionMismatch {
                expected: self.carrier,
                got: x.len(),
            });
        }
        let p = self.perm_of(g)?;
        let mut out = vec![0.0; self.carrier];
        for (j, &v) in x.iter().enumerate() {
            out[p.apply(j)] = v;
        }
        Ok(out)
    }

    fn is_orthogonal(&self) -> bool {
        true
    }

    fn point_action(&self) -> Option<&PointAction> {
        Some(self)
    }
}

/// How a target vector is interpreted by [`act`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Vector,
    /// A function table on the carrier; returns `h ∘ g⁻¹`.
    Function,
    /// Probability weights on the carrier; returns the pushforward.
    Measure,
}

/// `g` applied to `target` under the given interpretation.
pub fn act<A: Action + ?Sized>(action: &A, g: &Element, target: &[f64], mode: Mode) -> Result<Vec<f64>> {
    match mode {
        Mode::Vector => action.apply(g, target),
        Mode::Function | Mode::Measure => {
            let pa = action
                .point_action()
                .ok_or_else(|| Error::InvalidInput("function and measure modes need a carrier action".into()))?;
            if mode == Mode::Measure {
                if target.len() != pa.carrier() {
                    return Err(Error::DimensionMismatch {
                        expected: pa.carrier(),
                        got: target.len(),
                    });
                }
                check_probability(target)?;
            }
            pa.apply(g, target)
        }
    }
}

/// The orbit of a carrier point, sorted.
pub fn orbit_points(action: &PointAction, i: usize) -> Result<Vec<usize>> {
    if i >= action.carrier() {
        return Err(Error::InvalidInput(format!("carrier point {i} out of range")));
    }
    Ok(action.orbit_of(i).to_vec())
}

/// The orbit of a vector with Euclidean deduplication at 1e-9, in the order
/// elements are enumerated. Windowed groups need a window index.
pub fn orbit_vectors<A: Action + ?Sized>(action: &A, x: &[f64], window: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let group = action.group();
    let elements: Vec<Element> = if group.is_finite() {
        group.elements()?.to_vec()
    } else {
        let n = window.ok_or_else(|| Error::NotEnumerable(group.to_string()))?;
        group.family().window(n)?
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut exact: HashSet<Vec<u64>> = HashSet::new();
    for g in &elements {
        let v = action.apply(g, x)?;
        let key: Vec<u64> = v.iter().map(|t| (t + 0.0).to_bits()).collect();
        if !exact.insert(key) {
            continue;
        }
        if out.iter().any(|w| linalg::dist2(w, &v) <= 1e-9) {
            continue;
        }
        out.push(v);
    }
    Ok(out)
}

/// Orthonormal basis of the fixed space `{x : ρ(g)x = x ∀g}` of a finite-group action.
///
/// The basis spans the range of the Reynolds projector `R`, read off by
/// Gram–Schmidt on the columns of `R`; for symmetric `R` its dimension is
/// cross-checked against the multiplicity of eigenvalue 1.
pub fn invariant_subspace_basis(action: &LinearAction) -> Result<Vec<Vec<f64>>> {
    let d = action.dim();
    if d > MAX_BASIS_DIM {
        return Err(Error::SizeLimit(format!("dimension {d} exceeds {MAX_BASIS_DIM}")));
    }
    let r = crate::averaging::reynolds_projector(action)?;
    let cols: Vec<Vec<f64>> = (0..d).map(|j| r.column(j)).collect();
    let basis = linalg::orthonormalize(&cols, 1e-9);
    if r.is_symmetric(1e-12) {
        let eig = linalg::jacobi_eigen(&r, 1e-14, 100);
        let ones = eig.values.iter().filter(|v| (*v - 1.0).abs() <= 1e-9).count();
        if ones != basis.len() {
            return Err(Error::NumericBreakdown(format!(
                "fixed space has {} basis vectors but eigenvalue 1 has multiplicity {ones}",
                basis.len()
            )));
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_action() -> LinearAction {
        LinearAction::permutation(Group::cyclic(2).unwrap()).unwrap()
    }

    #[test]
    fn point_mass_pushforward_and_relabeling() {
        let pa = PointAction::natural(Group::cyclic(2).unwrap()).unwrap();
        let swap = pa.group().elements().unwrap()[1].clone();
        assert_eq!(act(&pa, &swap, &[1.0, 0.0], Mode::Measure).unwrap(), vec![0.0, 1.0]);
        assert_eq!(act(&pa, &swap, &[3.0, 7.0], Mode::Function).unwrap(), vec![7.0, 3.0]);
        assert!(matches!(
            act(&pa, &swap, &[0.5, 0.6], Mode::Measure),
            Err(Error::NotProbability(_))
        ));
    }

    #[test]
    fn rotation_by_one_radian() {
        let a = LinearAction::rotation(1.0).unwrap();
        let y = a.apply(&Element::lattice(&[1]), &[1.0, 0.0]).unwrap();
        assert!((y[0] - 1f64.cos()).abs() < 1e-15);
        assert!((y[1] - 1f64.sin()).abs() < 1e-15);
        assert!(a.is_orthogonal());
    }

    #[test]
    fn dual_of_orthogonal_is_itself() {
        let a = LinearAction::permutation(Group::parse("sym:3").unwrap()).unwrap();
        let d = a.dual().unwrap();
        for g in a.group().elements().unwrap() {
            assert_eq!(a.matrix(g).unwrap(), d.matrix(g).unwrap());
        }
    }

    #[test]
    fn dual_of_scaling_involution() {
        let g = Group::cyclic(2).unwrap();
        let s = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.5, 0.0]]);
        let a = LinearAction::from_tables(g.clone(), vec![Matrix::identity(2), s]).unwrap();
        assert!(!a.is_orthogonal());
        let d = a.dual().unwrap();
        let h = &g.elements().unwrap()[1];
        let expect = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.5, 0.0]]).inverse(1e-12).unwrap().transpose();
        assert!(d.matrix(h).unwrap().max_abs_diff(&expect) < 1e-15);
        assert!(pairing_defect(&a, &d, 100, 1).unwrap() < 1e-12);
    }

    #[test]
    fn non_homomorphism_rejected() {
        let g = Group::cyclic(2).unwrap();
        let bad = Matrix::diag(&[2.0, 0.5]);
        assert!(matches!(
            LinearAction::from_tables(g, vec![Matrix::identity(2), bad]),
            Err(Error::NotHomomorphism(_))
        ));
    }

    #[test]
    fn singular_table_rejected() {
        let g = Group::cyclic(2).unwrap();
        let z = Matrix::zeros(2, 2);
        assert!(matches!(
            LinearAction::from_tables(g, vec![Matrix::identity(2), z]),
            Err(Error::SingularTable(_))
        ));
    }

    #[test]
    fn fixed_spaces() {
        let b = invariant_subspace_basis(&swap_action()).unwrap();
        let s = 0.5f64.sqrt();
        assert_eq!(b.len(), 1);
        assert!((b[0][0] - s).abs() < 1e-12 && (b[0][1] - s).abs() < 1e-12);

        let t = LinearAction::permutation(Group::parse("product(trivial,product(trivial,trivial))").unwrap()).unwrap();
        let b = invariant_subspace_basis(&t).unwrap();
        assert_eq!(b, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);

        let c3 = LinearAction::permutation(Group::cyclic(3).unwrap()).unwrap();
        let b = invariant_subspace_basis(&c3).unwrap();
        assert_eq!(b.len(), 1);
        let ns = linalg::nullspace(
            &c3.matrix(&c3.group().elements().unwrap()[1]).unwrap().sub(&Matrix::identity(3)),
            1e-10,
        );
        let oracle = linalg::orthonormalize(&ns, 1e-9);
        assert!(linalg::dist_inf(&b[0], &oracle[0]) < 1e-12);
    }

    #[test]
    fn orbits_of_points_and_vectors() {
        let c3 = LinearAction::permutation(Group::cyclic(3).unwrap()).unwrap();
        let o = orbit_vectors(&c3, &[1.0, 0.0, 0.0], None).unwrap();
        let mut o_sorted = o.clone();
        o_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(o_sorted, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);

        let bits = PointAction::on_tuples(Group::symmetric(2).unwrap(), 2).unwrap();
        assert_eq!(orbit_points(&bits, 1).unwrap(), vec![1, 2]);
        assert_eq!(bits.orbits(), &[vec![0], vec![1, 2], vec![3]]);

        let triv = PointAction::natural(Group::trivial()).unwrap();
        assert_eq!(orbit_points(&triv, 0).unwrap(), vec![0]);

        let z = LinearAction::rotation(1.0).unwrap();
        assert!(matches!(orbit_vectors(&z, &[1.0, 0.0], None), Err(Error::NotEnumerable(_))));
        assert_eq!(orbit_vectors(&z, &[1.0, 0.0], Some(3)).unwrap().len(), 4);
    }

    #[test]
    fn composition_matches_on_random_vectors() {
        let a = LinearAction::permutation(Group::parse("dihedral:4").unwrap()).unwrap();
        let g = a.group().clone();
        let x = [0.3, -1.2, 2.5, 0.7];
        for p in g.elements().unwrap() {
            for q in g.elements().unwrap() {
                let lhs = a.apply(p, &a.apply(q, &x).unwrap()).unwrap();
                let rhs = a.apply(&g.compose(p, q).unwrap(), &x).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn heisenberg_unipotent_representation() {
        // ρ(a,b,c) as the upper unitriangular matrix [[1,a,c],[0,1,b],[0,0,1]]
        let x = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let y = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0]]);
        let z = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let g = Group::parse("heis").unwrap();
        let a = LinearAction::heisenberg(g.clone(), x, y, z).unwrap();
        let u = Element::Heisenberg([2, -1, 3]);
        let v = Element::Heisenberg([-1, 4, 0]);
        let lhs = a.matrix(&u).unwrap().mul(&a.matrix(&v).unwrap());
        let rhs = a.matrix(&g.compose(&u, &v).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        assert!(!a.is_orthogonal());
        a.dual().unwrap();
    }
}
