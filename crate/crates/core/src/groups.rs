//! Finite permutation groups and windowed amenable groups.
//!
//! Every finite group is realized as a permutation group on `0..degree` with
//! its elements enumerated once, sorted lexicographically by image list (the
//! identity comes first). Infinite groups are the integer lattices `Z^d`
//! with box windows `[0, n]^d`, the discrete Heisenberg group with windows
//! `|a|, |b|, |c| <= n`, and the finitary symmetric group truncated to
//! `S_N` with windows `S_min(n, N)`. Windows are generated on demand.
//!
//! Window enumeration order extends prefixes: `window(n)` lists
//! `window(n - 1)` first, followed by the new elements in lexicographic order.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use serde_json::Value;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest finite group that will be enumerated.
pub const MAX_GROUP_ORDER: usize = 100_000;
/// Largest window that [`FolnerFamily::window`] will materialize.
pub const MAX_WINDOW_LEN: usize = 4_000_000;
const MAX_SYM_DEGREE: usize = 8;

/// A permutation of `0..degree`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation of `0..degree` from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a >= degree || touched[a] {
                    return Err(Error::InvalidInput(format!("bad cycle {cycle:?} for degree {degree}")));
                }
                touched[a] = true;
                images[a] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Perm(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// +1 for even permutations, -1 for odd ones.
    pub fn sign(&self) -> i32 {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut s = 1;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            if len % 2 == 0 {
                s = -s;
            }
        }
        s
    }

    /// Largest point moved, if any.
    pub fn support_max(&self) -> Option<usize> {
        self.0.iter().enumerate().rev().find(|(i, &j)| *i != j).map(|(i, _)| i)
    }

    fn extended(&self, degree: usize) -> Perm {
        let mut v = self.0.clone();
        v.extend(self.0.len()..degree);
        Perm(v)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

/// A group element of any supported kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Perm(Perm),
    Lattice(SmallVec<[i64; 4]>),
    /// `(a, b, c)` with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg([i64; 3]),
}

impl Element {
    pub fn as_perm(&self) -> Option<&Perm> {
        match self {
            Element::Perm(p) => Some(p),
            _ => None,
        }
    }

    pub fn lattice(coords: &[i64]) -> Self {
        Element::Lattice(SmallVec::from_slice(coords))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Perm(p) => write!(f, "{p}"),
            Element::Lattice(v) => {
                write!(f, "(")?;
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Heisenberg([a, b, c]) => write!(f, "({a},{b},{c})"),
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parsed group description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Trivial,
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    Product(Box<GroupSpec>, Box<GroupSpec>),
    Lattice(usize),
    Heisenberg,
    FinitarySymmetric(usize),
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Trivial => write!(f, "trivial"),
            GroupSpec::Cyclic(k) => write!(f, "cyclic:{k}"),
            GroupSpec::Dihedral(k) => write!(f, "dihedral:{k}"),
            GroupSpec::Symmetric(k) => write!(f, "sym:{k}"),
            GroupSpec::Product(a, b) => write!(f, "product({a},{b})"),
            GroupSpec::Lattice(1) => write!(f, "z:box"),
            GroupSpec::Lattice(d) => write!(f, "zd:{d}:box"),
            GroupSpec::Heisenberg => write!(f, "heis:box"),
            GroupSpec::FinitarySymmetric(n) => write!(f, "fsym:{n}"),
        }
    }
}

fn parse_count(kind: &str, s: Option<&str>, min: usize) -> Result<usize> {
    let s = s.ok_or_else(|| Error::InvalidGroupParameter(format!("`{kind}` needs a size parameter")))?;
    let k: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidGroupParameter(format!("`{s}` is not a size for `{kind}`")))?;
    if k < min {
        return Err(Error::InvalidGroupParameter(format!("`{kind}` needs size >= {min}, got {k}")));
    }
    Ok(k)
}

fn expect_box(kind: &str, s: Option<&str>) -> Result<()> {
    match s {
        None | Some("box") => Ok(()),
        Some(w) => Err(Error::InvalidGroupParameter(format!("`{kind}` supports only box windows, got `{w}`"))),
    }
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = split_top_level(inner).ok_or_else(|| Error::UnknownGroup(s.to_string()))?;
            return Ok(GroupSpec::Product(Box::new(a.parse()?), Box::new(b.parse()?)));
        }
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let p1 = parts.next();
        let p2 = parts.next();
        if parts.next().is_some() {
            return Err(Error::InvalidGroupParameter(format!("too many parameters in `{s}`")));
        }
        let no_params = |spec: GroupSpec| {
            if p1.is_some() {
                Err(Error::InvalidGroupParameter(format!("`{kind}` takes no size parameter")))
            } else {
                Ok(spec)
            }
        };
        match kind {
            "trivial" => no_params(GroupSpec::Trivial),
            "cyclic" => {
                if p2.is_some() {
                    return Err(Error::InvalidGroupParameter(format!("too many parameters in `{s}`")));
                }
                Ok(GroupSpec::Cyclic(parse_count(kind, p1, 1)?))
            }
            "dihedral" => Ok(GroupSpec::Dihedral(parse_count(kind, p1, 3)?)),
            "sym" => Ok(GroupSpec::Symmetric(parse_count(kind, p1, 1)?)),
            "fsym" => Ok(GroupSpec::FinitarySymmetric(parse_count(kind, p1, 1)?)),
            "z" => {
                expect_box(kind, p1)?;
                Ok(GroupSpec::Lattice(1))
            }
            "zd" => {
                let d = parse_count(kind, p1, 1)?;
                expect_box(kind, p2)?;
                Ok(GroupSpec::Lattice(d))
            }
            "heis" => {
                expect_box(kind, p1)?;
                Ok(GroupSpec::Heisenberg)
            }
            _ => Err(Error::UnknownGroup(s.to_string())),
        }
    }
}

impl GroupSpec {
    /// Reads the JSON form `{"kind": ..., "params": [...]}`; a bare string is
    /// parsed with the text grammar.
    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(s) = v.as_str() {
            return s.parse();
        }
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidInput("group JSON needs a string `kind`".into()))?;
        let params: Vec<Value> = match v.get("params") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(a)) => a.clone(),
            Some(other) => vec![other.clone()],
        };
        if kind == "product" {
            if params.len() != 2 {
                return Err(Error::InvalidGroupParameter("product needs two factor specs".into()));
            }
            return Ok(GroupSpec::Product(
                Box::new(GroupSpec::from_json(&params[0])?),
                Box::new(GroupSpec::from_json(&params[1])?),
            ));
        }
        let text: Vec<String> = params
            .iter()
            .map(|p| match p {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(Error::InvalidGroupParameter(format!("bad parameter {other}"))),
            })
            .collect::<Result<_>>()?;
        let mut s = kind.to_string();
        for t in text {
            s.push(':');
            s.push_str(&t);
        }
        s.parse()
    }

    pub fn to_json(&self) -> Value {
        use serde_json::json;
        match self {
            GroupSpec::Trivial => json!({"kind": "trivial", "params": []}),
            GroupSpec::Cyclic(k) => json!({"kind": "cyclic", "params": [k]}),
            GroupSpec::Dihedral(k) => json!({"kind": "dihedral", "params": [k]}),
            GroupSpec::Symmetric(k) => json!({"kind": "sym", "params": [k]}),
            GroupSpec::Product(a, b) => json!({"kind": "product", "params": [a.to_json(), b.to_json()]}),
            GroupSpec::Lattice(1) => json!({"kind": "z", "params": ["box"]}),
            GroupSpec::Lattice(d) => json!({"kind": "zd", "params": [d, "box"]}),
            GroupSpec::Heisenberg => json!({"kind": "heis", "params": ["box"]}),
            GroupSpec::FinitarySymmetric(n) => json!({"kind": "fsym", "params": [n]}),
        }
    }
}

/// Structural kind of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Enumerated permutation group of the given degree.
    Finite { degree: usize },
    /// `Z^d` with box windows.
    Lattice { dim: usize },
    Heisenberg,
    /// Finitary symmetric group truncated to `S_N`.
    FinitarySymmetric { n: usize },
}

#[derive(Debug)]
struct FiniteData {
    generators: Vec<Perm>,
    elements: Vec<Element>,
    index: HashMap<Perm, usize>,
}

#[derive(Debug)]
struct Inner {
    spec: GroupSpec,
    kind: GroupKind,
    finite: Option<FiniteData>,
}

/// A validated group model; cheap to clone.
#[derive(Debug, Clone)]
pub struct Group(Arc<Inner>);

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.0.spec == other.0.spec
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl Serialize for Group {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::from_spec(&s.parse()?)
    }
}

fn finite_generators(spec: &GroupSpec) -> Result<(usize, Vec<Perm>)> {
    Ok(match spec {
        GroupSpec::Trivial => (1, Vec::new()),
        GroupSpec::Cyclic(k) => {
            let k = *k;
            (k, vec![Perm((0..k).map(|i| (i + 1) % k).collect())])
        }
        GroupSpec::Dihedral(k) => {
            let k = *k;
            let rot = Perm((0..k).map(|i| (i + 1) % k).collect());
            let refl = Perm((0..k).map(|i| (k - i) % k).collect());
            (k, vec![rot, refl])
        }
        GroupSpec::Symmetric(k) => {
            let k = *k;
            if k > MAX_SYM_DEGREE {
                return Err(Error::SizeLimit(format!("sym:{k} exceeds degree {MAX_SYM_DEGREE}")));
            }
            let mut gens = Vec::new();
            if k >= 2 {
                gens.push(Perm::from_cycles(k, &[vec![0, 1]])?);
            }
            if k >= 3 {
                gens.push(Perm((0..k).map(|i| (i + 1) % k).collect()));
            }
            (k, gens)
        }
        GroupSpec::Product(a, b) => {
            let (da, ga) = finite_generators(a).map_err(|e| match e {
                Error::NotEnumerable(s) => Error::IncompatibleProduct(format!("factor `{s}` is not finite")),
                e => e,
            })?;
            let (db, gb) = finite_generators(b).map_err(|e| match e {
                Error::NotEnumerable(s) => Error::IncompatibleProduct(format!("factor `{s}` is not finite")),
                e => e,
            })?;
            let degree = da + db;
            let mut gens: Vec<Perm> = ga.iter().map(|g| g.extended(degree)).collect();
            for g in gb {
                let mut images: Vec<usize> = (0..da).collect();
                images.extend(g.0.iter().map(|&i| i + da));
                gens.push(Perm(images));
            }
            (degree, gens)
        }
        other => return Err(Error::NotEnumerable(other.to_string())),
    })
}

fn closure(degree: usize, generators: &[Perm]) -> Result<Vec<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::new();
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in generators {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                if seen.len() > MAX_GROUP_ORDER {
                    return Err(Error::SizeLimit(format!("group order exceeds {MAX_GROUP_ORDER}")));
                }
                queue.push_back(q);
            }
        }
    }
    let mut all: Vec<Perm> = seen.into_iter().collect();
    all.sort();
    Ok(all)
}

impl Group {
    pub fn parse(spec: &str) -> Result<Self> {
        spec.parse()
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        let (kind, finite) = match spec {
            GroupSpec::Lattice(d) => (GroupKind::Lattice { dim: *d }, None),
            GroupSpec::Heisenberg => (GroupKind::Heisenberg, None),
            GroupSpec::FinitarySymmetric(n) => (GroupKind::FinitarySymmetric { n: *n }, None),
            _ => {
                let (degree, generators) = finite_generators(spec)?;
                let perms = closure(degree, &generators)?;
                let index = perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
                let elements = perms.into_iter().map(Element::Perm).collect();
                (
                    GroupKind::Finite { degree },
                    Some(FiniteData {
                        generators,
                        elements,
                        index,
                    }),
                )
            }
        };
        Ok(Group(Arc::new(Inner {
            spec: spec.clone(),
            kind,
            finite,
        })))
    }

    pub fn trivial() -> Self {
        Group::from_spec(&GroupSpec::Trivial).expect("trivial group")
    }

    pub fn cyclic(k: usize) -> Result<Self> {
        Group::from_spec(&GroupSpec::Cyclic(k))
    }

    pub fn symmetric(k: usize) -> Result<Self> {
        Group::from_spec(&GroupSpec::Symmetric(k))
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.0.spec
    }

    pub fn kind(&self) -> GroupKind {
        self.0.kind
    }

    pub fn is_finite(&self) -> bool {
        self.0.finite.is_some()
    }

    pub fn order(&self) -> Option<usize> {
        self.0.finite.as_ref().map(|f| f.elements.len())
    }

    /// Degree of the defining permutation representation, for permutation groups.
    pub fn degree(&self) -> Option<usize> {
        match self.0.kind {
            GroupKind::Finite { degree } => Some(degree),
            GroupKind::FinitarySymmetric { n } => Some(n),
            _ => None,
        }
    }

    fn finite(&self) -> Result<&FiniteData> {
        self.0
            .finite
            .as_ref()
            .ok_or_else(|| Error::NotEnumerable(self.to_string()))
    }

    /// All elements of a finite group in canonical order.
    pub fn elements(&self) -> Result<&[Element]> {
        Ok(&self.finite()?.elements)
    }

    /// Generators used to build a finite group.
    pub fn generators(&self) -> Result<Vec<Element>> {
        Ok(self.finite()?.generators.iter().cloned().map(Element::Perm).collect())
    }

    /// Position of `g` in [`Group::elements`].
    pub fn index_of(&self, g: &Element) -> Option<usize> {
        let f = self.0.finite.as_ref()?;
        match g {
            Element::Perm(p) => f.index.get(p).copied(),
            _ => None,
        }
    }

    pub fn identity(&self) -> Element {
        match self.0.kind {
            GroupKind::Finite { degree } => Element::Perm(Perm::identity(degree)),
            GroupKind::FinitarySymmetric { n } => Element::Perm(Perm::identity(n)),
            GroupKind::Lattice { dim } => Element::Lattice(SmallVec::from_elem(0, dim)),
            GroupKind::Heisenberg => Element::Heisenberg([0; 3]),
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (self.0.kind, g) {
            (GroupKind::Finite { .. }, Element::Perm(_)) => self.index_of(g).is_some(),
            (GroupKind::FinitarySymmetric { n }, Element::Perm(p)) => p.degree() == n,
            (GroupKind::Lattice { dim }, Element::Lattice(v)) => v.len() == dim,
            (GroupKind::Heisenberg, Element::Heisenberg(_)) => true,
            _ => false,
        }
    }

    pub fn check(&self, g: &Element) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::ForeignElement(g.to_string()))
        }
    }

    /// Group product `a·b` (as maps: apply `b` first).
    pub fn compose(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(compose_unchecked(a, b))
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        self.check(g)?;
        Ok(inverse_unchecked(g))
    }

    /// Reads an element: `e`/`id` for the identity, image lists like `1,0,2`
    /// or cycles like `(0 1)(2 3)` for permutation groups, comma lists for
    /// lattices and Heisenberg triples.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        if s == "e" || s == "id" {
            return Ok(self.identity());
        }
        let ints = |t: &str| -> Result<Vec<i64>> {
            t.trim_matches(|c| c == '[' || c == ']' || c == '(' || c == ')')
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::InvalidInput(format!("cannot read element `{s}`")))
                })
                .collect()
        };
        let g = match self.0.kind {
            GroupKind::Finite { degree } | GroupKind::FinitarySymmetric { n: degree } => {
                if s.starts_with('(') && !s.contains(',') {
                    let cycles = s
                        .split(')')
                        .map(|c| c.trim().trim_start_matches('('))
                        .filter(|c| !c.is_empty())
                        .map(|c| {
                            c.split_whitespace()
                                .map(|x| {
                                    x.parse::<usize>()
                                        .map_err(|_| Error::InvalidInput(format!("cannot read cycle `{c}`")))
                                })
                                .collect::<Result<Vec<usize>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Element::Perm(Perm::from_cycles(degree, &cycles)?)
                } else {
                    let v = ints(s)?;
                    if v.iter().any(|&x| x < 0) {
                        return Err(Error::InvalidInput(format!("negative image in `{s}`")));
                    }
                    Element::Perm(Perm::from_images(v.into_iter().map(|x| x as usize).collect())?)
                }
            }
            GroupKind::Lattice { .. } => Element::Lattice(SmallVec::from_vec(ints(s)?)),
            GroupKind::Heisenberg => {
                let v = ints(s)?;
                if v.len() != 3 {
                    return Err(Error::ForeignElement(s.to_string()));
                }
                Element::Heisenberg([v[0], v[1], v[2]])
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    /// Elements used to probe invariance: every element of a finite group,
    /// `±e_i` on lattices, `±x, ±y, ±z` on the Heisenberg group and adjacent
    /// transpositions on the finitary symmetric group.
    pub fn probes(&self) -> Vec<Element> {
        match self.0.kind {
            GroupKind::Finite { .. } => self.finite().map(|f| f.elements.clone()).unwrap_or_default(),
            GroupKind::Lattice { dim } => {
                let mut out = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    for s in [1, -1] {
                        let mut v: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim);
                        v[i] = s;
                        out.push(Element::Lattice(v));
                    }
                }
                out
            }
            GroupKind::Heisenberg => {
                let mut out = Vec::new();
                for i in 0..3 {
                    for s in [1, -1] {
                        let mut t = [0; 3];
                        t[i] = s;
                        out.push(Element::Heisenberg(t));
                    }
                }
                out
            }
            GroupKind::FinitarySymmetric { n } => (0..n.saturating_sub(1))
                .map(|i| Element::Perm(Perm::from_cycles(n, &[vec![i, i + 1]]).expect("transposition")))
                .collect(),
        }
    }

    /// The canonical Følner family of this group.
    pub fn family(&self) -> FolnerFamily {
        FolnerFamily { group: self.clone() }
    }
}

pub(crate) fn compose_unchecked(a: &Element, b: &Element) -> Element {
    match (a, b) {
        (Element::Perm(p), Element::Perm(q)) => Element::Perm(p.compose(q)),
        (Element::Lattice(u), Element::Lattice(v)) => Element::Lattice(u.iter().zip(v).map(|(x, y)| x + y).collect()),
        (Element::Heisenberg([a, b, c]), Element::Heisenberg([a2, b2, c2])) => {
            Element::Heisenberg([a + a2, b + b2, c + c2 + a * b2])
        }
        _ => panic!("composing elements of different kinds"),
    }
}

pub(crate) fn inverse_unchecked(g: &Element) -> Element {
    match g {
        Element::Perm(p) => Element::Perm(p.inverse()),
        Element::Lattice(v) => Element::Lattice(v.iter().map(|x| -x).collect()),
        Element::Heisenberg([a, b, c]) => Element::Heisenberg([-a, -b, -c + a * b]),
    }
}

/// Builds a group and its canonical Følner family from a text spec.
pub fn make_group(spec: &str) -> Result<(Group, FolnerFamily)> {
    let g = Group::parse(spec)?;
    let f = g.family();
    Ok((g, f))
}

/// The canonical nested windows `A_0 ⊆ A_1 ⊆ ...` of a group.
#[derive(Debug, Clone)]
pub struct FolnerFamily {
    group: Group,
}

/// Visits `{v ∈ [0,k]^d : max v = k}` in lexicographic order.
fn shell_lex<F: FnMut(&Element)>(v: &mut SmallVec<[i64; 4]>, pos: usize, hit: bool, k: i64, f: &mut F) {
    if pos == v.len() {
        if hit {
            f(&Element::Lattice(v.clone()));
        }
        return;
    }
    let lo = if !hit && pos + 1 == v.len() { k } else { 0 };
    for x in lo..=k {
        v[pos] = x;
        shell_lex(v, pos + 1, hit || x == k, k, f);
    }
}

fn lex_perms(k: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

impl FolnerFamily {
    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Number of elements in `window(n)`.
    pub fn len(&self, n: usize) -> usize {
        match self.group.kind() {
            GroupKind::Finite { .. } => self.group.order().unwrap_or(0),
            GroupKind::Lattice { dim } => (n + 1).saturating_pow(dim as u32),
            GroupKind::Heisenberg => (2 * n + 1).saturating_pow(3),
            GroupKind::FinitarySymmetric { n: cap } => (1..=n.clamp(1, cap)).product(),
        }
    }

    pub fn is_empty(&self, n: usize) -> bool {
        self.len(n) == 0
    }

    /// `g ∈ A_n`.
    pub fn contains(&self, n: usize, g: &Element) -> bool {
        match (self.group.kind(), g) {
            (GroupKind::Finite { .. }, _) => self.group.contains(g),
            (GroupKind::Lattice { dim }, Element::Lattice(v)) => {
                v.len() == dim && v.iter().all(|&x| x >= 0 && x as u64 <= n as u64)
            }
            (GroupKind::Heisenberg, Element::Heisenberg(t)) => t.iter().all(|x| x.unsigned_abs() <= n as u64),
            (GroupKind::FinitarySymmetric { n: cap }, Element::Perm(p)) => {
                p.degree() == cap && p.support_max().is_none_or(|m| m < n.clamp(1, cap))
            }
            _ => false,
        }
    }

    /// Visits `A_k \ A_{k-1}` (all of `A_0` when `k = 0`) in canonical order.
    pub fn visit_increment<F: FnMut(&Element)>(&self, k: usize, mut f: F) -> Result<()> {
        match self.group.kind() {
            GroupKind::Finite { .. } => {
                if k == 0 {
                    for g in self.group.elements()? {
                        f(g);
                    }
                }
            }
            GroupKind::Lattice { dim } => {
                let mut v: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim);
                shell_lex(&mut v, 0, false, k as i64, &mut f);
            }
            GroupKind::Heisenberg => {
                let k = k as i64;
                for a in -k..=k {
                    for b in -k..=k {
                        for c in -k..=k {
                            if a.abs() == k || b.abs() == k || c.abs() == k {
                                f(&Element::Heisenberg([a, b, c]));
                            }
                        }
                    }
                }
            }
            GroupKind::FinitarySymmetric { n: cap } => {
                if k > cap {
                    return Ok(());
                }
                if k == 0 {
                    f(&self.group.identity());
                }
                if k <= 1 {
                    return Ok(());
                }
                if k > MAX_SYM_DEGREE {
                    return Err(Error::SizeLimit(format!(
                        "finitary symmetric windows are enumerated up to S_{MAX_SYM_DEGREE}"
                    )));
                }
                for images in lex_perms(k) {
                    if images[k - 1] != k - 1 {
                        f(&Element::Perm(Perm(images).extended(cap)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Visits `window(n)` in canonical order without materializing it.
    pub fn visit_window<F: FnMut(&Element)>(&self, n: usize, mut f: F) -> Result<()> {
        let last = match self.group.kind() {
            GroupKind::Finite { .. } => 0,
            _ => n,
        };
        for k in 0..=last {
            self.visit_increment(k, &mut f)?;
        }
        Ok(())
    }

    pub fn window(&self, n: usize) -> Result<Vec<Element>> {
        let len = self.len(n);
        if len > MAX_WINDOW_LEN {
            return Err(Error::SizeLimit(format!("window {n} has {len} elements")));
        }
        let mut out = Vec::with_capacity(len);
        self.visit_window(n, |g| out.push(g.clone()))?;
        Ok(out)
    }

    /// `|A_n ∩ φA_n| / |A_n|`, by exact counting.
    pub fn folner_ratio(&self, n: usize, phi: &Element) -> Result<f64> {
        self.group.check(phi)?;
        let phi_inv = inverse_unchecked(phi);
        let mut total = 0usize;
        let mut hit = 0usize;
        self.visit_window(n, |a| {
            total += 1;
            if self.contains(n, &compose_unchecked(&phi_inv, a)) {
                hit += 1;
            }
        })?;
        if total == 0 {
            return Err(Error::EmptyWindow(n));
        }
        Ok(hit as f64 / total as f64)
    }

    /// `|A_n ∩ φA_n| / |A_n|` without enumeration, where a formula is known:
    /// `Π max(0, n+1−|φ_i|) / (n+1)^d` on box windows of `Z^d`, 1 on finite groups.
    pub fn folner_ratio_closed_form(&self, n: usize, phi: &Element) -> Option<f64> {
        match (self.group.kind(), phi) {
            (GroupKind::Finite { .. }, _) if self.group.contains(phi) => Some(1.0),
            (GroupKind::Lattice { dim }, Element::Lattice(v)) if v.len() == dim => {
                let side = n as u128 + 1;
                let hit: u128 = v.iter().map(|&x| side.saturating_sub(x.unsigned_abs() as u128)).product();
                Some(hit as f64 / side.pow(dim as u32) as f64)
            }
            _ => None,
        }
    }

    /// `|A_n △ A_n φ| / |A_n|`, by exact counting.
    pub fn right_translate_defect(&self, n: usize, phi: &Element) -> Result<f64> {
        self.group.check(phi)?;
        let mut total = 0usize;
        let mut kept = 0usize;
        self.visit_window(n, |a| {
            total += 1;
            if self.contains(n, &compose_unchecked(a, phi)) {
                kept += 1;
            }
        })?;
        if total == 0 {
            return Err(Error::EmptyWindow(n));
        }
        Ok(2.0 * (total - kept) as f64 / total as f64)
    }
}

/// Free-function form of [`FolnerFamily::folner_ratio`].
pub fn folner_ratio(family: &FolnerFamily, n: usize, phi: &Element) -> Result<f64> {
    family.folner_ratio(n, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_ratio_matches_counting() {
        for spec in ["z:box", "zd:2:box", "zd:3:box"] {
            let g = Group::parse(spec).unwrap();
            let f = g.family();
            let d = match g.kind() {
                GroupKind::Lattice { dim } => dim,
                _ => unreachable!(),
            };
            for n in 0..6 {
                for phi in [vec![1i64, -2, 3], vec![0, 0, 0], vec![7, 1, 0], vec![-3, 3, -1]] {
                    let phi = Element::lattice(&phi[..d]);
                    assert_eq!(f.folner_ratio_closed_form(n, &phi), Some(f.folner_ratio(n, &phi).unwrap()));
                }
            }
        }
        let f = Group::parse("heis:box").unwrap().family();
        assert_eq!(f.folner_ratio_closed_form(2, &Element::Heisenberg([1, 0, 0])), None);
    }

    #[test]
    fn trivial_group_has_one_element() {
        let (g, f) = make_group("trivial").unwrap();
        assert_eq!(g.order(), Some(1));
        assert_eq!(f.window(3).unwrap(), vec![g.identity()]);
    }

    #[test]
    fn group_orders() {
        for (s, n) in [
            ("cyclic:5", 5),
            ("dihedral:4", 8),
            ("sym:3", 6),
            ("sym:4", 24),
            ("product(cyclic:2,cyclic:3)", 6),
            ("product(sym:3,product(cyclic:2,trivial))", 12),
        ] {
            assert_eq!(Group::parse(s).unwrap().order(), Some(n), "{s}");
        }
    }

    #[test]
    fn identity_comes_first_and_axioms_hold() {
        let g = Group::parse("dihedral:5").unwrap();
        let els = g.elements().unwrap();
        assert_eq!(els[0], g.identity());
        for a in els {
            assert_eq!(&g.compose(a, &g.identity()).unwrap(), a);
            assert_eq!(g.compose(a, &g.inverse(a).unwrap()).unwrap(), g.identity());
            for b in els {
                assert!(g.contains(&g.compose(a, b).unwrap()));
            }
        }
    }

    #[test]
    fn bad_specs() {
        assert!(matches!(Group::parse("cyclic:0"), Err(Error::InvalidGroupParameter(_))));
        assert!(matches!(Group::parse("foo:3"), Err(Error::UnknownGroup(_))));
        assert!(matches!(Group::parse("product(z,cyclic:2)"), Err(Error::IncompatibleProduct(_))));
        assert!(matches!(Group::parse("cyclic:x"), Err(Error::InvalidGroupParameter(_))));
    }

    #[test]
    fn integer_window() {
        let (g, f) = make_group("z:box").unwrap();
        let w = f.window(4).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w, (0..=4).map(|k| Element::lattice(&[k])).collect::<Vec<_>>());
        assert_eq!(f.folner_ratio(4, &g.parse_element("1").unwrap()).unwrap(), 0.8);
    }

    #[test]
    fn lattice_windows_are_prefix_extending() {
        let (_, f) = make_group("zd:2:box").unwrap();
        let w2 = f.window(2).unwrap();
        let w3 = f.window(3).unwrap();
        assert_eq!(w3.len(), 16);
        assert_eq!(&w3[..w2.len()], &w2[..]);
        let distinct: HashSet<_> = w3.iter().collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn finitary_symmetric_window_ratio() {
        let (g, f) = make_group("fsym:5").unwrap();
        let w = f.window(3).unwrap();
        assert_eq!(w.len(), 6);
        let phi = g.parse_element("(0 1)").unwrap();
        assert_eq!(f.folner_ratio(3, &phi).unwrap(), 1.0);
        let far = g.parse_element("(0 4)").unwrap();
        assert!(f.folner_ratio(3, &far).unwrap() < 1.0);
    }

    #[test]
    fn heisenberg_relations() {
        let (g, f) = make_group("heis").unwrap();
        let x = Element::Heisenberg([1, 0, 0]);
        let y = Element::Heisenberg([0, 1, 0]);
        let xy = g.compose(&x, &y).unwrap();
        let yx = g.compose(&y, &x).unwrap();
        assert_ne!(xy, yx);
        let z = Element::Heisenberg([0, 0, 1]);
        assert_eq!(g.compose(&z, &yx).unwrap(), xy);
        assert_eq!(f.window(1).unwrap().len(), 27);
        let g1 = Element::Heisenberg([2, -1, 3]);
        assert_eq!(g.compose(&g1, &g.inverse(&g1).unwrap()).unwrap(), g.identity());
    }

    #[test]
    fn whole_group_ratio_is_one() {
        let (g, f) = make_group("sym:3").unwrap();
        for phi in g.elements().unwrap() {
            assert_eq!(f.folner_ratio(1, phi).unwrap(), 1.0);
        }
    }

    #[test]
    fn json_spec_round_trip() {
        for s in ["cyclic:5", "product(sym:3,cyclic:2)", "zd:3:box", "heis:box", "fsym:6"] {
            let spec: GroupSpec = s.parse().unwrap();
            assert_eq!(GroupSpec::from_json(&spec.to_json()).unwrap(), spec);
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn permutation_sign() {
        assert_eq!(Perm::from_cycles(3, &[vec![0, 1]]).unwrap().sign(), -1);
        assert_eq!(Perm::from_cycles(3, &[vec![0, 1, 2]]).unwrap().sign(), 1);
    }
}
