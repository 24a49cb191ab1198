//! Kernels on finite carriers: diagonal invariance, the symmetrized kernel,
//! mean embeddings, MMD and ergodic decomposition of invariant measures.

use serde::Serialize;

use crate::actions::{validate_probability, PointAction};
use crate::error::{Error, Result};
use crate::linalg::{self, jacobi_eigen, Matrix};

pub const PSD_TOL: f64 = 1e-8;
pub const CHARACTERISTIC_TOL: f64 = 1e-8;
pub const MMD_ROUNDOFF: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;

/// A symmetric positive semidefinite Gram table.
#[derive(Debug, Clone, Serialize)]
pub struct KernelGram {
    table: Matrix,
    min_eigenvalue: f64,
}

impl KernelGram {
    pub fn new(table: Matrix) -> Result<Self> {
        if !table.is_square() {
            return Err(Error::InvalidKernel(format!(
                "table is {}x{}",
                table.rows(),
                table.cols()
            )));
        }
        if !table.is_symmetric(0.0) {
            return Err(Error::InvalidKernel("table is not symmetric".into()));
        }
        if table.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernel("non-finite entry".into()));
        }
        let min_eigenvalue = min_eigenvalue(&table);
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::InvalidKernel(format!(
                "minimum eigenvalue {min_eigenvalue:e} is negative"
            )));
        }
        Ok(KernelGram {
            table,
            min_eigenvalue,
        })
    }

    pub fn identity(m: usize) -> Self {
        KernelGram {
            table: Matrix::identity(m),
            min_eigenvalue: if m == 0 { 0.0 } else { 1.0 },
        }
    }

    /// `K[i][j] = 1` when `i` and `j` share an orbit.
    pub fn orbit_indicator(action: &PointAction) -> Self {
        let m = action.carrier();
        let ids = action.orbit_ids();
        let mut t = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                if ids[i] == ids[j] {
                    t[(i, j)] = 1.0;
                }
            }
        }
        let min_eigenvalue = min_eigenvalue(&t);
        KernelGram {
            table: t,
            min_eigenvalue,
        }
    }

    /// `exp(−γ‖xᵢ − xⱼ‖²)` over carrier coordinates.
    pub fn gaussian(coords: &[Vec<f64>], gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::InvalidKernel("gamma must be positive".into()));
        }
        let m = coords.len();
        let mut t = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let d2: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                t[(i, j)] = (-gamma * d2).exp();
            }
        }
        KernelGram::new(t)
    }

    pub fn carrier(&self) -> usize {
        self.table.rows()
    }

    pub fn table(&self) -> &Matrix {
        &self.table
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Strictly positive definite, so `p ↦ Kp` is injective.
    pub fn is_characteristic(&self) -> bool {
        self.min_eigenvalue >= CHARACTERISTIC_TOL
    }

    /// `pᵀ K q`.
    pub fn inner(&self, p: &[f64], q: &[f64]) -> f64 {
        linalg::dot(p, &self.table.mul_vec(q))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.carrier() {
            return Err(Error::DimensionMismatch {
                expected: self.carrier(),
                got: len,
            });
        }
        Ok(())
    }
}

fn min_eigenvalue(t: &Matrix) -> f64 {
    if t.rows() == 0 {
        return 0.0;
    }
    jacobi_eigen(t, JACOBI_TOL, JACOBI_SWEEPS).values[0]
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceCheck {
    pub passed: bool,
    /// First violating element index and entry `(i, j)`, with `|K[φi][φj] − K[i][j]|`.
    pub worst: Option<(usize, usize, usize, f64)>,
}

/// Exact check of `K[φi][φj] = K[i][j]` over all elements and entries.
pub fn check_diagonal_invariance(kernel: &KernelGram, action: &PointAction) -> Result<InvarianceCheck> {
    kernel.check_len(action.carrier())?;
    let m = action.carrier();
    let t = &kernel.table;
    let mut worst: Option<(usize, usize, usize, f64)> = None;
    for (k, p) in action.perms().iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let d = (t[(p.apply(i), p.apply(j))] - t[(i, j)]).abs();
                if d > 0.0 && worst.is_none_or(|w| d > w.3) {
                    worst = Some((k, i, j, d));
                }
            }
        }
    }
    Ok(InvarianceCheck {
        passed: worst.is_none(),
        worst,
    })
}

fn require_diagonal_invariance(kernel: &KernelGram, action: &PointAction) -> Result<()> {
    let check = check_diagonal_invariance(kernel, action)?;
    if let Some((k, row, col, _)) = check.worst {
        return Err(Error::NotDiagonallyInvariant {
            element: action.group().elements()?[k].clone(),
            row,
            col,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizedKernel {
    pub kernel: KernelGram,
    /// `‖κ̄ − R K‖max`
    pub defect_rk: f64,
    /// `‖κ̄ − R K Rᵀ‖max`
    pub defect_rkr: f64,
    /// Largest `|κ̄[φi][ψj] − κ̄[i][j]|` over orbit pairs.
    pub separate_invariance_defect: f64,
}

pub const SYMMETRIZE_TOL: f64 = 1e-10;

/// `κ̄[i][j] = (1/|G|) Σ_ψ K[i][ψj]`, computed as the mean over the orbit of `j`.
pub fn symmetrize_kernel(kernel: &KernelGram, action: &PointAction) -> Result<SymmetrizedKernel> {
    require_diagonal_invariance(kernel, action)?;
    let m = action.carrier();
    let k = &kernel.table;
    let mut bar = Matrix::zeros(m, m);
    for i in 0..m {
        for orbit in action.orbits() {
            let mean = linalg::canonical_sum(orbit.iter().map(|&l| k[(i, l)]).collect()) / orbit.len() as f64;
            for &j in orbit {
                bar[(i, j)] = mean;
            }
        }
    }
    let r = action.reynolds_matrix();
    let rk = r.mul(k);
    let rkr = rk.mul(&r.transpose());
    let defect_rk = bar.max_abs_diff(&rk);
    let defect_rkr = bar.max_abs_diff(&rkr);
    let mut separate = 0.0_f64;
    for p in action.perms() {
        for q in action.perms() {
            for i in 0..m {
                for j in 0..m {
                    separate = separate.max((bar[(p.apply(i), q.apply(j))] - bar[(i, j)]).abs());
                }
            }
        }
    }
    if defect_rk > SYMMETRIZE_TOL || defect_rkr > SYMMETRIZE_TOL {
        return Err(Error::NumericBreakdown(format!(
            "symmetrized kernel differs from R K by {defect_rk:e} and from R K Rᵀ by {defect_rkr:e}"
        )));
    }
    // orbit means of a symmetric table are symmetric only up to round-off
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (bar[(i, j)] + bar[(j, i)]);
            bar[(i, j)] = v;
            bar[(j, i)] = v;
        }
    }
    Ok(SymmetrizedKernel {
        kernel: KernelGram::new(bar)?,
        defect_rk,
        defect_rkr,
        separate_invariance_defect: separate,
    })
}

/// Weight coordinates of `m(P)` together with its function values `K p`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanEmbedding {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn mean_embedding(kernel: &KernelGram, p: &[f64]) -> Result<MeanEmbedding> {
    kernel.check_len(p.len())?;
    validate_probability(p)?;
    Ok(MeanEmbedding {
        weights: p.to_vec(),
        values: kernel.table.mul_vec(p),
    })
}

/// `sqrt((p−q)ᵀ K (p−q))`.
pub fn mmd(kernel: &KernelGram, p: &[f64], q: &[f64]) -> Result<f64> {
    kernel.check_len(p.len())?;
    kernel.check_len(q.len())?;
    validate_probability(p)?;
    validate_probability(q)?;
    let d = linalg::sub(p, q);
    let quad = kernel.inner(&d, &d);
    if quad < -MMD_ROUNDOFF {
        return Err(Error::InvalidKernel(format!("quadratic form is {quad:e}")));
    }
    Ok(quad.max(0.0).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantEmbedding {
    pub averaged: Vec<f64>,
    pub embedding: MeanEmbedding,
    /// `‖K p̄ − R(K p)‖∞`
    pub commutation_defect: f64,
}

pub const COMMUTATION_TOL: f64 = 1e-10;

/// Embedding of the Reynolds average `p̄` with the commutation check `K p̄ = R(K p)`.
pub fn invariant_embedding(kernel: &KernelGram, action: &PointAction, p: &[f64]) -> Result<InvariantEmbedding> {
    require_diagonal_invariance(kernel, action)?;
    let averaged = action.reynolds(p)?;
    let embedding = mean_embedding(kernel, &averaged)?;
    let pushed = action.reynolds(&kernel.table.mul_vec(p))?;
    let commutation_defect = linalg::dist_inf(&embedding.values, &pushed);
    if commutation_defect > COMMUTATION_TOL {
        return Err(Error::NumericBreakdown(format!(
            "averaging and embedding fail to commute by {commutation_defect:e}"
        )));
    }
    Ok(InvariantEmbedding {
        averaged,
        embedding,
        commutation_defect,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicComponent {
    pub orbit: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicDecomposition {
    pub components: Vec<ErgodicComponent>,
    pub extreme: bool,
}

impl ErgodicDecomposition {
    /// `Σ w_o · uniform(o)`.
    pub fn reconstruct(&self, carrier: usize) -> Vec<f64> {
        let mut out = vec![0.0; carrier];
        for c in &self.components {
            let w = c.weight / c.orbit.len() as f64;
            for &i in &c.orbit {
                out[i] += w;
            }
        }
        out
    }
}

pub const ERGODIC_WEIGHT_TOL: f64 = 1e-9;

/// Orbit masses of an invariant probability vector.
pub fn ergodic_decomposition(action: &PointAction, p: &[f64]) -> Result<ErgodicDecomposition> {
    if p.len() != action.carrier() {
        return Err(Error::DimensionMismatch {
            expected: action.carrier(),
            got: p.len(),
        });
    }
    validate_probability(p)?;
    let defect = action.invariance_defect(p);
    if defect > 1e-9 {
        return Err(Error::NotInvariant(format!("measure deviates from its orbit means by {defect:e}")));
    }
    let components: Vec<ErgodicComponent> = action
        .orbits()
        .iter()
        .map(|o| ErgodicComponent {
            orbit: o.clone(),
            weight: linalg::canonical_sum(o.iter().map(|&i| p[i]).collect()),
        })
        .collect();
    let extreme = components.iter().filter(|c| c.weight > ERGODIC_WEIGHT_TOL).count() == 1;
    Ok(ErgodicDecomposition { components, extreme })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::Group;

    fn bits() -> PointAction {
        PointAction::on_tuples(Group::symmetric(2).unwrap(), 2).unwrap()
    }

    fn swap2() -> PointAction {
        PointAction::natural(Group::cyclic(2).unwrap()).unwrap()
    }

    #[test]
    fn gram_validation() {
        assert!(KernelGram::new(Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]])).is_err());
        assert!(KernelGram::new(Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]])).is_err());
        let k = KernelGram::new(Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])).unwrap();
        assert!(!k.is_characteristic());
        assert!(KernelGram::identity(3).is_characteristic());
        let g = KernelGram::gaussian(&[vec![0.0], vec![1.0], vec![2.0]], 0.5).unwrap();
        assert!(g.is_characteristic());
    }

    #[test]
    fn diagonal_invariance() {
        assert!(check_diagonal_invariance(&KernelGram::identity(4), &bits()).unwrap().passed);
        let k = KernelGram::new(Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]])).unwrap();
        let c = check_diagonal_invariance(&k, &swap2()).unwrap();
        assert!(!c.passed);
        assert_eq!(c.worst.map(|w| (w.1, w.2)), Some((0, 0)));
        assert!(check_diagonal_invariance(&KernelGram::orbit_indicator(&bits()), &bits()).unwrap().passed);
        assert!(matches!(
            symmetrize_kernel(&k, &swap2()),
            Err(Error::NotDiagonallyInvariant { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn symmetrize_examples() {
        let s = symmetrize_kernel(&KernelGram::identity(2), &swap2()).unwrap();
        assert_eq!(s.kernel.table().data(), &[0.5, 0.5, 0.5, 0.5]);
        assert!(s.kernel.min_eigenvalue().abs() < 1e-12);

        let s = symmetrize_kernel(&KernelGram::identity(4), &bits()).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| s.kernel.table()[(i, i)]).collect();
        assert_eq!(diag, vec![1.0, 0.5, 0.5, 1.0]);
        assert_eq!(s.separate_invariance_defect, 0.0);

        let triv = PointAction::natural(Group::parse("product(trivial,trivial)").unwrap()).unwrap();
        let k = KernelGram::new(Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]])).unwrap();
        let s = symmetrize_kernel(&k, &triv).unwrap();
        assert_eq!(s.kernel.table(), k.table());
    }

    #[test]
    fn embeddings_and_mmd() {
        let i2 = KernelGram::identity(2);
        assert_eq!(mean_embedding(&i2, &[0.5, 0.5]).unwrap().values, vec![0.5, 0.5]);
        let k = KernelGram::new(Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]])).unwrap();
        assert_eq!(mean_embedding(&k, &[1.0, 0.0]).unwrap().values, vec![2.0, 1.0]);
        assert!(mean_embedding(&k, &[0.7, 0.7]).is_err());
        assert_eq!(mmd(&i2, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((mmd(&i2, &[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invariant_embedding_examples() {
        let k = KernelGram::identity(4);
        let e = invariant_embedding(&k, &bits(), &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.averaged, vec![0.0, 0.5, 0.5, 0.0]);
        let p = [0.1, 0.2, 0.2, 0.5];
        assert_eq!(invariant_embedding(&k, &bits(), &p).unwrap().averaged, p.to_vec());
    }

    #[test]
    fn ergodic_examples() {
        let d = ergodic_decomposition(&bits(), &[0.25; 4]).unwrap();
        let w: Vec<f64> = d.components.iter().map(|c| c.weight).collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
        assert!(!d.extreme);
        assert_eq!(d.reconstruct(4), vec![0.25; 4]);
        assert!(ergodic_decomposition(&bits(), &[0.0, 0.5, 0.5, 0.0]).unwrap().extreme);
        assert!(ergodic_decomposition(&bits(), &[0.0, 1.0, 0.0, 0.0]).is_err());
        let triv = PointAction::natural(Group::parse("product(trivial,trivial)").unwrap()).unwrap();
        assert!(ergodic_decomposition(&triv, &[1.0, 0.0]).unwrap().extreme);
        assert!(!ergodic_decomposition(&triv, &[0.5, 0.5]).unwrap().extreme);
    }
}
