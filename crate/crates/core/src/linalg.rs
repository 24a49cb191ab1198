//! Small dense linear algebra: row-major tables, Gauss–Jordan inversion,
//! rank-revealing elimination, cyclic Jacobi eigenvalues and a
//! deterministic pairwise summation accumulator.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense row-major table; serialized as a list of rows.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::try_from_rows(&rows).ok_or_else(|| D::Error::custom("ragged rows"))
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    /// Like [`Matrix::from_rows`], returning `None` on ragged input.
    pub fn try_from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let c = rows.first().map_or(0, Vec::len);
        rows.iter().all(|r| r.len() == c).then(|| Self::from_rows(rows))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    out.data[base + j] += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length differs from column count");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix::from_row_major(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix::from_row_major(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_row_major(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Gauss–Jordan with partial pivoting; `None` when a pivot falls below `tol`.
    pub fn inverse(&self, tol: f64) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        let scale = self.max_abs().max(1.0);
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= tol * scale {
                return None;
            }
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] -= f * a[(col, j)];
                    inv[(r, j)] -= f * inv[(col, j)];
                }
            }
        }
        Some(inv)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Integer power; negative exponents use `inverse`.
    pub fn pow(&self, mut e: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Sum of a multiset of reals, independent of the order the terms arrive in.
pub fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Reduced row echelon form with partial pivoting. Returns the pivot columns.
pub fn rref(a: &mut Matrix, pivot_tol: f64) -> Vec<usize> {
    let (m, n) = (a.rows(), a.cols());
    let scale = a.max_abs().max(1.0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let (piv, best) = (r..m)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= pivot_tol * scale {
            for i in r..m {
                a[(i, c)] = 0.0;
            }
            continue;
        }
        a.swap_rows(r, piv);
        let p = a[(r, c)];
        for j in 0..n {
            a[(r, j)] /= p;
        }
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = a[(i, c)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(i, j)] -= f * a[(r, j)];
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &Matrix, pivot_tol: f64) -> usize {
    let mut t = a.clone();
    rref(&mut t, pivot_tol).len()
}

/// Basis of `{x : A x = 0}` read off the reduced row echelon form (not orthonormalized).
pub fn nullspace(a: &Matrix, pivot_tol: f64) -> Vec<Vec<f64>> {
    let n = a.cols();
    let mut t = a.clone();
    let pivots = rref(&mut t, pivot_tol);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; n];
            v[f] = 1.0;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -t[(r, f)];
            }
            v
        })
        .collect()
}

/// Modified Gram–Schmidt over the given vectors; drops vectors whose residual
/// norm is at most `tol`. Each kept vector has its first significant entry positive.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let nrm = norm2(&w);
        if nrm > tol {
            for x in &mut w {
                *x /= nrm;
            }
            fix_sign(&mut w);
            basis.push(w);
        }
    }
    basis
}

pub(crate) fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Eigen-decomposition of a symmetric table by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
    pub sweeps: usize,
}

pub fn jacobi_eigen(a: &Matrix, off_tol: f64, max_sweeps: usize) -> SymmetricEigen {
    assert!(a.is_square(), "Jacobi needs a square table");
    let n = a.rows();
    let mut m = a.clone();
    // symmetrize exactly; callers pass tables symmetric up to round-off
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let fro = m.data().iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= off_tol * fro {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[(a, a)].total_cmp(&m[(b, b)]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| m[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        for i in 0..n {
            vectors[(i, dst)] = col[i];
        }
    }
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Binary-counter pairwise summation of equal-length vectors.
///
/// Pushing `v_0, v_1, ...` keeps aligned blocks of `2^k` terms summed as
/// balanced trees, so the total of any prefix depends only on that prefix and
/// never on how it was assembled.
#[derive(Debug, Clone, Default)]
pub struct PairwiseSum {
    len: usize,
    stack: Vec<(usize, Vec<f64>)>,
    count: usize,
}

impl PairwiseSum {
    pub fn new(len: usize) -> Self {
        PairwiseSum {
            len,
            stack: Vec::new(),
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, v: Vec<f64>) {
        assert_eq!(v.len(), self.len, "pairwise sum term has wrong length");
        self.count += 1;
        let mut block = (1usize, v);
        while let Some(top) = self.stack.last() {
            if top.0 != block.0 {
                break;
            }
            let (size, mut left) = self.stack.pop().expect("non-empty stack");
            for (l, r) in left.iter_mut().zip(&block.1) {
                *l += r;
            }
            block = (size * 2, left);
        }
        self.stack.push(block);
    }

    /// Sum of everything pushed so far; larger blocks are folded first.
    pub fn total(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.len];
        for (_, block) in &self.stack {
            for (a, b) in acc.iter_mut().zip(block) {
                *a += b;
            }
        }
        acc
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.total().into_iter().map(|v| v / n).collect()
    }
}

pub fn pairwise_mean<I: IntoIterator<Item = Vec<f64>>>(len: usize, terms: I) -> Vec<f64> {
    let mut acc = PairwiseSum::new(len);
    for t in terms {
        acc.push(t);
    }
    acc.mean()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_diagonal() {
        let a = Matrix::diag(&[2.0, 0.5]);
        let inv = a.inverse(1e-12).unwrap();
        assert_eq!(inv, Matrix::diag(&[0.5, 2.0]));
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.inverse(1e-12).is_none());
    }

    #[test]
    fn nullspace_of_cyclic_shift_minus_identity() {
        // P - I for the 3-cycle; kernel is the constants
        let p = Matrix::from_rows(&[
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
            vec![0.0, 1.0, -1.0],
        ]);
        let ns = nullspace(&p, 1e-10);
        assert_eq!(ns.len(), 1);
        let b = orthonormalize(&ns, 1e-9);
        let s = 1.0 / 3f64.sqrt();
        for x in &b[0] {
            assert!((x - s).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = jacobi_eigen(&a, 1e-14, 50);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_prefix_totals_are_stable() {
        let terms: Vec<Vec<f64>> = (0..37).map(|k| vec![0.1 * k as f64, 1.0 / (k + 1) as f64]).collect();
        let mut inc = PairwiseSum::new(2);
        for (k, t) in terms.iter().enumerate() {
            inc.push(t.clone());
            let fresh = pairwise_mean(2, terms[..=k].iter().cloned());
            assert_eq!(inc.mean(), fresh);
        }
    }

    #[test]
    fn canonical_sum_ignores_order() {
        let a = vec![0.1, 1e16, -1e16, 0.3, 0.7];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(canonical_sum(a).to_bits(), canonical_sum(b).to_bits());
    }
}
