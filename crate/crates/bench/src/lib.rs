//! Deterministic fixtures shared by the benchmarks.

use folner_core::couplings::CostMatrix;
use folner_core::embeddings::KernelGram;
use folner_core::orbitopes::OrbitopeHandle;
use folner_core::{Group, LinearAction, Matrix, PointAction};

/// `Z_m` on its own points.
pub fn cyclic_action(m: usize) -> PointAction {
    PointAction::natural(Group::cyclic(m).expect("valid order")).expect("natural action")
}

/// Circulant cost `c(i, j) = d² + |sin d| / 2` with `d = j − i mod m`, and
/// uniform marginals.
pub fn circulant_transport(m: usize) -> (CostMatrix, Vec<f64>) {
    let data = (0..m * m)
        .map(|k| {
            let d = (k % m + m - k / m) % m;
            (d * d) as f64 + 0.5 * (d as f64).sin().abs()
        })
        .collect();
    let cost = CostMatrix::new(Matrix::from_row_major(m, m, data)).expect("finite cost");
    (cost, vec![1.0 / m as f64; m])
}

/// A dense cost with no symmetry, for the plain transport LP.
pub fn dense_cost(n1: usize, n2: usize) -> CostMatrix {
    let data = (0..n1 * n2).map(|k| 1.0 + ((k * 7919) % 101) as f64 / 10.0).collect();
    CostMatrix::new(Matrix::from_row_major(n1, n2, data)).expect("finite cost")
}

/// Circulant Gram table `K[i][j] = Σ_k cos(2πk d/m) / (1 + k²)` with `d` the
/// cyclic distance between `i` and `j`; diagonally invariant under `Z_m`.
pub fn circulant_kernel(m: usize) -> KernelGram {
    let base: Vec<f64> = (0..m)
        .map(|d| {
            let d = d.min(m - d) as f64;
            (0..m)
                .map(|k| (std::f64::consts::TAU * k as f64 * d / m as f64).cos() / (1.0 + (k * k) as f64))
                .sum()
        })
        .collect();
    let data = (0..m * m).map(|k| base[(k % m + m - k / m) % m]).collect();
    KernelGram::new(Matrix::from_row_major(m, m, data)).expect("positive semidefinite")
}

/// The permutohedron of `(d−1, ..., 1, 0)` under `S_d`.
pub fn permutohedron(d: usize) -> OrbitopeHandle<LinearAction> {
    let action = LinearAction::permutation(Group::symmetric(d).expect("valid degree")).expect("permutation action");
    let lambda = (0..d).rev().map(|x| x as f64).collect();
    OrbitopeHandle::new(action, lambda, None).expect("orbitope")
}

/// A point inside the permutohedron of [`permutohedron`].
pub fn inner_point(d: usize) -> Vec<f64> {
    let mean = (d - 1) as f64 / 2.0;
    (0..d).map(|i| mean + 0.3 * (i as f64 - mean)).collect()
}
