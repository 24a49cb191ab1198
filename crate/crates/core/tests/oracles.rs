//! Solver outputs checked against independent brute-force oracles.

use folner_core::averaging::{folner_average, reynolds_projector};
use folner_core::couplings::{solve_mk, solve_mk_invariant, CostMatrix};
use folner_core::decisions::{invariantize_test, solve_maximin_test, TestingProblem};
use folner_core::embeddings::{mmd, KernelGram};
use folner_core::lp::{enumerate_vertices, solve_lp, Relation};
use folner_core::orbitopes::{majorizes, OrbitopeHandle};
use folner_core::{Element, Group, HalfspaceSystem, LinearAction, LinearProgram, Matrix, PointAction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn transport_polytope(p1: &[f64], p2: &[f64]) -> HalfspaceSystem {
    let (n1, n2) = (p1.len(), p2.len());
    let mut sys = HalfspaceSystem::new(n1 * n2);
    for (i, &m) in p1.iter().enumerate() {
        let mut a = vec![0.0; n1 * n2];
        a[i * n2..(i + 1) * n2].iter_mut().for_each(|x| *x = 1.0);
        sys.eq(a, m);
    }
    for (j, &m) in p2.iter().enumerate().take(n2 - 1) {
        let mut a = vec![0.0; n1 * n2];
        (0..n1).for_each(|i| a[i * n2 + j] = 1.0);
        sys.eq(a, m);
    }
    sys.nonnegative();
    sys
}

#[test]
fn transport_optimum_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (n1, n2) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let p1 = random_probability(&mut rng, n1);
        let p2 = random_probability(&mut rng, n2);
        let c: Vec<f64> = (0..n1 * n2).map(|_| rng.gen_range(0.0..5.0)).collect();
        let cost = CostMatrix::new(Matrix::from_row_major(n1, n2, c.clone())).unwrap();
        let sol = solve_mk(&cost, &p1, &p2).unwrap();

        let vertices = enumerate_vertices(&transport_polytope(&p1, &p2)).unwrap();
        assert!(!vertices.is_empty());
        let brute = vertices
            .iter()
            .map(|v| v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!((sol.primal - brute).abs() < 1e-9, "{} vs {brute}", sol.primal);
        assert!((sol.primal - sol.dual).abs() < 1e-8);
        assert!(sol.potentials.margin > -1e-9);
    }
}

#[test]
fn two_by_two_transport_closed_form() {
    // Couplings of (a, 1-a) and (b, 1-b) form the segment P(0,0) = t.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..3.0)).collect();
        let value = |t: f64| c[0] * t + c[1] * (a - t) + c[2] * (b - t) + c[3] * (1.0 - a - b + t);
        let lo = (a + b - 1.0).max(0.0);
        let hi = a.min(b);
        let brute = value(lo).min(value(hi));
        let cost = CostMatrix::new(Matrix::from_row_major(2, 2, c.clone())).unwrap();
        let sol = solve_mk(&cost, &[a, 1.0 - a], &[b, 1.0 - b]).unwrap();
        assert!((sol.primal - brute).abs() < 1e-10);
    }
}

#[test]
fn lp_matches_vertex_enumeration_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let obj = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let mut lp = LinearProgram::maximize(obj.clone());
        let mut sys = HalfspaceSystem::new(2);
        for _ in 0..4 {
            let a = vec![rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)];
            let b = rng.gen_range(0.5..3.0);
            lp.constrain(a.clone(), Relation::Le, b);
            sys.le(a, b);
        }
        sys.nonnegative();
        let sol = solve_lp(&lp).unwrap();
        let brute = enumerate_vertices(&sys)
            .unwrap()
            .iter()
            .map(|v| v[0] * obj[0] + v[1] * obj[1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(sol.is_optimal());
        assert!((sol.objective - brute).abs() < 1e-9);
    }
}

#[test]
fn invariant_transport_on_cyclic_three() {
    let g = Group::parse("cyclic:3").unwrap();
    let a = PointAction::natural(g).unwrap();
    // Circulant cost: c(i, j) depends on j - i mod 3.
    let base = [0.0, 1.0, 3.0];
    let c = Matrix::from_row_major(3, 3, (0..9).map(|k| base[(k % 3 + 3 - k / 3) % 3]).collect());
    let cost = CostMatrix::new(c).unwrap();
    let u = vec![1.0 / 3.0; 3];
    let sol = solve_mk_invariant(&cost, &u, &u, &a, &a).unwrap();
    assert!(sol.primal.abs() < 1e-12);
    assert!((sol.primal - sol.invariant_primal).abs() < 1e-7);
    assert!((sol.invariant_primal - sol.invariant_dual).abs() < 1e-7);
}

#[test]
fn permutohedron_membership_agrees_with_majorization() {
    let g = Group::parse("sym:3").unwrap();
    let action = LinearAction::permutation(g).unwrap();
    let lambda = vec![3.0, 1.0, 0.0];
    let handle = OrbitopeHandle::new(action, lambda.clone(), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let mut z: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..3.5)).collect();
        let shift = (4.0 - z.iter().sum::<f64>()) / 3.0;
        z.iter_mut().for_each(|x| *x += shift);
        let oracle = majorizes(&lambda, &z, 1e-9);
        let margin = {
            let mut s = z.clone();
            s.sort_by(|a, b| b.total_cmp(a));
            (s[0] - 3.0).abs().min((s[0] + s[1] - 4.0).abs()).min(s[2].abs())
        };
        if margin < 1e-6 {
            continue;
        }
        assert_eq!(handle.membership(&z, 1e-9).unwrap().is_inside(), oracle, "z = {z:?}");
    }
}

#[test]
fn rotation_average_matches_geometric_sum() {
    let action = LinearAction::rotation(1.0).unwrap();
    let family = action.group().family();
    for n in [0usize, 1, 7, 50, 400] {
        let avg = folner_average(&action, &[1.0, 0.0], &family, n).unwrap();
        let (mut re, mut im) = (0.0, 0.0);
        for k in 0..=n {
            re += (k as f64).cos();
            im += (k as f64).sin();
        }
        let m = (n + 1) as f64;
        assert!((avg.value[0] - re / m).abs() < 1e-12);
        assert!((avg.value[1] - im / m).abs() < 1e-12);
    }
}

#[test]
fn folner_ratio_matches_set_count_on_the_plane() {
    let g = Group::parse("zd:2:box").unwrap();
    let family = g.family();
    for n in 0..6usize {
        let window = family.window(n).unwrap();
        for phi in [[1i64, 0], [0, 2], [-1, 1], [3, 3]] {
            let shifted: Vec<Element> = window
                .iter()
                .map(|w| g.compose(&Element::lattice(&phi), w).unwrap())
                .collect();
            let common = shifted.iter().filter(|s| window.contains(s)).count();
            let expected = common as f64 / window.len() as f64;
            let got = family.folner_ratio(n, &Element::lattice(&phi)).unwrap();
            assert_eq!(got, expected, "n = {n}, phi = {phi:?}");
        }
    }
}

#[test]
fn reynolds_projector_is_full_group_mean() {
    let g = Group::parse("dihedral:4").unwrap();
    let action = LinearAction::permutation(g.clone()).unwrap();
    let r = reynolds_projector(&action).unwrap();
    assert!(r.mul(&r).max_abs_diff(&r) < 1e-12);
    let mut mean = Matrix::zeros(4, 4);
    for e in g.elements().unwrap() {
        mean = mean.add(&action.matrix(e).unwrap());
    }
    let mean = mean.scale(1.0 / g.order().unwrap() as f64);
    assert!(mean.max_abs_diff(&r) < 1e-12);
}

#[test]
fn mmd_is_the_gram_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let coords: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let k = KernelGram::gaussian(&coords, 0.7).unwrap();
    for _ in 0..20 {
        let p = random_probability(&mut rng, 5);
        let q = random_probability(&mut rng, 5);
        let d: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
        let quad = k.table().mul_vec(&d).iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        assert!((mmd(&k, &p, &q).unwrap() - quad.max(0.0).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn hunt_stein_on_a_swap_symmetric_problem() {
    let g = Group::parse("cyclic:2").unwrap();
    let action = PointAction::natural(g).unwrap();
    let problem = TestingProblem::new(
        action,
        vec![vec![0.5, 0.5]],
        vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        0.2,
    )
    .unwrap();
    let best = solve_maximin_test(&problem).unwrap();
    // Any test of size 0.2 under the uniform null is a constant-mean rule,
    // and the constant 0.2 already reaches power 0.2 against both alternatives.
    assert!((best.value - 0.2).abs() < 1e-9);
    let inv = invariantize_test(&problem, &best.w).unwrap();
    assert!(inv.value_preserved());
    assert!((inv.w_bar[0] - inv.w_bar[1]).abs() < 1e-12);
}
