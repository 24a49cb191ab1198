use folner_core::averaging::{invariance_defect, reynolds_apply};
use folner_core::cocycles::skew_symmetrize;
use folner_core::couplings::{marginals, solve_mk, symmetrize_coupling, CostMatrix};
use folner_core::embeddings::{ergodic_decomposition, mmd, KernelGram};
use folner_core::{Element, Group, LinearAction, Matrix, PointAction};
use proptest::prelude::*;

const GROUPS: [&str; 5] = ["cyclic:4", "dihedral:4", "sym:3", "product(cyclic:2,cyclic:2)", "cyclic:5"];

fn group_and_vector() -> impl Strategy<Value = (Group, Vec<f64>)> {
    (0..GROUPS.len()).prop_flat_map(|i| {
        let g = Group::parse(GROUPS[i]).unwrap();
        let d = g.degree().unwrap();
        (Just(g), prop::collection::vec(-10.0f64..10.0, d))
    })
}

fn normalized(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

proptest! {
    #[test]
    fn reynolds_output_is_invariant_and_idempotent((g, x) in group_and_vector()) {
        let action = LinearAction::permutation(g).unwrap();
        let r = reynolds_apply(&action, &x).unwrap();
        prop_assert!(invariance_defect(&action, &r).unwrap() < 1e-12);
        let rr = reynolds_apply(&action, &r).unwrap();
        for (a, b) in r.iter().zip(&rr) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = x.iter().sum();
        prop_assert!((r.iter().sum::<f64>() - total).abs() < 1e-9);
    }

    #[test]
    fn ergodic_decomposition_reconstructs_invariant_measures((g, w) in group_and_vector()) {
        let action = PointAction::natural(g).unwrap();
        let p = action.reynolds(&normalized(w.iter().map(|x| x.abs() + 0.1).collect())).unwrap();
        let dec = ergodic_decomposition(&action, &p).unwrap();
        let back = dec.reconstruct(action.carrier());
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert_eq!(dec.extreme, dec.components.iter().filter(|c| c.weight > 1e-9).count() == 1);
    }

    #[test]
    fn symmetrized_coupling_keeps_invariant_marginals(
        (g, w) in group_and_vector(),
        c in prop::collection::vec(0.0f64..5.0, 25),
    ) {
        let action = PointAction::natural(g).unwrap();
        let m = action.carrier();
        let p = action.reynolds(&normalized(w.iter().map(|x| x.abs() + 0.1).collect())).unwrap();
        let cost = CostMatrix::new(Matrix::from_row_major(m, m, c[..m * m].to_vec())).unwrap();
        let plan = solve_mk(&cost, &p, &p).unwrap().coupling;
        let sym = symmetrize_coupling(&plan, &action, &action).unwrap();
        let (rs, cs) = marginals(&sym.coupling);
        for (a, b) in rs.iter().zip(&p).chain(cs.iter().zip(&p)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(sym.marginal_error < 1e-9);
        let again = symmetrize_coupling(&sym.coupling, &action, &action).unwrap();
        prop_assert!(again.was_invariant);
    }

    #[test]
    fn skew_symmetrizer_is_a_projector(x in prop::collection::vec(-1.0f64..1.0, 27)) {
        let once = skew_symmetrize(&x, 3, 3).unwrap();
        let twice = skew_symmetrize(&once, 3, 3).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // Swapping the first two slots flips the sign.
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    prop_assert!((once[i * 9 + j * 3 + k] + once[j * 9 + i * 3 + k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mmd_is_a_symmetric_nonnegative_distance(
        coords in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 4),
        p in prop::collection::vec(0.01f64..1.0, 4),
        q in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let k = KernelGram::gaussian(&coords, 1.0).unwrap();
        let (p, q) = (normalized(p), normalized(q));
        let d = mmd(&k, &p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - mmd(&k, &q, &p).unwrap()).abs() < 1e-12);
        prop_assert_eq!(mmd(&k, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn integer_window_ratios_follow_the_formula(n in 0usize..2000, t in 0i64..50) {
        let g = Group::parse("z:box").unwrap();
        let ratio = g.family().folner_ratio(n, &Element::lattice(&[t])).unwrap();
        let expected = (n as i64 + 1 - t).max(0) as f64 / (n + 1) as f64;
        prop_assert_eq!(ratio, expected);
    }
}
