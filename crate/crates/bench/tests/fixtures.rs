use folner_bench::{circulant_kernel, circulant_transport, cyclic_action, dense_cost, inner_point, permutohedron};
use folner_core::embeddings::check_diagonal_invariance;

#[test]
fn fixtures_have_the_advertised_symmetry() {
    for m in [3, 6, 8] {
        let a = cyclic_action(m);
        assert!(check_diagonal_invariance(&circulant_kernel(m), &a).unwrap().passed);
        let (cost, p) = circulant_transport(m);
        assert!(cost.is_diagonally_invariant(&a, &a).unwrap());
        assert!(a.is_invariant(&p, 0.0));
    }
    assert_eq!(dense_cost(3, 4).shape(), (3, 4));
}

#[test]
fn inner_point_lies_in_the_permutohedron() {
    for d in 2..=4 {
        assert!(permutohedron(d).membership(&inner_point(d), 1e-9).unwrap().is_inside());
    }
}
