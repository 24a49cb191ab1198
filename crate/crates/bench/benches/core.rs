use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use folner_bench::{circulant_transport, cyclic_action, dense_cost, circulant_kernel, inner_point, permutohedron};
use folner_core::averaging::averaging_trace;
use folner_core::couplings::{solve_mk, solve_mk_invariant};
use folner_core::embeddings::symmetrize_kernel;
use folner_core::{Element, Group, LinearAction};

fn windows(c: &mut Criterion) {
    let family = Group::parse("z:box").unwrap().family();
    let phi = Element::lattice(&[5]);
    c.bench_function("folner_ratio z n=10000", |b| {
        b.iter(|| family.folner_ratio(black_box(10_000), &phi).unwrap())
    });
    let family = Group::parse("zd:2:box").unwrap().family();
    let phi = Element::lattice(&[1, -2]);
    c.bench_function("folner_ratio z2 n=60", |b| b.iter(|| family.folner_ratio(black_box(60), &phi).unwrap()));
}

fn averaging(c: &mut Criterion) {
    let action = LinearAction::rotation(1.0).unwrap();
    let family = action.group().family();
    c.bench_function("rotation trace nmax=3000", |b| {
        b.iter(|| averaging_trace(&action, black_box(&[1.0, 0.0]), &family, 3000, None).unwrap())
    });
}

fn transport(c: &mut Criterion) {
    let cost = dense_cost(8, 8);
    let u = vec![0.125; 8];
    c.bench_function("solve_mk 8x8", |b| b.iter(|| solve_mk(&cost, black_box(&u), &u).unwrap()));
    let (cost, p) = circulant_transport(6);
    let a = cyclic_action(6);
    c.bench_function("solve_mk_invariant cyclic:6", |b| {
        b.iter(|| solve_mk_invariant(&cost, black_box(&p), &p, &a, &a).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let k = circulant_kernel(8);
    let a = cyclic_action(8);
    c.bench_function("symmetrize_kernel cyclic:8", |b| b.iter(|| symmetrize_kernel(black_box(&k), &a).unwrap()));
}

fn orbitopes(c: &mut Criterion) {
    let handle = permutohedron(4);
    let z = inner_point(4);
    c.bench_function("permutohedron membership d=4", |b| {
        b.iter(|| handle.membership(black_box(&z), 1e-9).unwrap())
    });
}

criterion_group!(benches, windows, averaging, transport, kernels, orbitopes);
criterion_main!(benches);
