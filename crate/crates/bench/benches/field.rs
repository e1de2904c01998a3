use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qlde::{Fe, Field};
use qlde_bench::fixture;

fn field_ops(c: &mut Criterion) {
    let f = Field::with_degree(8).unwrap();
    let xs: Vec<Fe> = f.enumerate().collect();
    c.bench_function("gf256_mul_all_pairs", |b| {
        b.iter(|| {
            let mut acc = Fe::ZERO;
            for &x in &xs {
                for &y in &xs {
                    acc = f.add(acc, f.mul(x, y));
                }
            }
            black_box(acc)
        })
    });
    c.bench_function("gf256_inv_all", |b| b.iter(|| xs[1..].iter().map(|&x| f.inv(x).unwrap().0 as u32).sum::<u32>()));
}

fn lde(c: &mut Criterion) {
    let fx = fixture(4, 2, 4, 1);
    c.bench_function("lde_interpolate_gf16_d2_h4", |b| {
        b.iter(|| qlde::mpoly::interpolate_lde(black_box(&fx.params), &fx.data).unwrap())
    });
    let fx3 = fixture(4, 3, 2, 1);
    c.bench_function("qlde_state_gf16_d3_h2", |b| {
        b.iter(|| qlde::qsim::build_qlde_state(black_box(&fx3.params), &fx3.data).unwrap())
    });
}

criterion_group!(benches, field_ops, lde);
criterion_main!(benches);
