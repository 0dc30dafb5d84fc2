use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pfmin_core::generators::{gen_example1, gen_random_sum};
use pfmin_core::moments::pushforward_table_single;
use pfmin_core::{HierarchyOptions, Method, Sweep};

fn table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("pushforward_table");
    group.sample_size(10);
    for n in [3usize, 5] {
        let p = gen_example1(n).unwrap();
        let f = &p.fractions[0];
        group.bench_with_input(BenchmarkId::new("example1_depth9", n), &n, |b, _| {
            b.iter(|| pushforward_table_single(&f.num, &f.den, 9, &p.oracle()).unwrap())
        });
    }
    group.finish();
}

fn single_fraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_fraction");
    group.sample_size(10);
    let p = gen_example1(3).unwrap();
    for (method, d) in [(Method::Push, 4u32), (Method::Push, 8), (Method::Std, 4)] {
        group.bench_function(format!("{}_n3_d{d}", method.tag()), |b| {
            b.iter(|| {
                Sweep::new(&p, method, HierarchyOptions::default())
                    .unwrap()
                    .solve(d, None)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("sum");
    group.sample_size(10);
    let p = gen_random_sum(2, 2, 1, 10_000).unwrap();
    for method in [Method::StdSum, Method::PushSum] {
        group.bench_function(format!("{}_N2_n2_d2", method.tag()), |b| {
            b.iter(|| {
                Sweep::new(&p, method, HierarchyOptions::default())
                    .unwrap()
                    .solve(2, Some(2))
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, table_build, single_fraction, sums);
criterion_main!(benches);
