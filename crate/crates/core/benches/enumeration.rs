use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tropical_refined::curve::Degree;
use tropical_refined::enumeration::{enumerate_through, random_config, EnumOptions};
use tropical_refined::invariants::{aggregate, InvariantKind};
use tropical_refined::parallel::Parallelism;
use tropical_refined::verification::fuzz_relations;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_through");
    group.sample_size(10);
    for (d, r, s) in [(3, 8, 0), (3, 4, 2)] {
        let degree = Degree::p2(d);
        let (cfg, _) = random_config(&degree, r, s, 1, &EnumOptions::default()).expect("generic configuration");
        for (name, par) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("d{d}_r{r}_s{s}")), &cfg, |b, cfg| {
                b.iter(|| enumerate_through(&degree, black_box(cfg), par).unwrap())
            });
        }
    }
    group.finish();
}

fn invariants(c: &mut Criterion) {
    let degree = Degree::p2(3);
    let (_, report) = random_config(&degree, 8, 0, 1, &EnumOptions::default()).expect("generic configuration");
    let mut group = c.benchmark_group("aggregate");
    for (name, par) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| aggregate(InvariantKind::RefinedBroccoli, &degree, black_box(&report), par).unwrap())
        });
    }
    group.finish();
}

fn relations(c: &mut Criterion) {
    let mut group = c.benchmark_group("fuzz_relations_200");
    group.sample_size(10);
    for (name, par) in MODES {
        group.bench_function(name, |b| b.iter(|| fuzz_relations(200, 10, black_box(1), par)));
    }
    group.finish();
}

criterion_group!(benches, enumeration, invariants, relations);
criterion_main!(benches);
