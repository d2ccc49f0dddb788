use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use frustfree_core::lattice::Lattice;
use frustfree_core::percolation::{degeneracy_bound, run_trial};
use frustfree_core::monte_carlo_scaling;

fn single_trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("percolation_trial");
    for l in [16, 64, 256] {
        let lattice = Lattice::grid(&[l, l], false);
        group.throughput(Throughput::Elements(lattice.edges.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(l), &lattice, |b, lattice| {
            let mut stream = 0;
            b.iter(|| {
                stream += 1;
                degeneracy_bound(&run_trial(black_box(lattice), 0.6, 42, stream))
            })
        });
    }
    group.finish();
}

fn scaling_report(c: &mut Criterion) {
    let mut group = c.benchmark_group("percolation_scaling");
    group.sample_size(10);
    group.bench_function("d2_L16_32_64_200trials", |b| {
        b.iter(|| monte_carlo_scaling(2, 0.6, black_box(&[16, 32, 64]), 200, 42, false).unwrap())
    });
    group.finish();
}

criterion_group!(benches, single_trial, scaling_report);
criterion_main!(benches);
