use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use calu_bench::{panel, update_operands};
use calu_core::kernels::{gepp, update, DEFAULT_RECURSION_CUTOFF as CUT};
use calu_core::tslu::tslu_factor;

fn panels(c: &mut Criterion) {
    let mut g = c.benchmark_group("panel");
    for (rows, cols) in [(256, 16), (1024, 32)] {
        let p = panel(rows, cols);
        let id = format!("{rows}x{cols}");
        g.bench_with_input(BenchmarkId::new("gepp", &id), &p, |b, p| {
            b.iter(|| gepp(black_box(p), CUT))
        });
        for leaves in [2, 4, 8] {
            g.bench_with_input(
                BenchmarkId::new(format!("tslu-{leaves}"), &id),
                &p,
                |b, p| b.iter(|| tslu_factor(black_box(p), leaves, CUT)),
            );
        }
    }
    g.finish();
}

fn updates(c: &mut Criterion) {
    let mut g = c.benchmark_group("update");
    for b in [16, 32, 64] {
        let (a, l, u) = update_operands(b);
        g.bench_with_input(BenchmarkId::from_parameter(b), &b, |bench, _| {
            bench.iter_batched_ref(
                || a.clone(),
                |t| update(t, &l, &u),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, panels, updates);
criterion_main!(benches);
