use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use slicesim::memory::HierarchyConfig;
use slicesim::pipeline::{simulate, CoreConfig, Variant};
use slicesim_bench::bench_traces;

fn cores(c: &mut Criterion) {
    let mem = HierarchyConfig::default();
    for trace in bench_traces() {
        let mut group = c.benchmark_group(trace.meta.name.clone());
        group.throughput(Throughput::Elements(trace.len() as u64));
        for v in Variant::ALL {
            let core = CoreConfig::new(v);
            group.bench_with_input(BenchmarkId::from_parameter(v), &core, |b, core| {
                b.iter(|| simulate(&trace, core, &mem).unwrap().cycles)
            });
        }
        group.finish();
    }
}

criterion_group!(benches, cores);
criterion_main!(benches);
