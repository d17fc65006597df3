use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use extphase::harness::{endpoint_error, ConfigOverrides, ExperimentConfig, NumOrText};
use extphase::par::{par_map, seq_map};

fn configs() -> Vec<ExperimentConfig> {
    [0.02, 0.01, 0.005, 0.0025, 0.00125, 0.000625]
        .iter()
        .map(|&h| {
            ExperimentConfig::from_layers(&[ConfigOverrides {
                problem: Some("schwarzschild".into()),
                h: Some(NumOrText::Text(format!("{h}P"))),
                orbits: Some(2.0),
                ..Default::default()
            }])
            .expect("valid config")
        })
        .collect()
}

fn error_of(cfg: &ExperimentConfig) -> f64 {
    endpoint_error(cfg).expect("run succeeds")
}

fn bench(c: &mut Criterion) {
    let cfgs = configs();
    let mut g = c.benchmark_group("independent_runs");
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("sequential", cfgs.len()), &cfgs, |b, cfgs| {
        b.iter(|| seq_map(cfgs, error_of))
    });
    g.bench_with_input(BenchmarkId::new("parallel", cfgs.len()), &cfgs, |b, cfgs| {
        b.iter(|| par_map(cfgs, error_of))
    });
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
