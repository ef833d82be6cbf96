use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use witness_contracts::csrc::parse_program;
use witness_contracts::validate::{Execution, InputStrategy, Validator};
use witness_contracts::witness::{parse_witness, ParseOptions};

fn load(witness: &str, program: &str) -> Validator {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let read = |rel: &str| std::fs::read_to_string(dir.join(rel)).unwrap();
    let p = parse_program(&read(program))
        .unwrap()
        .with_file_name(Path::new(program).file_name().unwrap().to_string_lossy());
    let w = parse_witness(&read(witness), ParseOptions::default()).unwrap().witness;
    Validator::new(&p, &w, Default::default(), Default::default()).unwrap()
}

fn executions() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn exhaustive(c: &mut Criterion) {
    // Satisfied witnesses, so every vector is explored.
    let cases = [
        ("clamp", "contracts/clamp_ok.yml", "programs/clamp.c", 4),
        ("min3", "contracts/min3_ok.yml", "programs/min3.c", 4),
        ("accumulate", "contracts/accumulate_ok.yml", "programs/accumulate.c", 4),
        ("pairs", "contracts/pairs_ok.yml", "programs/pairs.c", 1),
    ];
    let mut group = c.benchmark_group("exhaustive");
    group.sample_size(20);
    for (name, w, p, calls) in cases {
        let validator = load(w, p);
        let strategy = InputStrategy::Exhaustive {
            lo: -8,
            hi: 7,
            max_calls: calls,
        };
        let explored = validator.run(strategy, Execution::Sequential).stats().inputs_explored;
        group.throughput(Throughput::Elements(explored));
        for (label, execution) in executions() {
            group.bench_with_input(BenchmarkId::new(label, name), &strategy, |b, &s| {
                b.iter(|| validator.run(s, execution));
            });
        }
    }
    group.finish();
}

fn randomized(c: &mut Criterion) {
    let validator = load("contracts/fact_ok.yml", "programs/fact.c");
    let mut group = c.benchmark_group("randomized");
    group.sample_size(20);
    let samples = 20_000;
    group.throughput(Throughput::Elements(samples));
    for (label, execution) in executions() {
        let strategy = InputStrategy::Randomized {
            seed: 1,
            samples,
            lo: -8,
            hi: 7,
        };
        group.bench_function(label, |b| b.iter(|| validator.run(strategy, execution)));
    }
    group.finish();
}

criterion_group!(benches, exhaustive, randomized);
criterion_main!(benches);
