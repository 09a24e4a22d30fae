use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tsi_core::eval::{evaluate_detection, evaluate_recognition, EvalConfig};
use tsi_core::interp::{evaluate_interpretation, interpret_corpus};
use tsi_core::metrics::TokenizerMode;
use tsi_core::scene::SceneRecord;
use tsi_core::synth::{
    generate_corpus, perturb_corpus, Generator, GeneratorConfig, NoiseProfile, NoiseVocab,
};
use tsi_core::Exec;

const SCENES: usize = 400;
const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

struct Fixture {
    generator: Generator,
    gt: Vec<SceneRecord>,
    pred: Vec<SceneRecord>,
}

fn fixture() -> Fixture {
    let generator = Generator::new(GeneratorConfig {
        n_scenes: SCENES,
        seed: 11,
        ..Default::default()
    })
    .unwrap();
    let gt = generate_corpus(&generator, Exec::Parallel)
        .unwrap()
        .corpus
        .scenes;
    let vocab = NoiseVocab::from_grammar(generator.grammar(), &generator.vocab().destinations);
    let (pred, _) =
        perturb_corpus(&gt, &NoiseProfile::light(), &vocab, 12, Exec::Parallel).unwrap();
    Fixture {
        generator,
        gt,
        pred,
    }
}

fn bench_pipeline(c: &mut Criterion) {
    let f = fixture();
    let rules = f.generator.slot_rules().unwrap();
    let config = EvalConfig::default();

    let mut g = c.benchmark_group("generate");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| generate_corpus(black_box(&f.generator), exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("interpret");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| interpret_corpus(black_box(&f.pred), f.generator.grammar(), exec))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("evaluate");
    let records: Vec<_> = interpret_corpus(&f.pred, f.generator.grammar(), Exec::Parallel)
        .iter()
        .flat_map(|s| s.records())
        .collect();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("detection", name), &exec, |b, &exec| {
            b.iter(|| {
                evaluate_detection(black_box(&f.gt), black_box(&f.pred), &config, exec).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("recognition", name), &exec, |b, &exec| {
            b.iter(|| {
                evaluate_recognition(black_box(&f.gt), black_box(&f.pred), &config, exec).unwrap()
            })
        });
        g.bench_with_input(
            BenchmarkId::new("interpretation", name),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    evaluate_interpretation(
                        black_box(&f.gt),
                        &records,
                        &rules,
                        TokenizerMode::Auto,
                        exec,
                    )
                    .unwrap()
                })
            },
        );
    }
    g.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
