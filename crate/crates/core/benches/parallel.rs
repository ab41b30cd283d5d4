//! Parallel vs sequential on the three hot loops: co-occurrence counting,
//! per-question dedup and the seq2seq batch gradient. "sequential" runs the
//! same library call inside a one-thread rayon pool, so the only difference
//! is the worker count. Results are asserted equal before timing.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use snipforge::corpus::{dedup_answers, Sample, Source};
use snipforge::embed::{build_cooccurrence, Vocabulary};
use snipforge::seq2seq::{batch_gradient, vectorize, PairTokens, Seq2SeqConfig, Seq2SeqModel, Seq2SeqVocabs};

fn corpus(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| (0..rng.gen_range(5..40)).map(|_| format!("t{}", rng.gen_range(0..500))).collect())
        .collect()
}

fn pools() -> [(&'static str, rayon::ThreadPool); 2] {
    [
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn cooccurrence(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sents = corpus(4000, &mut rng);
    let vocab = Vocabulary::build(&sents, 1, usize::MAX);
    let [(_, one), (_, many)] = pools();
    assert_eq!(
        one.install(|| build_cooccurrence(&sents, &vocab, 10)),
        many.install(|| build_cooccurrence(&sents, &vocab, 10))
    );
    let mut g = c.benchmark_group("cooccurrence");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, sents.len()), |b| {
            b.iter(|| pool.install(|| build_cooccurrence(black_box(&sents), &vocab, 10)))
        });
    }
    g.finish();
}

fn dedup(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples: Vec<Sample> = corpus(3000, &mut rng)
        .into_iter()
        .enumerate()
        .map(|(i, toks)| Sample::new((i / 6) as u64, "q", toks.join(" + "), Source::Curated))
        .collect();
    let mut g = c.benchmark_group("dedup");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, samples.len()), |b| {
            b.iter(|| pool.install(|| dedup_answers(black_box(&samples), None, 0.5).kept.len()))
        });
    }
    g.finish();
}

fn seq2seq_gradient(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = Seq2SeqConfig {
        intent_len: 12,
        code_len: 24,
        hidden: 64,
        embed_dim: 32,
        ..Seq2SeqConfig::default()
    };
    let words = corpus(256, &mut rng);
    let pairs: Vec<PairTokens> = words
        .chunks(2)
        .map(|w| PairTokens { intent: w[0].clone(), code: w[1].clone() })
        .collect();
    let vocabs = Seq2SeqVocabs::build(&pairs, &cfg);
    let model = Seq2SeqModel::new(&cfg, vocabs, None, None, &mut rng);
    let examples: Vec<_> = pairs.iter().map(|p| vectorize(p, &cfg, &model.vocabs)).collect();
    let batch: Vec<_> = examples.iter().collect();
    let [(_, one), (_, many)] = pools();
    let a = one.install(|| batch_gradient(&model, &batch, false, false).1);
    let b = many.install(|| batch_gradient(&model, &batch, false, false).1);
    assert_eq!(a.loss.to_bits(), b.loss.to_bits());
    let mut g = c.benchmark_group("seq2seq_batch_gradient");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, batch.len()), |b| {
            b.iter(|| pool.install(|| batch_gradient(&model, black_box(&batch), false, false).1.loss))
        });
    }
    g.finish();
}

criterion_group!(benches, cooccurrence, dedup, seq2seq_gradient);
criterion_main!(benches);
