//! End-to-end acceptance checks, one test per criterion. Each prints a
//! `criterion N <name>: PASS|FAIL` line before asserting, so
//! `cargo test --test acceptance -- --nocapture` gives a one-screen summary.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use snipforge::classifier::{train_classifier, ClassifierConfig, Mlp};
use snipforge::codelex::{detokenize, normalize, tokenize, ApiWhitelist};
use snipforge::corpus::{
    clean_intent, clean_snippet, curate, dedup_answers, load_samples, write_jsonl, CurationConfig, CurationInputs,
    InputFormat, Sample, Source, NEGATIVE_RETRY_BUDGET,
};
use snipforge::embed::{
    build_cooccurrence, pca, train_glove, train_skipgram, GloveConfig, SkipgramConfig, Vocabulary,
};
use snipforge::evalkit::{confusion, pr_auc, roc_auc, Confusion, MetricsReport};
use snipforge::numkit::{
    dense_backward, dense_forward, grad_check, lstm_cell_backward, lstm_cell_step_cached, loss, uniform,
    Activation, LossKind, LstmCellParams, Tensor,
};
use snipforge::numkit::vecops::cosine;
use snipforge::pipeline::{run_all, PipelineConfig, RunContext};
use snipforge::seq2seq::{evaluate, score, train, vectorize, PairTokens, Seq2SeqConfig, Seq2SeqModel, Seq2SeqVocabs};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} {name} failed: {detail}");
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_inputs() -> CurationInputs {
    let dir = fixtures();
    let load = |name: &str, src| load_samples(&dir.join(name), InputFormat::Jsonl, src).unwrap();
    let (c, m, s) = (
        load("conala_curated.jsonl", Source::Curated),
        load("conala_mined.jsonl", Source::Mined),
        load("staqc.jsonl", Source::Staqc),
    );
    let mut load_rejects = c.rejects;
    load_rejects.extend(m.rejects);
    load_rejects.extend(s.rejects);
    CurationInputs {
        conala_curated: c.samples,
        conala_mined: m.samples,
        staqc: s.samples,
        load_rejects,
    }
}

// ---------------------------------------------------------------- 1

fn flat(ts: &[&Tensor]) -> Vec<f64> {
    ts.iter().flat_map(|t| t.data().iter().copied()).collect()
}

fn unflat(p: &[f64], ts: &mut [&mut Tensor]) {
    let mut off = 0;
    for t in ts.iter_mut() {
        let n = t.len();
        t.data_mut().copy_from_slice(&p[off..off + n]);
        off += n;
    }
}

fn dense_stack_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [5, 4, 3, 1];
    let acts = [Activation::Tanh, Activation::Sigmoid, Activation::Sigmoid];
    let mut params: Vec<Tensor> = Vec::new();
    for w in dims.windows(2) {
        params.push(uniform(&mut rng, &[w[0], w[1]], -0.8, 0.8));
        params.push(uniform(&mut rng, &[w[1]], -0.3, 0.3));
    }
    let x = uniform(&mut rng, &[7, 5], -1.0, 1.0);
    let y = Tensor::new(vec![7, 1], (0..7).map(|i| (i % 2) as f64).collect()).unwrap();
    let p0 = flat(&params.iter().collect::<Vec<_>>());
    grad_check(
        |p| {
            let mut ps = params.clone();
            unflat(p, &mut ps.iter_mut().collect::<Vec<_>>());
            let mut inputs = vec![x.clone()];
            for (k, act) in acts.iter().enumerate() {
                let out = dense_forward(&inputs[k], &ps[2 * k], &ps[2 * k + 1], *act).unwrap();
                inputs.push(out);
            }
            let (l, mut dy) = loss(LossKind::Bce, &inputs[3], &y).unwrap();
            let mut grads = vec![Tensor::zeros(&[0]); 6];
            for k in (0..3).rev() {
                let g = dense_backward(&inputs[k], &ps[2 * k], &inputs[k + 1], &dy, acts[k]).unwrap();
                grads[2 * k] = g.dw;
                grads[2 * k + 1] = g.db;
                dy = g.dx;
            }
            (l, flat(&grads.iter().collect::<Vec<_>>()))
        },
        &p0,
        1e-6,
    )
    .unwrap()
}

fn lstm_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, h, steps) = (3, 4, 4);
    let base = LstmCellParams::init(&mut rng, d, h);
    let xs: Vec<Vec<f64>> = (0..steps).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    // Loss = a·h_T + b·c_T with fixed random weights a, b.
    let a: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p0 = flat(&[&base.w, &base.u, &base.b]);
    grad_check(
        |p| {
            let mut ps = base.clone();
            unflat(p, &mut [&mut ps.w, &mut ps.u, &mut ps.b]);
            let (mut hs, mut cs) = (vec![0.0; h], vec![0.0; h]);
            let mut caches = Vec::new();
            for x in &xs {
                let (hn, cn, cache) = lstm_cell_step_cached(x, &hs, &cs, &ps);
                hs = hn;
                cs = cn;
                caches.push(cache);
            }
            let l: f64 = hs.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>()
                + cs.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
            let mut grads = ps.zeros_like();
            let (mut dh, mut dc) = (a.clone(), b.clone());
            for cache in caches.iter().rev() {
                let (_, dhp, dcp) = lstm_cell_backward(&ps, cache, &dh, &dc, &mut grads, false);
                dh = dhp;
                dc = dcp;
            }
            (l, flat(&[&grads.w, &grads.u, &grads.b]))
        },
        &p0,
        1e-6,
    )
    .unwrap()
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn seq2seq_error(seed: u64) -> f64 {
    let cfg = Seq2SeqConfig {
        intent_len: 4,
        code_len: 5,
        hidden: 4,
        embed_dim: 3,
        freeze_embeddings: false,
        ..Seq2SeqConfig::default()
    };
    let pairs = vec![
        PairTokens { intent: words("sort the list"), code: words("x = sorted ( x )") },
        PairTokens { intent: words("open a file"), code: words("open ( x )") },
    ];
    let vocabs = Seq2SeqVocabs::build(&pairs, &cfg);
    let model = Seq2SeqModel::new(&cfg, vocabs, None, None, &mut ChaCha8Rng::seed_from_u64(seed));
    let ex = vectorize(&pairs[(seed % 2) as usize], &cfg, &model.vocabs);
    let p0 = model.flat_params();
    grad_check(
        |p| {
            let mut m = model.clone();
            m.set_flat_params(p);
            let mut g = m.zero_grads(true);
            let s = m.forward_backward(&ex, seed % 2 == 0, 1.0, Some(&mut g));
            (s.loss, m.flat_grads(&g))
        },
        &p0,
        1e-5,
    )
    .unwrap()
}

fn classifier_error(seed: u64) -> f64 {
    let cfg = ClassifierConfig { hidden: vec![6, 4, 3], ..ClassifierConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Mlp::new(5, &cfg, &mut rng);
    // Biases off zero keep pre-activations clear of the ReLU kink.
    for (_, b) in &mut model.layers {
        *b = uniform(&mut rng, b.shape(), 0.1, 0.3);
    }
    let x = uniform(&mut rng, &[8, 5], -1.0, 1.0);
    let y: Vec<bool> = (0..8).map(|i| i % 3 == 0).collect();
    let p0: Vec<f64> = model.layers.iter().flat_map(|(w, b)| flat(&[w, b])).collect();
    grad_check(
        |p| {
            let mut m = model.clone();
            unflat(p, &mut m.layers.iter_mut().flat_map(|(w, b)| [w, b]).collect::<Vec<_>>());
            let mut mask_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0);
            let (l, g, _) = m.loss_and_grads(&x, &y, true, &mut mask_rng).unwrap();
            (l, g.iter().flat_map(|(w, b)| flat(&[w, b])).collect())
        },
        &p0,
        1e-6,
    )
    .unwrap()
}

#[test]
fn criterion_01_gradient_suite() {
    let t0 = Instant::now();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for seed in SEEDS {
        for (name, err) in [
            ("dense", dense_stack_error(seed)),
            ("lstm", lstm_error(seed)),
            ("seq2seq", seq2seq_error(seed)),
            ("classifier", classifier_error(seed)),
        ] {
            let w = worst.entry(name).or_insert(0.0);
            *w = w.max(err);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let ok = worst.values().all(|&e| e < 1e-4) && secs < 120.0;
    verdict(1, "gradient suite", ok, &format!("max rel err {worst:?}, {secs:.2}s"));
}

// ---------------------------------------------------------------- 2

type Counts = BTreeMap<String, i64>;

fn counts(snippet: &str) -> Option<Counts> {
    let seq = tokenize(snippet).ok()?;
    let mut c = Counts::new();
    for t in seq.tokens {
        *c.entry(t.text).or_insert(0) += 1;
    }
    Some(c)
}

/// `cos(a, b) >= t` decided in exact integer arithmetic.
fn similar(a: &Counts, b: &Counts, t: f64) -> bool {
    let dot: i64 = a.iter().map(|(k, x)| x * b.get(k).copied().unwrap_or(0)).sum();
    let na: i64 = a.values().map(|x| x * x).sum();
    let nb: i64 = b.values().map(|x| x * x).sum();
    if na == 0 || nb == 0 {
        return t <= 0.0;
    }
    (dot * dot) as f64 >= t * t * (na as f64) * (nb as f64) && dot >= 0
}

#[derive(Default, Debug, PartialEq)]
struct OracleCounts {
    prob: usize,
    length: usize,
    faulty: usize,
    dedup: usize,
    overlap: usize,
}

/// Exhaustive keep-first dedup: the full pairwise similarity matrix per
/// question, then a scan that keeps an answer iff it is not similar to any
/// earlier kept answer of that question.
fn oracle_dedup(samples: &[Sample], t: f64) -> (Vec<usize>, usize) {
    let vecs: Vec<Counts> = samples.iter().map(|s| counts(&s.snippet).unwrap()).collect();
    let n = samples.len();
    let mut kept = Vec::new();
    let mut removed = 0;
    for i in 0..n {
        let dup = (0..i).any(|j| {
            samples[j].question_id == samples[i].question_id && kept.contains(&j) && similar(&vecs[i], &vecs[j], t)
        });
        if dup {
            removed += 1;
        } else {
            kept.push(i);
        }
    }
    (kept, removed)
}

fn oracle_source(raw: &[Sample], cfg: &CurationConfig, c: &mut OracleCounts) -> Vec<Sample> {
    let mut survivors = Vec::new();
    for s in raw {
        let (intent, snippet) = (clean_intent(&s.intent), clean_snippet(&s.snippet));
        if intent.is_empty() || snippet.is_empty() {
            c.faulty += 1;
        } else if snippet.lines().count() > cfg.max_lines {
            c.length += 1;
        } else if tokenize(&snippet).is_err() {
            c.faulty += 1;
        } else {
            survivors.push(Sample { intent, snippet, ..s.clone() });
        }
    }
    let (kept, removed) = oracle_dedup(&survivors, cfg.sim_threshold);
    c.dedup += removed;
    kept.into_iter().map(|i| survivors[i].clone()).collect()
}

fn oracle_curate(inp: &CurationInputs, cfg: &CurationConfig) -> (OracleCounts, Vec<Sample>) {
    let mut c = OracleCounts::default();
    let mut conala = inp.conala_curated.clone();
    for s in &inp.conala_mined {
        if s.prob.unwrap() >= cfg.prob_threshold {
            conala.push(s.clone());
        } else {
            c.prob += 1;
        }
    }
    let conala = oracle_source(&conala, cfg, &mut c);
    let staqc = oracle_source(&inp.staqc, cfg, &mut c);
    let qids: HashSet<u64> = conala.iter().map(|s| s.question_id).collect();
    let mut merged = conala.clone();
    for s in staqc {
        let v = counts(&s.snippet).unwrap();
        let clash = qids.contains(&s.question_id)
            || merged
                .iter()
                .any(|k| k.intent == s.intent && similar(&counts(&k.snippet).unwrap(), &v, cfg.sim_threshold));
        if clash {
            c.overlap += 1;
        } else {
            merged.push(s);
        }
    }
    (c, merged)
}

/// Replays the negative draws: one uniform index per attempt, first
/// foreign-question draw wins.
fn oracle_negatives(pos: &[Sample], seed: u64) -> Vec<(u64, String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in pos {
        for _ in 0..NEGATIVE_RETRY_BUDGET {
            let o = &pos[rng.gen_range(0..pos.len())];
            if o.question_id != p.question_id {
                out.push((p.question_id, p.intent.clone(), o.snippet.clone()));
                break;
            }
        }
    }
    out
}

#[test]
fn criterion_02_curation_oracle() {
    let inputs = fixture_inputs();
    let cfg = CurationConfig { rng_seed: 11, ..CurationConfig::default() };
    let ingested = inputs.conala_curated.len() + inputs.conala_mined.len() + inputs.staqc.len();
    let (oc, opos) = oracle_curate(&inputs, &cfg);
    let oneg = oracle_negatives(&opos, cfg.rng_seed);
    let out = curate(inputs.clone(), &cfg).unwrap();
    let r = &out.report;
    let got = OracleCounts {
        prob: r.prob_filtered,
        length: r.length_filtered,
        faulty: r.faulty_removed,
        dedup: r.dedup_removed,
        overlap: r.overlap_removed,
    };
    let pos: Vec<&Sample> = out.samples.iter().filter(|s| s.label == Some(1)).collect();
    let neg: Vec<(u64, String, String)> = out
        .samples
        .iter()
        .filter(|s| s.label == Some(0))
        .map(|s| (s.question_id, s.intent.clone(), s.snippet.clone()))
        .collect();
    let same_pos = pos.len() == opos.len()
        && pos.iter().zip(&opos).all(|(a, b)| {
            (a.question_id, &a.intent, &a.snippet, a.source) == (b.question_id, &b.intent, &b.snippet, b.source)
        });
    let counts_ok = got == oc
        && r.ingested == ingested
        && r.positives == opos.len()
        && r.negatives == oneg.len()
        && r.total == opos.len() + oneg.len()
        && r.check().is_ok();

    // Dedup against the exhaustive filter on every question group of the
    // cleaned curated set, plus the post-condition on kept pairs.
    let cleaned: Vec<Sample> = inputs
        .conala_curated
        .iter()
        .map(|s| Sample { intent: clean_intent(&s.intent), snippet: clean_snippet(&s.snippet), ..s.clone() })
        .filter(|s| !s.snippet.is_empty() && tokenize(&s.snippet).is_ok())
        .collect();
    let d = dedup_answers(&cleaned, None, cfg.sim_threshold);
    let (okept, oremoved) = oracle_dedup(&cleaned, cfg.sim_threshold);
    let dedup_ok = d.kept.len() == okept.len()
        && d.removed.len() == oremoved
        && d.kept.iter().zip(&okept).all(|(a, &i)| a == &cleaned[i])
        && d.kept.iter().enumerate().all(|(i, a)| {
            d.kept[..i].iter().all(|b| {
                a.question_id != b.question_id
                    || !similar(&counts(&a.snippet).unwrap(), &counts(&b.snippet).unwrap(), cfg.sim_threshold)
            })
        });

    let ok = counts_ok && same_pos && neg == oneg && dedup_ok && d.removed.len() > 0;
    verdict(
        2,
        "curation oracle",
        ok,
        &format!(
            "ingested {ingested}, oracle {oc:?}, got {got:?}, positives {}, negatives {}, dedup kept {} removed {}",
            r.positives,
            r.negatives,
            d.kept.len(),
            d.removed.len()
        ),
    );
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_03_negative_invariants() {
    let cfg = CurationConfig { rng_seed: 42, ..CurationConfig::default() };
    let a = curate(fixture_inputs(), &cfg).unwrap();
    let b = curate(fixture_inputs(), &cfg).unwrap();
    let snippets_of: HashMap<u64, HashSet<&str>> = a
        .samples
        .iter()
        .filter(|s| s.label == Some(1))
        .fold(HashMap::new(), |mut m, s| {
            m.entry(s.question_id).or_insert_with(HashSet::new).insert(s.snippet.as_str());
            m
        });
    let neg: Vec<&Sample> = a.samples.iter().filter(|s| s.label == Some(0)).collect();
    let foreign = neg.iter().all(|s| {
        let src = s.snippet_qid();
        src != s.question_id
            && snippets_of.get(&src).is_some_and(|set| set.contains(s.snippet.as_str()))
            && !snippets_of[&s.question_id].contains(s.snippet.as_str())
    });
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_jsonl(&pa, &a.samples).unwrap();
    write_jsonl(&pb, &b.samples).unwrap();
    let identical = std::fs::read(&pa).unwrap() == std::fs::read(&pb).unwrap();
    let ok = !neg.is_empty() && foreign && identical;
    verdict(
        3,
        "negative invariants",
        ok,
        &format!("{} negatives, foreign qid {foreign}, rerun byte-identical {identical}", neg.len()),
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_lexer_round_trip() {
    let inp = fixture_inputs();
    let snippets: BTreeSet<String> = inp
        .conala_curated
        .iter()
        .chain(&inp.conala_mined)
        .chain(&inp.staqc)
        .map(|s| clean_snippet(&s.snippet))
        .filter(|s| !s.is_empty())
        .collect();
    let mut lexed = 0;
    let mut failures = Vec::new();
    for s in &snippets {
        let Ok(first) = tokenize(s) else { continue };
        lexed += 1;
        let again = tokenize(&detokenize(&first)).map(|t| t.into_texts());
        if again.as_ref().ok() != Some(&first.clone().into_texts()) {
            failures.push(s.clone());
        }
    }

    let wl = ApiWhitelist::load(&fixtures().join("member_db.txt")).unwrap();
    let n = normalize(&tokenize("np.fromfunction(f, shape=(d1, d2))").unwrap(), &wl);
    let replaced: BTreeSet<&str> = n.var_map.keys().map(String::as_str).collect();
    let kept: BTreeSet<&str> = n.texts().into_iter().filter(|t| t.chars().all(|c| c.is_alphanumeric())).collect();
    let fig_ok = replaced == BTreeSet::from(["f", "d1", "d2"])
        && kept == BTreeSet::from(["np", "fromfunction", "shape"])
        && n.texts().iter().filter(|t| **t == "<VAR_NAME>").count() == 3;

    let ok = lexed >= 300 && failures.is_empty() && fig_ok;
    verdict(
        4,
        "lexer round trip",
        ok,
        &format!(
            "{lexed} distinct snippets, {} mismatches, normalized {replaced:?}, kept {kept:?}",
            failures.len()
        ),
    );
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_seq2seq_overfit() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let code_pool: Vec<String> = (0..40).map(|i| format!("c{i}")).collect();
    let mut intents = BTreeSet::new();
    while intents.len() < 32 {
        let mut w: Vec<usize> = (0..12).collect();
        w.shuffle(&mut rng);
        intents.insert(w[..3].to_vec());
    }
    let pairs: Vec<PairTokens> = intents
        .into_iter()
        .map(|w| {
            let len = rng.gen_range(3..=6);
            PairTokens {
                intent: w.iter().map(|i| format!("w{i}")).collect(),
                code: (0..len).map(|_| code_pool.choose(&mut rng).unwrap().clone()).collect(),
            }
        })
        .collect();
    let cfg = Seq2SeqConfig {
        intent_len: 3,
        code_len: 6,
        hidden: 100,
        embed_dim: 16,
        freeze_embeddings: false,
        epochs: 300,
        batch: 8,
        lr: 0.01,
        mask_pad: true,
        early_stop_accuracy: Some(1.0),
        ..Seq2SeqConfig::default()
    };
    let vocabs = Seq2SeqVocabs::build(&pairs, &cfg);
    let v = vocabs.code.len();
    let model = Seq2SeqModel::new(&cfg, vocabs, None, None, &mut ChaCha8Rng::seed_from_u64(3));
    let examples: Vec<_> = pairs.iter().map(|p| vectorize(p, &cfg, &model.vocabs)).collect();
    let initial = score(&model, &examples, true).mean_loss();
    let ln_v = (v as f64).ln();
    let out = train(model, &examples, None, &cfg, 9).unwrap();
    let reached = out.history.records.iter().find(|r| r.accuracy >= 0.99).map(|r| r.epoch);
    let eval = evaluate(&out.model, &examples, true).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let init_ok = (initial / ln_v - 1.0).abs() <= 0.15;
    let ok = v <= 50 && reached.is_some_and(|e| e <= 300) && eval.exact_match >= 0.9 && init_ok && secs < 300.0;
    verdict(
        5,
        "seq2seq overfit",
        ok,
        &format!(
            "vocab {v}, initial loss {initial:.3} vs ln V {ln_v:.3}, acc>=0.99 at epoch {reached:?}, \
             token acc {:.4}, exact {:.3}, {secs:.1}s",
            eval.token_accuracy, eval.exact_match
        ),
    );
}

// ---------------------------------------------------------------- 6

fn features(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Tensor {
    uniform(rng, &[n, d], -1.0, 1.0)
}

fn accuracy(probs: &[f64], y: &[bool]) -> f64 {
    probs.iter().zip(y).filter(|(p, &t)| (**p >= 0.5) == t).count() as f64 / y.len() as f64
}

#[test]
fn criterion_06_classifier_sanity_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let d = 10;
    let rule = |x: &Tensor| -> Vec<bool> { (0..x.rows()).map(|i| x.row(i)[0] + x.row(i)[1] > 0.0).collect() };
    let (xtr, xte) = (features(2000, d, &mut rng), features(2000, d, &mut rng));
    let cfg = ClassifierConfig { epochs: 20, batch: 64, ..ClassifierConfig::default() };

    let sep = train_classifier(&xtr, &rule(&xtr), &cfg, 1).unwrap();
    let sep_acc = accuracy(&sep.model.predict(&xte).unwrap(), &rule(&xte));

    let shuffled = |n: usize, rng: &mut ChaCha8Rng| -> Vec<bool> {
        let mut y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        y.shuffle(rng);
        y
    };
    let (ytr, yte) = (shuffled(2000, &mut rng), shuffled(2000, &mut rng));
    let noise = train_classifier(&xtr, &ytr, &cfg, 1).unwrap();
    let probs = noise.model.predict(&xte).unwrap();
    let m = MetricsReport::compute(&yte, &probs, 0.5).unwrap();

    let ok = sep_acc >= 0.95 && (0.45..=0.55).contains(&m.accuracy) && (m.loss - 0.69).abs() <= 0.02;
    verdict(
        6,
        "classifier sanity pair",
        ok,
        &format!("separable acc {sep_acc:.4}; shuffled acc {:.4} loss {:.4}", m.accuracy, m.loss),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_f1_anchor() {
    let labels: Vec<bool> = (0..1000).map(|i| i < 515).collect();
    let probs = vec![0.9; 1000];
    let m = MetricsReport::compute(&labels, &probs, 0.5).unwrap();
    let by_hand = 2.0 * 0.515 / (1.0 + 0.515);
    let ok = (m.f1 - 0.680).abs() <= 0.001 && (m.f1 - by_hand).abs() < 1e-12;
    verdict(7, "F1 anchor", ok, &format!("F1 {:.6}, accuracy {:.4}", m.f1, m.accuracy));
}

// ---------------------------------------------------------------- 8

fn mann_whitney(y: &[bool], p: &[f64]) -> f64 {
    let (mut s, mut pairs) = (0.0, 0.0);
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] && !y[j] {
                pairs += 1.0;
                s += if p[i] > p[j] {
                    1.0
                } else if p[i] == p[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    s / pairs
}

/// Precision/recall at every distinct score taken as a `>=` threshold,
/// highest first, anchored at recall 0 with the first precision.
fn pr_oracle(y: &[bool], p: &[f64]) -> f64 {
    let mut ts: Vec<f64> = p.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    ts.dedup();
    let pos = y.iter().filter(|&&t| t).count() as f64;
    let mut pts = Vec::new();
    for t in ts {
        let tp = y.iter().zip(p).filter(|(&l, &s)| l && s >= t).count() as f64;
        let pp = p.iter().filter(|&&s| s >= t).count() as f64;
        pts.push((tp / pos, tp / pp));
    }
    pts.insert(0, (0.0, pts[0].1));
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

#[test]
fn criterion_08_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_roc = 0.0f64;
    let mut worst_pr = 0.0f64;
    let mut tallies_ok = true;
    for k in 0..50 {
        let y: Vec<bool> = (0..200).map(|_| rng.gen_bool(0.4)).collect();
        // Every other instance is coarsely rounded to force ties.
        let p: Vec<f64> = (0..200)
            .map(|_| {
                let v: f64 = rng.gen();
                if k % 2 == 0 { (v * 10.0).round() / 10.0 } else { v }
            })
            .collect();
        worst_roc = worst_roc.max((roc_auc(&y, &p).unwrap().auc - mann_whitney(&y, &p)).abs());
        worst_pr = worst_pr.max((pr_auc(&y, &p).unwrap().auc - pr_oracle(&y, &p)).abs());
        for t in [0.25, 0.5, 0.7] {
            let c = confusion(&y, &p, t).unwrap();
            let mut b = Confusion::default();
            for (&l, &s) in y.iter().zip(&p) {
                match (l, s >= t) {
                    (true, true) => b.tp += 1,
                    (false, true) => b.fp += 1,
                    (false, false) => b.tn += 1,
                    (true, false) => b.fn_ += 1,
                }
            }
            let (tp, fp, fn_) = (b.tp as f64, b.fp as f64, b.fn_ as f64);
            let f1 = if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
            tallies_ok &= c == b && (c.f1() - f1).abs() < 1e-12;
        }
    }
    // Hand-built: scores 0.9 0.8 0.7 0.6 with labels 1 0 1 0. PR points
    // (0,1) (.5,1) (.5,.5) (1,2/3) (1,.5): area 1/2 + (1/2)(1/2 + 2/3)/2.
    let hand = pr_auc(&[true, false, true, false], &[0.9, 0.8, 0.7, 0.6]).unwrap().auc;
    let hand_expected = 0.5 + 0.25 * (0.5 + 2.0 / 3.0);
    // All tied: one threshold, precision = prevalence everywhere.
    let flat_pr = pr_auc(&[true, false, false, true, false], &[0.3; 5]).unwrap().auc;
    let hand_ok = (hand - hand_expected).abs() < 1e-12 && (flat_pr - 0.4).abs() < 1e-12;
    let ok = worst_roc < 1e-9 && worst_pr < 1e-12 && tallies_ok && hand_ok;
    verdict(
        8,
        "metric oracles",
        ok,
        &format!("max |roc - MW| {worst_roc:.2e}, max |pr - oracle| {worst_pr:.2e}, hand pr {hand:.6}"),
    );
}

// ---------------------------------------------------------------- 9

fn clique_corpus(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    (0..600)
        .map(|i| {
            let c = if i % 2 == 0 { 'a' } else { 'b' };
            (0..8).map(|_| format!("{c}{}", rng.gen_range(0..6))).collect()
        })
        .collect()
}

fn brute_cooccurrence(corpus: &[Vec<String>], vocab: &Vocabulary, window: usize) -> BTreeMap<(usize, usize), f64> {
    let mut m = BTreeMap::new();
    for s in corpus {
        let ids: Vec<usize> = s.iter().filter_map(|t| vocab.index_of(t)).collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                if j - i <= window {
                    let x = 1.0 / (j - i) as f64;
                    *m.entry((ids[i], ids[j])).or_insert(0.0) += x;
                    *m.entry((ids[j], ids[i])).or_insert(0.0) += x;
                }
            }
        }
    }
    m
}

#[test]
fn criterion_09_embedding_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let corpus = clique_corpus(&mut rng);
    let vocab = Vocabulary::build(&corpus, 1, usize::MAX);
    let sg = train_skipgram(
        &corpus,
        &vocab,
        &SkipgramConfig { dim: 20, window: 3, epochs: 10, seed: 4, ..SkipgramConfig::default() },
        "synthetic",
        1,
    )
    .unwrap();
    let toks: Vec<String> = ["a", "b"].iter().flat_map(|c| (0..6).map(move |i| format!("{c}{i}"))).collect();
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for i in 0..toks.len() {
        for j in i + 1..toks.len() {
            let c = cosine(sg.table.vector(&toks[i]).unwrap(), sg.table.vector(&toks[j]).unwrap());
            if toks[i].as_bytes()[0] == toks[j].as_bytes()[0] {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (intra, inter) = (mean(&intra), mean(&inter));

    // Co-occurrence over a corpus with rare tokens, so OOV dropping matters.
    let mixed: Vec<Vec<String>> = (0..300)
        .map(|_| (0..rng.gen_range(1..12)).map(|_| format!("t{}", rng.gen_range(0..40u32).pow(2) / 40)).collect())
        .collect();
    let mvocab = Vocabulary::build(&mixed, 3, usize::MAX);
    let x = build_cooccurrence(&mixed, &mvocab, 5);
    let brute = brute_cooccurrence(&mixed, &mvocab, 5);
    let cooc_ok = x.nnz() == brute.len()
        && brute.iter().all(|(&(i, j), &v)| (x.get(i, j) - v).abs() < 1e-9);

    let glove = train_glove(
        &x,
        &mvocab,
        &GloveConfig { dim: 10, epochs: 10, seed: 2, ..GloveConfig::default() },
        "synthetic",
        5,
        3,
    )
    .unwrap();
    let (j1, j10) = (glove.epoch_cost[0], glove.epoch_cost[9]);

    let data = uniform(&mut rng, &[40, 6], -1.0, 1.0);
    let mut scaled = data.clone();
    for i in 0..40 {
        for (k, v) in scaled.row_mut(i).iter_mut().enumerate() {
            *v *= (k + 1) as f64;
        }
    }
    let proj = pca(&scaled, 4).unwrap();
    let m = nalgebra::DMatrix::from_row_slice(40, 6, scaled.data());
    let mean_row = m.row_mean();
    let centred = nalgebra::DMatrix::from_fn(40, 6, |i, j| m[(i, j)] - mean_row[j]);
    let cov = centred.transpose() * &centred / 39.0;
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(cov.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let trace = cov.trace();
    let pca_err = proj
        .ratios
        .iter()
        .zip(&eig)
        .map(|(r, l)| (r - l / trace).abs())
        .fold(0.0f64, f64::max);

    let ok = intra > inter && j10 < j1 && cooc_ok && pca_err < 1e-6;
    verdict(
        9,
        "embedding properties",
        ok,
        &format!(
            "cos intra {intra:.3} inter {inter:.3}; GloVe J {j1:.4} -> {j10:.4}; cooc {} entries match {cooc_ok}; \
             pca max err {pca_err:.1e}",
            x.nnz()
        ),
    );
}

// ---------------------------------------------------------------- 10

fn run_fixture_pipeline(out: &Path) {
    let cfg = PipelineConfig::load(&fixtures().join("config.toml")).unwrap();
    let ctx = RunContext::new(cfg, out, None, false);
    if let Err(f) = run_all(&ctx) {
        panic!("stage {} failed: {}", f.stage, f.error);
    }
}

fn artifacts(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for (stage, keep) in [
        ("evaluate", (|n: &str| n.starts_with("metrics") && n.ends_with(".json")) as fn(&str) -> bool),
        ("train-seq2seq", |n: &str| n.ends_with(".snf")),
        ("train-classifier", |n: &str| n.starts_with("classifier_") && n.ends_with(".snf")),
    ] {
        for e in std::fs::read_dir(root.join(stage)).unwrap() {
            let name = e.unwrap().file_name().to_string_lossy().into_owned();
            if keep(&name) {
                out.insert(format!("{stage}/{name}"), std::fs::read(root.join(stage).join(&name)).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_10_determinism() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_fixture_pipeline(a.path());
    run_fixture_pipeline(b.path());
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let has_all = fa.contains_key("evaluate/metrics.json")
        && fa.contains_key("train-seq2seq/seq2seq.snf")
        && fa.keys().any(|k| k.starts_with("train-classifier/classifier_"));
    let ok = has_all && fa.len() == fb.len() && differing.is_empty();
    verdict(
        10,
        "determinism",
        ok,
        &format!("{} artifacts compared, differing {differing:?}", fa.len()),
    );
}
