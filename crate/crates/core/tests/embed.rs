//! Skipgram trainer checked against finite differences and sampling
//! statistics.

mod common;

use common::oracles::{toy_corpus, toy_matrix, worst_gradient_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgram::embed::{
    read_vectors, train_skipgram, train_skipgram_observed, write_vectors, EmbedCorpus,
    EmbeddingMatrix, NegativeSampler, TrainConfig,
};

#[test]
fn corpus_has_three_tokens_after_trimming() {
    let c = toy_corpus();
    assert_eq!(c.vocab.tokens(), ["the", "cat", "mat", "sat"]);
    assert_eq!(c.vocab.count(0), 2);
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let err = worst_gradient_error();
    assert!(err < 1e-4, "relative error {err:e}");
}

#[test]
fn gradient_rows_cover_token_and_subwords() {
    let m = toy_matrix(true, 1);
    let grad = m.pair_gradient(1, 0, &[2]);
    let rows: Vec<usize> = grad.input.keys().copied().collect();
    let mut expected = m.rows_of(1);
    expected.sort_unstable();
    expected.dedup();
    assert_eq!(rows, expected);
    assert!(rows.len() > 1);
    assert_eq!(grad.output.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
}

#[test]
fn sgd_step_is_a_gradient_step() {
    let m = toy_matrix(true, 3);
    let lr = 0.01;
    let (center, context, negatives) = (2, 0, [1, 3, 1]);
    let grad = m.pair_gradient(center, context, &negatives);
    let mut stepped = m.clone();
    let loss = stepped.sgd_step(center, context, &negatives, lr);
    assert!((loss - m.pair_loss(center, context, &negatives)).abs() < 1e-12);
    let dim = m.dim();
    for (i, (&before, &after)) in m.input().iter().zip(stepped.input()).enumerate() {
        let g = grad.input.get(&(i / dim)).map_or(0.0, |g| g[i % dim]);
        assert!((after - (before - lr * g)).abs() < 1e-12);
    }
    for (i, (&before, &after)) in m.output().iter().zip(stepped.output()).enumerate() {
        let g = grad.output.get(&(i / dim)).map_or(0.0, |g| g[i % dim]);
        assert!((after - (before - lr * g)).abs() < 1e-12);
    }
}

#[test]
fn initial_pair_loss_is_log_two_per_term() {
    let config = TrainConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = EmbeddingMatrix::new(toy_corpus().vocab, &config, &mut rng).unwrap();
    assert!(m.output().iter().all(|&x| x == 0.0));
    let expected = 6.0 * std::f64::consts::LN_2;
    let loss = m.pair_loss(0, 1, &[2, 3, 2, 3, 2]);
    assert!((loss - expected).abs() < 1e-9);
    assert!((expected - 4.159).abs() < 1e-3);
}

#[test]
fn negative_sampling_follows_the_three_quarter_power() {
    let counts: Vec<u64> = (20..30).collect();
    let sampler = NegativeSampler::new(&counts, 0.75).unwrap();
    let total: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 1_000_000;
    let mut seen = vec![0u64; counts.len()];
    for _ in 0..draws {
        seen[sampler.draw(&mut rng) as usize] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = (c as f64).powf(0.75) / total;
        let empirical = seen[i] as f64 / draws as f64;
        assert!(
            (empirical - p).abs() / p < 0.01,
            "token {i}: {empirical} vs {p}"
        );
        assert!((sampler.probabilities()[i] - p).abs() < 1e-15);
    }
}

#[test]
fn negatives_never_equal_the_positive() {
    let sampler = NegativeSampler::new(&[1000, 1, 1], 0.75).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        assert_ne!(sampler.draw_excluding(&mut rng, 0), 0);
    }
}

#[test]
fn window_never_crosses_documents() {
    let docs = vec![vec!["a", "b", "c", "d", "e"], vec!["v", "w", "x", "y", "z"]];
    let corpus = EmbedCorpus::from_documents(&docs, 1);
    let config = TrainConfig {
        dim: 8,
        epochs: 2,
        subsample_threshold: 0.0,
        ..TrainConfig::default()
    };
    let mut pairs = Vec::new();
    train_skipgram_observed(&corpus, &config, |p| pairs.push(p)).unwrap();
    let doc_of = |t: u32| {
        let s = corpus.vocab.token(t);
        if "abcde".contains(s) {
            0
        } else {
            1
        }
    };
    assert!(!pairs.is_empty());
    for p in &pairs {
        assert_eq!(doc_of(p.center), doc_of(p.context), "{p:?}");
        assert_eq!(doc_of(p.center), p.doc);
    }
    // Fixed window of 2 over two 5-token documents: 14 pairs each.
    assert_eq!(pairs.len(), 2 * 2 * 14);
}

fn repetitive_corpus() -> EmbedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let topics = [
        ["cat", "dog", "pet", "fur"],
        ["car", "road", "wheel", "fuel"],
        ["sea", "ship", "wave", "salt"],
    ];
    let docs: Vec<Vec<&str>> = (0..300)
        .map(|_| {
            let t = &topics[rng.gen_range(0..3)];
            (0..12).map(|_| t[rng.gen_range(0..4)]).collect()
        })
        .collect();
    EmbedCorpus::from_documents(&docs, 1)
}

#[test]
fn loss_decreases_during_the_first_epoch() {
    let config = TrainConfig {
        epochs: 1,
        trace_every: 500,
        subsample_threshold: 0.0,
        ..TrainConfig::default()
    };
    let (_, report) = train_skipgram(&repetitive_corpus(), &config).unwrap();
    let first = report.trace.first().unwrap().1;
    let last = report.trace.last().unwrap().1;
    assert!(report.trace.len() >= 10);
    assert!(last < first, "trace {:?}", report.trace);
}

#[test]
fn related_tokens_end_up_closer() {
    let config = TrainConfig {
        dim: 20,
        epochs: 10,
        subsample_threshold: 0.0,
        ..TrainConfig::default()
    };
    let (m, _) = train_skipgram(&repetitive_corpus(), &config).unwrap();
    let v = m.to_vectors();
    let same = rgram::eval::cosine(v.get("cat").unwrap(), v.get("dog").unwrap()).unwrap();
    let other = rgram::eval::cosine(v.get("cat").unwrap(), v.get("ship").unwrap()).unwrap();
    assert!(same > other, "{same} vs {other}");
}

#[test]
fn same_seed_gives_identical_matrices() {
    let config = TrainConfig {
        dim: 16,
        subword_ngrams: Some((2, 4)),
        buckets: 1000,
        ..TrainConfig::default()
    };
    let corpus = repetitive_corpus();
    let (a, ra) = train_skipgram(&corpus, &config).unwrap();
    let (b, rb) = train_skipgram(&corpus, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let (c, _) = train_skipgram(&corpus, &TrainConfig { seed: 2, ..config }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn trained_vectors_round_trip_exactly() {
    let config = TrainConfig {
        dim: 8,
        epochs: 1,
        ..TrainConfig::default()
    };
    let (m, _) = train_skipgram(&repetitive_corpus(), &config).unwrap();
    let v = m.to_vectors();
    let mut buf = Vec::new();
    write_vectors(&v, &mut buf).unwrap();
    assert_eq!(read_vectors(&buf[..]).unwrap(), v);
    assert!(v.tokens().iter().all(|t| !t.is_empty()));
}

#[test]
fn empty_corpus_is_rejected() {
    let corpus = EmbedCorpus::from_documents::<&str>(&[], 1);
    assert!(train_skipgram(&corpus, &TrainConfig::default()).is_err());
}

#[test]
fn single_token_vocabulary_trains_without_negatives() {
    let corpus = EmbedCorpus::from_documents(&[vec!["x", "x", "x"]], 1);
    let config = TrainConfig {
        dim: 4,
        subsample_threshold: 0.0,
        ..TrainConfig::default()
    };
    let (m, report) = train_skipgram(&corpus, &config).unwrap();
    assert!(report.pairs > 0);
    assert!(m.input().iter().all(|x| x.is_finite()));
}
