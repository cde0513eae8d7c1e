//! Independent reference implementations: plain loops, full sorts and
//! finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgram::embed::{EmbedCorpus, EmbeddingMatrix, TrainConfig, Vectors};
use rgram::eval::{average_ranks, AnalogyQuery};
use rgram::Separators;

/// Replaces every maximal run of separator characters by one `sep`.
pub fn collapse_runs(text: &str, seps: &Separators) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for c in text.chars() {
        if seps.contains(c) {
            if !in_run {
                out.push(seps.primary());
            }
            in_run = true;
        } else {
            out.push(c);
            in_run = false;
        }
    }
    out
}

pub fn random_vectors(n: usize, dim: usize, seed: u64) -> Vectors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vectors::from_rows(
        dim,
        (0..n).map(|i| {
            let row: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (format!("w{i}"), row)
        }),
    )
    .unwrap()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / (norm(x) * norm(y))
}

/// Scores every candidate and fully sorts; no partial selection.
pub fn rank(v: &Vectors, target: &[f64], skip: &[&str], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = v
        .tokens()
        .iter()
        .filter(|t| !skip.contains(&t.as_str()))
        .map(|t| (t.clone(), cosine(target, v.get(t).unwrap())))
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn neighbors(v: &Vectors, query: &str, k: usize) -> Vec<(String, f64)> {
    rank(v, v.get(query).unwrap(), &[query], k)
}

pub fn analogy(v: &Vectors, q: &AnalogyQuery, k: usize) -> Vec<(String, f64)> {
    let unit = |t: &str| {
        let x = v.get(t).unwrap();
        let n = norm(x);
        x.iter().map(|a| a / n).collect::<Vec<f64>>()
    };
    let (a, b, c) = (unit(&q.a), unit(&q.b), unit(&q.c));
    let target: Vec<f64> = (0..a.len()).map(|i| b[i] - a[i] + c[i]).collect();
    rank(v, &target, &[&q.a, &q.b, &q.c], k)
}

/// Same tokens in the same order and scores within 1e-12.
pub fn same_ranking(got: &[(String, f64)], want: &[(String, f64)]) -> bool {
    got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| g.0 == w.0 && (g.1 - w.1).abs() < 1e-12)
}

/// Spearman correlation by the tie-corrected sum of squared rank
/// differences.
pub fn textbook_spearman(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let tie_term = |v: &[f64]| {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut t = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let j = sorted[i..].iter().take_while(|&&s| s == sorted[i]).count();
            t += ((j * j * j - j) as f64) / 12.0;
            i += j;
        }
        (n * n * n - n) / 12.0 - t
    };
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    let (sx, sy) = (tie_term(x), tie_term(y));
    (sx + sy - d2) / (2.0 * (sx * sy).sqrt())
}

/// Tokens `the`, `cat`, `mat`, `sat` over two documents.
pub fn toy_corpus() -> EmbedCorpus {
    EmbedCorpus::from_documents(&[vec!["the ", "cat", " sat"], vec!["the", "mat"]], 1)
}

/// A dimension-4 model with random input and output rows.
pub fn toy_matrix(subwords: bool, seed: u64) -> EmbeddingMatrix {
    let config = TrainConfig {
        dim: 4,
        subword_ngrams: subwords.then_some((2, 3)),
        buckets: 64,
        ..TrainConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = EmbeddingMatrix::new(toy_corpus().vocab, &config, &mut rng).unwrap();
    for x in m.output_mut() {
        *x = rng.gen_range(-0.8..0.8);
    }
    for x in m.input_mut() {
        *x *= 20.0;
    }
    m
}

/// Max relative error between the analytic gradient and central differences
/// (step 1e-5) over every parameter of every touched row.
pub fn gradient_error(m: &EmbeddingMatrix, center: u32, context: u32, negatives: &[u32]) -> f64 {
    let h = 1e-5;
    let grad = m.pair_gradient(center, context, negatives);
    let dim = m.dim();
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, numeric: f64| {
        let scale = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / scale);
    };
    let numeric = |perturb: &dyn Fn(&mut EmbeddingMatrix, f64)| {
        let (mut plus, mut minus) = (m.clone(), m.clone());
        perturb(&mut plus, h);
        perturb(&mut minus, -h);
        (plus.pair_loss(center, context, negatives) - minus.pair_loss(center, context, negatives))
            / (2.0 * h)
    };
    for (&row, g) in &grad.input {
        for (k, &gk) in g.iter().enumerate() {
            check(gk, numeric(&|x, d| x.input_mut()[row * dim + k] += d));
        }
    }
    for (&row, g) in &grad.output {
        for (k, &gk) in g.iter().enumerate() {
            check(gk, numeric(&|x, d| x.output_mut()[row * dim + k] += d));
        }
    }
    worst
}

/// Worst gradient error over a fixed set of models and pairs.
pub fn worst_gradient_error() -> f64 {
    let mut worst: f64 = 0.0;
    for subwords in [false, true] {
        for seed in 0..5 {
            let m = toy_matrix(subwords, seed);
            for (center, context, negatives) in
                [(0, 1, vec![2, 3]), (1, 0, vec![2, 2, 3]), (3, 2, vec![0])]
            {
                worst = worst.max(gradient_error(&m, center, context, &negatives));
            }
        }
    }
    worst
}
