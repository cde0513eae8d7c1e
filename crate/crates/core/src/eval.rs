//! Nearest neighbors, analogy suites and word-similarity correlation over
//! token vectors.

use std::cmp::Ordering;
use std::io::BufRead;

use crate::embed::Vectors;
use crate::error::{Error, Result};
use crate::grammar::segmented::unescape;

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (mut uv, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::Domain("cosine of a zero vector".into()));
    }
    Ok((uv / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

fn by_score_then_token(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Top `k` rows by cosine to `target`, skipping excluded rows and zero rows.
fn rank_against(
    v: &Vectors,
    target: &[f64],
    k: usize,
    excluded: &[usize],
) -> Result<Vec<(String, f64)>> {
    let mut scored = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        if excluded.contains(&i) {
            continue;
        }
        match cosine(target, v.row(i)) {
            Ok(c) => scored.push((v.token(i).to_string(), c)),
            Err(Error::Domain(_)) if v.row(i).iter().all(|&x| x == 0.0) => {}
            Err(e) => return Err(e),
        }
    }
    let k = k.min(scored.len());
    if k < scored.len() && k > 0 {
        scored.select_nth_unstable_by(k - 1, by_score_then_token);
    }
    scored.truncate(k);
    scored.sort_by(by_score_then_token);
    Ok(scored)
}

fn lookup(v: &Vectors, token: &str) -> Result<usize> {
    v.index_of(token)
        .ok_or_else(|| Error::OutOfVocabulary(token.to_string()))
}

/// The `k` tokens closest to `query` by cosine, excluding `query` itself.
/// Ties are broken by token ascending.
pub fn nearest_neighbors(v: &Vectors, query: &str, k: usize) -> Result<Vec<(String, f64)>> {
    let q = lookup(v, query)?;
    rank_against(v, v.row(q), k, &[q])
}

/// "`b` is to `a` as `gold` is to `c`": the answer is sought near
/// `b - a + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuery {
    pub a: String,
    pub b: String,
    pub c: String,
    pub gold: String,
}

impl AnalogyQuery {
    pub fn new(a: &str, b: &str, c: &str, gold: &str) -> Self {
        AnalogyQuery {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            gold: gold.into(),
        }
    }
}

/// Answers analogy queries by additive offset over unit-length vectors.
pub struct AnalogySolver {
    unit: Vectors,
}

impl AnalogySolver {
    pub fn new(v: &Vectors) -> Self {
        AnalogySolver {
            unit: v.normalized(),
        }
    }

    /// Top `k` candidates other than `a`, `b` and `c`. Any of those being
    /// out of vocabulary is an error.
    pub fn solve(&self, q: &AnalogyQuery, k: usize) -> Result<Vec<(String, f64)>> {
        let a = lookup(&self.unit, &q.a)?;
        let b = lookup(&self.unit, &q.b)?;
        let c = lookup(&self.unit, &q.c)?;
        let (va, vb, vc) = (self.unit.row(a), self.unit.row(b), self.unit.row(c));
        let target: Vec<f64> = (0..self.unit.dim())
            .map(|i| vb[i] - va[i] + vc[i])
            .collect();
        rank_against(&self.unit, &target, k, &[a, b, c])
    }

    pub fn covers(&self, q: &AnalogyQuery) -> bool {
        [&q.a, &q.b, &q.c, &q.gold]
            .iter()
            .all(|t| self.unit.index_of(t).is_some())
    }
}

pub fn analogy(v: &Vectors, q: &AnalogyQuery, k: usize) -> Result<Vec<(String, f64)>> {
    AnalogySolver::new(v).solve(q, k)
}

/// Analogy queries grouped under `:` section headers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalogySuite {
    /// Section names; queries before the first header belong to `""`.
    pub sections: Vec<String>,
    /// `(section index, query)`.
    pub queries: Vec<(usize, AnalogyQuery)>,
}

impl AnalogySuite {
    pub fn from_queries(queries: impl IntoIterator<Item = AnalogyQuery>) -> Self {
        AnalogySuite {
            sections: vec![String::new()],
            queries: queries.into_iter().map(|q| (0, q)).collect(),
        }
    }
}

/// Four whitespace-separated tokens per line (`a b c gold`, escaped as in
/// segmented corpora); lines starting with `:` open a section. Blank lines
/// are skipped.
pub fn read_analogy_suite<R: BufRead>(reader: R) -> Result<AnalogySuite> {
    let mut suite = AnalogySuite {
        sections: vec![String::new()],
        queries: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::io("<analogy suite>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            suite.sections.push(name.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                n,
                format!("expected 4 tokens, found {}", fields.len()),
            ));
        }
        let t = |j: usize| unescape(fields[j], n);
        suite.queries.push((
            suite.sections.len() - 1,
            AnalogyQuery {
                a: t(0)?,
                b: t(1)?,
                c: t(2)?,
                gold: t(3)?,
            },
        ));
    }
    Ok(suite)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SectionResult {
    pub name: String,
    pub correct: usize,
    pub attempted: usize,
    pub total: usize,
}

/// A wrong top-1 answer whose text contains the gold token.
#[derive(Debug, Clone, PartialEq)]
pub struct NearMiss {
    pub query: AnalogyQuery,
    pub predicted: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteResult {
    /// `correct / attempted`, 0 when nothing was attempted.
    pub score: f64,
    /// `attempted / total`; a query is attempted when all four tokens are in
    /// the vocabulary.
    pub coverage: f64,
    pub correct: usize,
    pub attempted: usize,
    pub total: usize,
    pub sections: Vec<SectionResult>,
    pub near_misses: Vec<NearMiss>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores top-1 answers by exact match against the trimmed gold token.
pub fn analogy_suite(v: &Vectors, suite: &AnalogySuite) -> Result<SuiteResult> {
    if suite.queries.is_empty() {
        return Err(Error::Domain("analogy suite is empty".into()));
    }
    let solver = AnalogySolver::new(v);
    let mut sections: Vec<SectionResult> = suite
        .sections
        .iter()
        .map(|name| SectionResult {
            name: name.clone(),
            ..Default::default()
        })
        .collect();
    let mut near_misses = Vec::new();
    for (s, q) in &suite.queries {
        let section = &mut sections[*s];
        section.total += 1;
        if !solver.covers(q) {
            continue;
        }
        section.attempted += 1;
        let top = match solver.solve(q, 1) {
            Ok(top) => top,
            // `b - a + c` can cancel to zero; the query then has no answer.
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        let Some((predicted, _)) = top.into_iter().next() else {
            continue;
        };
        let gold = q.gold.trim();
        if predicted.trim() == gold {
            section.correct += 1;
        } else if !gold.is_empty() && predicted.contains(gold) {
            near_misses.push(NearMiss {
                query: q.clone(),
                predicted,
            });
        }
    }
    let correct = sections.iter().map(|s| s.correct).sum();
    let attempted = sections.iter().map(|s| s.attempted).sum();
    let total = suite.queries.len();
    sections.retain(|s| s.total > 0);
    Ok(SuiteResult {
        score: ratio(correct, attempted),
        coverage: ratio(attempted, total),
        correct,
        attempted,
        total,
        sections,
        near_misses,
    })
}

/// Ranks from 1, tied values sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation("spearman inputs differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::Domain(
            "rank correlation needs at least 2 pairs".into(),
        ));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain(
            "rank correlation is undefined for constant input".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub first: String,
    pub second: String,
    pub gold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityResult {
    pub spearman: f64,
    /// Scored pairs over all pairs.
    pub coverage: f64,
    pub scored: usize,
    pub total: usize,
}

/// Correlates cosine similarity with gold scores over pairs whose tokens
/// both have non-zero vectors.
pub fn similarity_suite(v: &Vectors, pairs: &[SimilarityPair]) -> Result<SimilarityResult> {
    let mut predicted = Vec::new();
    let mut gold = Vec::new();
    for p in pairs {
        let (Some(a), Some(b)) = (v.get(&p.first), v.get(&p.second)) else {
            continue;
        };
        match cosine(a, b) {
            Ok(c) => {
                predicted.push(c);
                gold.push(p.gold);
            }
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(SimilarityResult {
        spearman: spearman(&predicted, &gold)?,
        coverage: ratio(predicted.len(), pairs.len()),
        scored: predicted.len(),
        total: pairs.len(),
    })
}

/// `t1<TAB>t2<TAB>score` per line; blank lines and `#` comments are skipped.
pub fn read_similarity_pairs<R: BufRead>(reader: R) -> Result<Vec<SimilarityPair>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::io("<similarity pairs>", e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                n,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let gold: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(n, format!("invalid score {:?}", fields[2])))?;
        pairs.push(SimilarityPair {
            first: unescape(fields[0].trim(), n)?,
            second: unescape(fields[1].trim(), n)?,
            gold,
        });
    }
    Ok(pairs)
}
