//! Token frequency distributions and how they flatten as merges accumulate.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::Write;

use crate::corpus::{BoundedSequence, SymbolId, SymbolTable};
use crate::error::{Error, Result};
use crate::grammar::segmented::escape_into;
use crate::grammar::Grammar;
use crate::repair::{replay_checkpoints, StopCriteria, Trainer};

/// Counts sorted by count descending, ties by token ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedDistribution<T> {
    pub entries: Vec<(T, u64)>,
    pub total: u64,
}

impl<T> Default for RankedDistribution<T> {
    fn default() -> Self {
        RankedDistribution {
            entries: Vec::new(),
            total: 0,
        }
    }
}

impl<T: Ord> RankedDistribution<T> {
    /// Builds from unordered `(token, count)` pairs with distinct tokens.
    /// Zero counts are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (T, u64)>) -> Self {
        let mut entries: Vec<(T, u64)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let total = entries.iter().map(|&(_, c)| c).sum();
        RankedDistribution { entries, total }
    }
}

impl<T> RankedDistribution<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top_count(&self) -> Option<u64> {
        self.entries.first().map(|&(_, c)| c)
    }
}

pub fn rank_frequency<T, I>(tokens: I) -> RankedDistribution<T>
where
    T: Ord + Hash,
    I: IntoIterator<Item = T>,
{
    let mut counts: HashMap<T, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_default() += 1;
    }
    RankedDistribution::from_counts(counts)
}

/// Distribution of the symbols of a sequence, using a dense count table.
pub fn symbol_distribution(seq: &BoundedSequence) -> RankedDistribution<SymbolId> {
    let mut counts: Vec<u64> = Vec::new();
    for s in &seq.symbols {
        if counts.len() <= s.index() {
            counts.resize(s.index() + 1, 0);
        }
        counts[s.index()] += 1;
    }
    dense_distribution(&counts)
}

fn dense_distribution(counts: &[u64]) -> RankedDistribution<SymbolId> {
    RankedDistribution::from_counts(
        counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (SymbolId(i as u32), c)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessReport {
    /// Top count over total.
    pub top1_share: f64,
    /// Top count over the lower median of all counts.
    pub top1_over_median: f64,
    /// Shannon entropy (natural log) over `ln(vocab_size)`; 0 for a single
    /// token.
    pub normalized_entropy: f64,
    pub vocab_size: usize,
    pub token_count: u64,
}

pub fn flatness<T>(d: &RankedDistribution<T>) -> Result<FlatnessReport> {
    let Some(top) = d.top_count() else {
        return Err(Error::Domain(
            "flatness of an empty distribution is undefined".into(),
        ));
    };
    let total = d.total as f64;
    let n = d.entries.len();
    // Entries are sorted descending, so the lower median of the ascending
    // list sits at index n / 2 from the front.
    let median = d.entries[n / 2].1 as f64;
    let entropy: f64 = d
        .entries
        .iter()
        .map(|&(_, c)| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    let normalized_entropy = if n == 1 {
        0.0
    } else {
        (entropy / (n as f64).ln()).clamp(0.0, 1.0)
    };
    Ok(FlatnessReport {
        top1_share: top as f64 / total,
        top1_over_median: top as f64 / median,
        normalized_entropy,
        vocab_size: n,
        token_count: d.total,
    })
}

/// `(compressed / original, (compressed + 2 * rules) / original)`; each rule
/// is charged two symbols of storage.
pub fn compression_ratio(
    original_len: usize,
    compressed_len: usize,
    rules_added: usize,
) -> Result<(f64, f64)> {
    if original_len == 0 {
        return Err(Error::Domain("original length must be positive".into()));
    }
    let o = original_len as f64;
    Ok((
        compressed_len as f64 / o,
        (compressed_len + 2 * rules_added) as f64 / o,
    ))
}

/// Distribution snapshot after a given number of merges.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Requested merge count.
    pub checkpoint: usize,
    /// Merges actually performed; smaller than `checkpoint` when training
    /// stopped first.
    pub merges: usize,
    /// The `top` highest-ranked entries.
    pub top: Vec<(SymbolId, u64)>,
    /// Computed over the full distribution.
    pub flatness: FlatnessReport,
}

impl Curve {
    pub fn reached(&self) -> bool {
        self.merges == self.checkpoint
    }
}

/// Result of [`checkpoint_curves`]. The grammar covers every symbol that
/// appears in any curve.
#[derive(Debug, Clone)]
pub struct Curves {
    pub curves: Vec<Curve>,
    pub grammar: Grammar,
}

pub const DEFAULT_TOP: usize = 100;

/// Trains once, pausing at each checkpoint (ascending merge counts) to
/// record the ranked distribution of the current sequence.
pub fn checkpoint_curves(
    table: &SymbolTable,
    seq: &BoundedSequence,
    stop: StopCriteria,
    checkpoints: &[usize],
    top: usize,
) -> Result<Curves> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "checkpoints must be in ascending order".into(),
        ));
    }
    if seq.is_empty() {
        return Err(Error::Domain(
            "cannot compute curves of an empty corpus".into(),
        ));
    }
    let mut trainer = Trainer::new(table.clone(), seq, stop);
    let mut curves = Vec::with_capacity(checkpoints.len());
    for &checkpoint in checkpoints {
        trainer.run_to(checkpoint);
        let dist = dense_distribution(trainer.symbol_counts());
        debug_assert_eq!(dist.total as usize, trainer.sequence_len());
        curves.push(Curve {
            checkpoint,
            merges: trainer.merges(),
            flatness: flatness(&dist)?,
            top: dist.entries.into_iter().take(top).collect(),
        });
    }
    Ok(Curves {
        curves,
        grammar: trainer.grammar(),
    })
}

/// Curves of a saved grammar over a sequence: the distribution after
/// replaying the first `k` rules, for each checkpoint `k` (ascending).
/// Checkpoints past the last rule are reported at the final state and are
/// not [`Curve::reached`].
pub fn replay_curves(
    grammar: &Grammar,
    seq: &BoundedSequence,
    checkpoints: &[usize],
    top: usize,
) -> Result<Vec<Curve>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "checkpoints must be in ascending order".into(),
        ));
    }
    if seq.is_empty() {
        return Err(Error::Domain(
            "cannot compute curves of an empty corpus".into(),
        ));
    }
    let mut curves = Vec::with_capacity(checkpoints.len());
    let mut failure = None;
    replay_checkpoints(
        seq,
        grammar.rules(),
        checkpoints,
        |checkpoint, merges, counts| {
            let dist = dense_distribution(counts);
            match flatness(&dist) {
                Ok(flatness) => curves.push(Curve {
                    checkpoint,
                    merges,
                    flatness,
                    top: dist.entries.into_iter().take(top).collect(),
                }),
                Err(e) => failure = Some(e),
            }
        },
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(curves),
    }
}

pub const TSV_HEADER: &str = "checkpoint\trank\ttoken\tcount";

/// Writes `checkpoint\trank\ttoken\tcount` rows (ranks from 1) with tokens
/// escaped as in segmented corpora. `render` appends a symbol's text.
pub fn write_curves_tsv<W: Write>(
    curves: &[Curve],
    mut render: impl FnMut(SymbolId, &mut String) -> Result<()>,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{TSV_HEADER}").map_err(tsv_io)?;
    let mut text = String::new();
    for curve in curves {
        let rows = curve.top.iter().map(|&(id, count)| {
            text.clear();
            render(id, &mut text).map(|_| (text.clone(), count))
        });
        write_rows(&curve.checkpoint.to_string(), rows, &mut w)?;
    }
    w.flush().map_err(tsv_io)
}

/// Writes the top `top` entries of a string distribution under a single
/// checkpoint label.
pub fn write_ranked_tsv<W: Write>(
    label: &str,
    dist: &RankedDistribution<String>,
    top: usize,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{TSV_HEADER}").map_err(tsv_io)?;
    let rows = dist
        .entries
        .iter()
        .take(top)
        .map(|(t, c)| Ok((t.clone(), *c)));
    write_rows(label, rows, &mut w)?;
    w.flush().map_err(tsv_io)
}

fn write_rows<W: Write>(
    label: &str,
    rows: impl Iterator<Item = Result<(String, u64)>>,
    w: &mut W,
) -> Result<()> {
    let mut escaped = String::new();
    for (rank, row) in rows.enumerate() {
        let (text, count) = row?;
        escaped.clear();
        escape_into(&text, &mut escaped);
        writeln!(w, "{label}\t{}\t{escaped}\t{count}", rank + 1).map_err(tsv_io)?;
    }
    Ok(())
}

fn tsv_io(e: std::io::Error) -> Error {
    Error::io("<stats output>", e)
}

pub const FLATNESS_HEADER: &str =
    "checkpoint\tmerges\ttoken_count\tvocab_size\ttop1_share\ttop1_over_median\tnormalized_entropy";

/// One flatness summary row; `merges` is `-` when unknown.
pub fn flatness_row(label: &str, merges: Option<usize>, f: &FlatnessReport) -> String {
    let merges = merges.map_or_else(|| "-".to_string(), |m| m.to_string());
    format!(
        "{label}\t{merges}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
        f.token_count, f.vocab_size, f.top1_share, f.top1_over_median, f.normalized_entropy
    )
}

/// Writes one summary row per checkpoint.
pub fn write_flatness_tsv<W: Write>(curves: &[Curve], mut w: W) -> Result<()> {
    writeln!(w, "{FLATNESS_HEADER}").map_err(tsv_io)?;
    for c in curves {
        let row = flatness_row(&c.checkpoint.to_string(), Some(c.merges), &c.flatness);
        writeln!(w, "{row}").map_err(tsv_io)?;
    }
    w.flush().map_err(tsv_io)
}
