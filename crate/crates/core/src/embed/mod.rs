//! Skipgram embeddings with negative sampling over segmented-corpus tokens.

mod model;
mod vectors;

pub use model::{
    log_sigmoid, sigmoid, subword_ngrams, train_skipgram, train_skipgram_observed, EmbeddingMatrix,
    NegativeSampler, PairEvent, PairGradient, TrainConfig, TrainReport,
};
pub use vectors::{export_vectors, import_vectors, read_vectors, write_vectors, Vectors};

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::grammar::segmented::{read_segmented, Item};

/// Stands for tokens that are all whitespace.
pub const WS_TOKEN: &str = "<ws>";

/// Edge whitespace trimmed, ASCII digits replaced by `N`; all-whitespace
/// tokens become [`WS_TOKEN`].
pub fn clean_token(raw: &str) -> String {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return WS_TOKEN.to_string();
    }
    trimmed
        .chars()
        .map(|c| if c.is_ascii_digit() { 'N' } else { c })
        .collect()
}

/// Dense token index, ordered by count descending then token ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmbedVocab {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl EmbedVocab {
    /// Keeps tokens with at least `min_count` occurrences.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Self {
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count.max(1))
            .collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i as u32))
            .collect();
        let (tokens, counts) = entries.into_iter().unzip();
        EmbedVocab {
            tokens,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Cleaned tokens grouped into documents; a boundary ends a document.
/// Tokens dropped by the vocabulary's count threshold are removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmbedCorpus {
    pub vocab: EmbedVocab,
    pub docs: Vec<Vec<u32>>,
}

impl EmbedCorpus {
    pub fn from_documents<S: AsRef<str>>(docs: &[Vec<S>], min_count: u64) -> Self {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let cleaned: Vec<Vec<String>> = docs
            .iter()
            .map(|d| d.iter().map(|t| clean_token(t.as_ref())).collect())
            .collect();
        for t in cleaned.iter().flatten() {
            *counts.entry(t.clone()).or_default() += 1;
        }
        let vocab = EmbedVocab::from_counts(counts, min_count);
        let docs = cleaned
            .iter()
            .map(|d| d.iter().filter_map(|t| vocab.get(t)).collect::<Vec<u32>>())
            .filter(|d| !d.is_empty())
            .collect();
        EmbedCorpus { vocab, docs }
    }

    /// Reads a segmented corpus stream.
    pub fn read<R: BufRead>(reader: R, min_count: u64) -> Result<Self> {
        let mut docs: Vec<Vec<String>> = vec![Vec::new()];
        for item in read_segmented(reader) {
            match item? {
                Item::Token(t) => docs.last_mut().expect("never empty").push(t),
                Item::Boundary => {
                    if !docs.last().expect("never empty").is_empty() {
                        docs.push(Vec::new());
                    }
                }
            }
        }
        Ok(Self::from_documents(&docs, min_count))
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

/// Vocabulary of a segmented corpus stream.
pub fn build_vocab<R: BufRead>(reader: R, min_count: u64) -> Result<EmbedVocab> {
    EmbedCorpus::read(reader, min_count).map(|c| c.vocab)
}

pub(crate) fn empty_vocab_error() -> Error {
    Error::Domain("embedding vocabulary is empty".into())
}
