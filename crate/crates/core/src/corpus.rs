//! Text ingestion: normalization, boundary marking and terminal encoding.
//!
//! Every Unicode scalar value that is not a separator becomes one terminal
//! symbol. Runs of separator characters collapse into a single boundary,
//! which carries no symbol and only blocks pair merges across it.

use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Identifier of a terminal or nonterminal symbol.
///
/// Terminals occupy `[0, T)` in ascending code point order, nonterminals
/// are numbered consecutively from `T` in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Placeholder emitted for ASCII digits when `digits_to_n` is set.
pub const DIGIT_PLACEHOLDER: char = 'N';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationOptions {
    pub lowercase: bool,
    pub digits_to_n: bool,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        NormalizationOptions {
            lowercase: true,
            digits_to_n: false,
        }
    }
}

impl NormalizationOptions {
    /// Settings used for the embedding pipeline: lowercase and digit folding.
    pub fn for_embeddings() -> Self {
        NormalizationOptions {
            lowercase: true,
            digits_to_n: true,
        }
    }

    pub fn raw() -> Self {
        NormalizationOptions {
            lowercase: false,
            digits_to_n: false,
        }
    }
}

/// Lowercases and folds digits according to `opts`.
///
/// When digits are folded, the placeholder `N` is reserved and is never
/// lowercased, so that `normalize` stays idempotent.
pub fn normalize(text: &str, opts: NormalizationOptions) -> String {
    let mut out = String::with_capacity(text.len());
    normalize_into(text, opts, &mut out);
    out
}

pub fn normalize_into(text: &str, opts: NormalizationOptions, out: &mut String) {
    if !opts.lowercase && !opts.digits_to_n {
        out.push_str(text);
        return;
    }
    for c in text.chars() {
        if opts.digits_to_n && (c.is_ascii_digit() || c == DIGIT_PLACEHOLDER) {
            out.push(DIGIT_PLACEHOLDER);
        } else if opts.lowercase {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
}

/// Normalizes raw bytes, reporting the offset of the first invalid UTF-8 byte.
pub fn normalize_bytes(bytes: &[u8], opts: NormalizationOptions) -> Result<String> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Utf8 {
        offset: e.valid_up_to() as u64,
    })?;
    Ok(normalize(text, opts))
}

/// Characters that mark sequence boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separators {
    chars: Vec<char>,
}

impl Separators {
    /// Builds a separator set; the first character is used when decoding.
    pub fn new(chars: impl IntoIterator<Item = char>) -> Self {
        let mut list: Vec<char> = Vec::new();
        for c in chars {
            if !list.contains(&c) {
                list.push(c);
            }
        }
        Separators { chars: list }
    }

    pub fn none() -> Self {
        Separators { chars: Vec::new() }
    }

    #[inline]
    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    /// Character written back for each boundary.
    pub fn primary(&self) -> char {
        self.chars.first().copied().unwrap_or('\n')
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

impl Default for Separators {
    fn default() -> Self {
        Separators::new(['\n'])
    }
}

/// Bijection between terminal ids and Unicode scalar values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    chars: Vec<char>,
    ids: FxHashMap<char, SymbolId>,
}

impl SymbolTable {
    /// Builds a table from the distinct characters, ordered by code point.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let mut list: Vec<char> = chars.into_iter().collect();
        list.sort_unstable();
        list.dedup();
        Self::from_ordered(list).expect("deduplicated list")
    }

    /// Builds a table keeping the given id order. Fails on duplicates.
    pub fn from_ordered(chars: Vec<char>) -> Result<Self> {
        let mut ids = FxHashMap::default();
        for (i, &c) in chars.iter().enumerate() {
            if ids.insert(c, SymbolId(i as u32)).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate terminal U+{:04X}",
                    c as u32
                )));
            }
        }
        Ok(SymbolTable { chars, ids })
    }

    #[inline]
    pub fn id(&self, c: char) -> Option<SymbolId> {
        self.ids.get(&c).copied()
    }

    #[inline]
    pub fn char(&self, id: SymbolId) -> Option<char> {
        self.chars.get(id.index()).copied()
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

/// A symbol sequence cut into segments by boundaries no merge may span.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundedSequence {
    pub symbols: Vec<SymbolId>,
    /// Strictly increasing positions in `[0, symbols.len()]`.
    pub boundaries: Vec<usize>,
    /// Ordinal of the separator run that produced each boundary.
    pub doc_ids: Vec<u32>,
}

impl BoundedSequence {
    pub fn new(symbols: Vec<SymbolId>, boundaries: Vec<usize>) -> Self {
        let doc_ids = (0..boundaries.len() as u32).collect();
        BoundedSequence {
            symbols,
            boundaries,
            doc_ids,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol runs between consecutive boundaries, including empty edge
    /// segments when a boundary sits at position 0 or at the end.
    pub fn segments(&self) -> impl Iterator<Item = &[SymbolId]> + '_ {
        let mut cuts = Vec::with_capacity(self.boundaries.len() + 2);
        cuts.push(0);
        cuts.extend(self.boundaries.iter().copied());
        cuts.push(self.symbols.len());
        (0..cuts.len() - 1).map(move |i| &self.symbols[cuts[i]..cuts[i + 1]])
    }

    pub fn validate(&self) -> Result<()> {
        let mut last: Option<usize> = None;
        for &b in &self.boundaries {
            if b > self.symbols.len() {
                return Err(Error::Validation(format!(
                    "boundary {b} past sequence end {}",
                    self.symbols.len()
                )));
            }
            if last.is_some_and(|l| l >= b) {
                return Err(Error::Validation(
                    "boundaries not strictly increasing".into(),
                ));
            }
            last = Some(b);
        }
        if self.doc_ids.len() != self.boundaries.len() {
            return Err(Error::Validation(
                "one provenance tag per boundary required".into(),
            ));
        }
        Ok(())
    }
}

/// Encoded corpus: the terminal table and the terminal sequence over it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Encoded {
    pub table: SymbolTable,
    pub seq: BoundedSequence,
}

/// Incremental encoder; text can be pushed in arbitrary pieces.
#[derive(Debug, Default)]
pub struct Encoder {
    separators: Separators,
    chars: Vec<char>,
    boundaries: Vec<usize>,
    in_separator_run: bool,
}

impl Encoder {
    pub fn new(separators: Separators) -> Self {
        Encoder {
            separators,
            ..Default::default()
        }
    }

    pub fn push_str(&mut self, text: &str) {
        for c in text.chars() {
            if self.separators.contains(c) {
                if !self.in_separator_run {
                    self.boundaries.push(self.chars.len());
                    self.in_separator_run = true;
                }
            } else {
                self.chars.push(c);
                self.in_separator_run = false;
            }
        }
    }

    pub fn finish(self) -> Encoded {
        let table = SymbolTable::from_chars(self.chars.iter().copied());
        let symbols = self
            .chars
            .iter()
            .map(|&c| table.id(c).expect("table built from these chars"))
            .collect();
        Encoded {
            table,
            seq: BoundedSequence::new(symbols, self.boundaries),
        }
    }
}

/// Encodes normalized text, building the terminal table from its characters.
pub fn encode(text: &str, separators: &Separators) -> Encoded {
    let mut enc = Encoder::new(separators.clone());
    enc.push_str(text);
    enc.finish()
}

/// Encodes `text` over an existing terminal table.
///
/// Characters missing from the table receive fresh ids starting at
/// `first_free_id`, in order of first appearance; they are returned as the
/// second element so callers can render them.
pub fn encode_with(
    table: &SymbolTable,
    first_free_id: u32,
    text: &str,
    separators: &Separators,
) -> (BoundedSequence, Vec<char>) {
    let mut symbols = Vec::with_capacity(text.len());
    let mut boundaries = Vec::new();
    let mut unknown: Vec<char> = Vec::new();
    let mut unknown_ids: FxHashMap<char, SymbolId> = FxHashMap::default();
    let mut in_run = false;
    for c in text.chars() {
        if separators.contains(c) {
            if !in_run {
                boundaries.push(symbols.len());
                in_run = true;
            }
            continue;
        }
        in_run = false;
        let id = match table.id(c) {
            Some(id) => id,
            None => *unknown_ids.entry(c).or_insert_with(|| {
                unknown.push(c);
                SymbolId(first_free_id + unknown.len() as u32 - 1)
            }),
        };
        symbols.push(id);
    }
    (BoundedSequence::new(symbols, boundaries), unknown)
}

/// Inverse of [`encode`] up to collapsing of separator runs.
pub fn decode_terminals(
    seq: &BoundedSequence,
    table: &SymbolTable,
    separator: char,
) -> Result<String> {
    let mut out = String::with_capacity(seq.len() + seq.boundaries.len());
    for (i, segment) in seq.segments().enumerate() {
        if i > 0 {
            out.push(separator);
        }
        for &id in segment {
            let c = table.char(id).ok_or(Error::UnknownSymbol(id))?;
            out.push(c);
        }
    }
    Ok(out)
}

/// Default read size for streaming ingestion.
pub const CHUNK_SIZE: usize = 1 << 16;

/// Streams `reader` in fixed-size chunks, handing each normalized piece of
/// text to `sink`. Multibyte sequences split across chunks are carried over.
pub fn for_each_normalized_chunk<R: Read>(
    mut reader: R,
    opts: NormalizationOptions,
    chunk_size: usize,
    mut sink: impl FnMut(&str),
) -> Result<()> {
    let mut buf = vec![0u8; chunk_size.max(4)];
    let mut carry = 0usize;
    let mut consumed: u64 = 0;
    let mut normalized = String::new();
    loop {
        let n = loop {
            match reader.read(&mut buf[carry..]) {
                Ok(n) => break n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(Error::io("<input>", e)),
            }
        };
        let filled = carry + n;
        if filled == 0 {
            return Ok(());
        }
        let valid = match std::str::from_utf8(&buf[..filled]) {
            Ok(_) => filled,
            Err(e) => {
                // A truncated sequence at the chunk end is fine unless the
                // input is exhausted.
                if e.error_len().is_some() || n == 0 {
                    return Err(Error::Utf8 {
                        offset: consumed + e.valid_up_to() as u64,
                    });
                }
                e.valid_up_to()
            }
        };
        let text = std::str::from_utf8(&buf[..valid]).expect("validated prefix");
        normalized.clear();
        normalize_into(text, opts, &mut normalized);
        sink(&normalized);
        consumed += valid as u64;
        buf.copy_within(valid..filled, 0);
        carry = filled - valid;
    }
}

/// Reads and normalizes a whole UTF-8 file.
pub fn read_normalized(path: &Path, opts: NormalizationOptions) -> Result<String> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    for_each_normalized_chunk(file, opts, CHUNK_SIZE, |s| out.push_str(s))
        .map_err(|e| attach_path(e, path))?;
    Ok(out)
}

/// Reads, normalizes and encodes a file without holding the raw text.
pub fn read_corpus(
    path: &Path,
    opts: NormalizationOptions,
    separators: &Separators,
) -> Result<Encoded> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut enc = Encoder::new(separators.clone());
    for_each_normalized_chunk(file, opts, CHUNK_SIZE, |s| enc.push_str(s))
        .map_err(|e| attach_path(e, path))?;
    Ok(enc.finish())
}

fn attach_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(table: &SymbolTable, s: &str) -> Vec<SymbolId> {
        s.chars().map(|c| table.id(c).unwrap()).collect()
    }

    #[test]
    fn normalize_examples() {
        let both = NormalizationOptions::for_embeddings();
        assert_eq!(
            normalize("Ranneberger (Born 1949)", both),
            "ranneberger (born NNNN)"
        );
        assert_eq!(normalize("abc", NormalizationOptions::default()), "abc");
        assert_eq!(normalize("ÅÄÖ 12", both), "åäö NN");
    }

    #[test]
    fn placeholder_survives_second_pass() {
        let both = NormalizationOptions::for_embeddings();
        let once = normalize("Born 1949 in NYC", both);
        assert_eq!(once, "born NNNN in Nyc");
        assert_eq!(normalize(&once, both), once);
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = normalize_bytes(b"ab\xffcd", NormalizationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Utf8 { offset: 2 }));
    }

    #[test]
    fn encode_examples() {
        let seps = Separators::default();
        let e = encode("ab\ncd", &seps);
        assert_eq!(e.seq.symbols, ids(&e.table, "abcd"));
        assert_eq!(e.seq.boundaries, vec![2]);

        let e = encode("a b", &seps);
        assert_eq!(e.seq.symbols, ids(&e.table, "a b"));
        assert!(e.seq.boundaries.is_empty());

        let e = encode("\n\nxy\n", &seps);
        assert_eq!(e.seq.symbols, ids(&e.table, "xy"));
        assert_eq!(e.seq.boundaries, vec![0, 2]);
        e.seq.validate().unwrap();
    }

    #[test]
    fn decode_examples() {
        let table = SymbolTable::from_chars(['a', 'b']);
        let seq = BoundedSequence::new(ids(&table, "ab"), vec![1]);
        assert_eq!(decode_terminals(&seq, &table, '\n').unwrap(), "a\nb");

        let seps = Separators::default();
        let e = encode("hello world", &seps);
        assert_eq!(
            decode_terminals(&e.seq, &e.table, '\n').unwrap(),
            "hello world"
        );
        let e = encode("a\n\nb", &seps);
        assert_eq!(decode_terminals(&e.seq, &e.table, '\n').unwrap(), "a\nb");
    }

    #[test]
    fn decode_rejects_nonterminals() {
        let table = SymbolTable::from_chars(['a']);
        let seq = BoundedSequence::new(vec![SymbolId(0), SymbolId(1)], vec![]);
        assert!(matches!(
            decode_terminals(&seq, &table, '\n'),
            Err(Error::UnknownSymbol(SymbolId(1)))
        ));
    }

    #[test]
    fn table_ids_follow_code_points() {
        let t = SymbolTable::from_chars("βαβ".chars());
        assert_eq!(t.id('α'), Some(SymbolId(0)));
        assert_eq!(t.id('β'), Some(SymbolId(1)));
        assert!(SymbolTable::from_ordered(vec!['a', 'a']).is_err());
    }

    #[test]
    fn encode_with_assigns_fresh_ids() {
        let table = SymbolTable::from_chars(['a', 'b']);
        let (seq, unknown) = encode_with(&table, 10, "axbyx", &Separators::default());
        assert_eq!(unknown, vec!['x', 'y']);
        let raw: Vec<u32> = seq.symbols.iter().map(|s| s.0).collect();
        assert_eq!(raw, vec![0, 10, 1, 11, 10]);
    }

    #[test]
    fn chunked_reading_handles_split_multibyte() {
        let text = "åäö\nñ€x".repeat(50);
        for chunk in [4, 5, 7, 64] {
            let mut out = String::new();
            for_each_normalized_chunk(text.as_bytes(), NormalizationOptions::raw(), chunk, |s| {
                out.push_str(s)
            })
            .unwrap();
            assert_eq!(out, text, "chunk size {chunk}");
        }
    }

    #[test]
    fn chunked_reading_reports_global_offset() {
        let mut bytes = "abcdefgh".repeat(3).into_bytes();
        bytes.push(0xC3); // truncated at end of input
        let err = for_each_normalized_chunk(&bytes[..], NormalizationOptions::raw(), 5, |_| {})
            .unwrap_err();
        assert!(matches!(err, Error::Utf8 { offset: 24 }), "{err:?}");

        let mut bytes = "abcdefgh".repeat(3).into_bytes();
        bytes.insert(13, 0xFF);
        let err = for_each_normalized_chunk(&bytes[..], NormalizationOptions::raw(), 4, |_| {})
            .unwrap_err();
        assert!(matches!(err, Error::Utf8 { offset: 13 }), "{err:?}");
    }

    #[test]
    fn streaming_encoder_collapses_runs_across_pushes() {
        let mut enc = Encoder::new(Separators::default());
        enc.push_str("ab\n");
        enc.push_str("\ncd\n");
        let e = enc.finish();
        assert_eq!(e.seq.boundaries, vec![2, 4]);
    }
}
