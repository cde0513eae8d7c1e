//! Learned rule sets: expansion, application to new text, decoding and
//! persistence.

mod file;
pub mod segmented;

pub use file::{load, read_grammar, save, write_grammar, FORMAT_VERSION, MAGIC};

use std::io::Write;

use segmented::SegmentedWriter;

use crate::corpus::{encode_with, BoundedSequence, Separators, SymbolId, SymbolTable};
use crate::error::{Error, Result};
use crate::repair::engine_replay;

/// `id -> (left, right)`, recorded with the pair count at merge time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub id: SymbolId,
    pub left: SymbolId,
    pub right: SymbolId,
    pub freq_at_merge: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    table: SymbolTable,
    rules: Vec<Rule>,
}

/// Text segmented by a grammar. Ids at or above `grammar.symbol_count()`
/// stand for characters the grammar has never seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub seq: BoundedSequence,
    pub unknown: Vec<char>,
    /// Number of input characters that were not in the terminal table.
    pub unknown_occurrences: usize,
}

impl Grammar {
    /// Checks that rule ids are consecutive from the terminal count and that
    /// every rule only refers to earlier symbols.
    pub fn from_parts(table: SymbolTable, rules: Vec<Rule>) -> Result<Self> {
        let terminals = table.len() as u32;
        for (i, rule) in rules.iter().enumerate() {
            let expected = terminals + i as u32;
            if rule.id.0 != expected {
                return Err(Error::Validation(format!(
                    "rule id {} out of order, expected {expected}",
                    rule.id
                )));
            }
            if rule.left.0 >= rule.id.0 || rule.right.0 >= rule.id.0 {
                return Err(Error::Validation(format!(
                    "rule {} -> ({}, {}) refers to a symbol that is not older",
                    rule.id, rule.left, rule.right
                )));
            }
        }
        Ok(Grammar { table, rules })
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn terminal_count(&self) -> usize {
        self.table.len()
    }

    /// Terminals plus rules.
    pub fn symbol_count(&self) -> usize {
        self.table.len() + self.rules.len()
    }

    pub fn rule(&self, id: SymbolId) -> Option<&Rule> {
        id.index()
            .checked_sub(self.table.len())
            .and_then(|i| self.rules.get(i))
    }

    fn check(&self, id: SymbolId) -> Result<()> {
        if id.index() < self.symbol_count() {
            Ok(())
        } else {
            Err(Error::UnknownSymbol(id))
        }
    }

    /// Terminal string a symbol stands for.
    pub fn expand(&self, id: SymbolId) -> Result<String> {
        let mut out = String::new();
        self.expand_into(id, &mut out)?;
        Ok(out)
    }

    pub fn expand_into(&self, id: SymbolId, out: &mut String) -> Result<()> {
        self.check(id)?;
        let mut stack = vec![id];
        while let Some(s) = stack.pop() {
            match self.rule(s) {
                Some(rule) => {
                    stack.push(rule.right);
                    stack.push(rule.left);
                }
                None => out.push(self.table.char(s).expect("checked id is a terminal")),
            }
        }
        Ok(())
    }

    /// Expands a symbol sequence; equal to concatenating per-symbol expansions.
    pub fn expand_all(&self, ids: &[SymbolId]) -> Result<String> {
        let mut out = String::new();
        for &id in ids {
            self.expand_into(id, &mut out)?;
        }
        Ok(out)
    }

    /// Length in characters of every symbol's expansion, indexed by id.
    pub fn expansion_lengths(&self) -> Vec<usize> {
        let mut lengths = vec![1; self.table.len()];
        lengths.reserve(self.rules.len());
        for rule in &self.rules {
            let len = lengths[rule.left.index()] + lengths[rule.right.index()];
            lengths.push(len);
        }
        lengths
    }

    /// Nesting depth: 0 for terminals, `1 + max(children)` for rules.
    pub fn depth(&self, id: SymbolId) -> Result<usize> {
        self.check(id)?;
        let Some(last) = id.index().checked_sub(self.table.len()) else {
            return Ok(0);
        };
        let depth_of = |depths: &[usize], s: SymbolId| {
            s.index()
                .checked_sub(self.table.len())
                .map_or(0, |i| depths[i])
        };
        let mut depths: Vec<usize> = Vec::with_capacity(last + 1);
        for rule in &self.rules[..=last] {
            let d = 1 + depth_of(&depths, rule.left).max(depth_of(&depths, rule.right));
            depths.push(d);
        }
        Ok(depths[last])
    }

    /// Rewrites a terminal sequence by replaying every rule in creation
    /// order, each left to right and never across a boundary.
    pub fn apply(&self, seq: &BoundedSequence) -> BoundedSequence {
        engine_replay(seq, &self.rules)
    }

    /// Replays only the first `rules` rules.
    pub fn apply_prefix(&self, seq: &BoundedSequence, rules: usize) -> BoundedSequence {
        engine_replay(seq, &self.rules[..rules.min(self.rules.len())])
    }

    /// Encodes normalized text over this grammar's terminals and segments it.
    /// Characters outside the terminal table pass through as single tokens.
    pub fn apply_text(&self, text: &str, separators: &Separators) -> Segmentation {
        let (seq, unknown) = encode_with(&self.table, self.symbol_count() as u32, text, separators);
        let unknown_occurrences = if unknown.is_empty() {
            0
        } else {
            let first = self.symbol_count();
            seq.symbols.iter().filter(|s| s.index() >= first).count()
        };
        Segmentation {
            seq: self.apply(&seq),
            unknown,
            unknown_occurrences,
        }
    }

    /// Restores the text of a sequence over this grammar.
    pub fn decode(&self, seq: &BoundedSequence, separator: char) -> Result<String> {
        let mut out = String::new();
        for (i, segment) in seq.segments().enumerate() {
            if i > 0 {
                out.push(separator);
            }
            for &id in segment {
                self.expand_into(id, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Decodes a segmentation, including pass-through characters.
    pub fn decode_segmentation(&self, seg: &Segmentation, separator: char) -> Result<String> {
        let mut out = String::new();
        for (i, segment) in seg.seq.segments().enumerate() {
            if i > 0 {
                out.push(separator);
            }
            for &id in segment {
                self.token_into(id, &seg.unknown, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Writes `seq` as segmented-corpus lines: one token per line, a blank
    /// line per boundary. Ids past the grammar resolve against `unknown`.
    pub fn write_segmented<W: Write>(
        &self,
        seq: &BoundedSequence,
        unknown: &[char],
        out: &mut SegmentedWriter<W>,
    ) -> Result<()> {
        let io = |e| Error::io("<segmented output>", e);
        let mut text = String::new();
        for (i, segment) in seq.segments().enumerate() {
            if i > 0 {
                out.boundary().map_err(io)?;
            }
            for &id in segment {
                text.clear();
                self.token_into(id, unknown, &mut text)?;
                out.token(&text).map_err(io)?;
            }
        }
        Ok(())
    }

    /// Text of a token, resolving pass-through ids against `unknown`.
    pub fn token_into(&self, id: SymbolId, unknown: &[char], out: &mut String) -> Result<()> {
        match id.index().checked_sub(self.symbol_count()) {
            Some(extra) => {
                let c = unknown.get(extra).ok_or(Error::UnknownSymbol(id))?;
                out.push(*c);
                Ok(())
            }
            None => self.expand_into(id, out),
        }
    }
}
