//! Quadratic reference trainer: rescan, count, replace, repeat.

use std::cmp::Reverse;

use rustc_hash::FxHashMap;

use super::{vocabulary_full, MergeEvent, StopCriteria, StopReason, Training};
use crate::corpus::{BoundedSequence, SymbolId, SymbolTable};
use crate::grammar::{Grammar, Rule};

struct Tally {
    count: u64,
    first: usize,
    last_taken: usize,
}

/// Same observable behaviour as [`super::train`], computed by rescanning the
/// whole sequence after every merge.
pub fn train_naive(table: &SymbolTable, seq: &BoundedSequence, stop: &StopCriteria) -> Training {
    let mut segments: Vec<Vec<u32>> = seq
        .segments()
        .map(|s| s.iter().map(|id| id.0).collect())
        .collect();
    let terminals = table.len();
    let mut next_id = terminals as u32;
    let mut rules = Vec::new();
    let mut events = Vec::new();

    let stop_reason = loop {
        if stop.max_merges.is_some_and(|m| events.len() >= m) {
            break StopReason::MaxMerges;
        }
        if vocabulary_full(stop, terminals, rules.len()) {
            break StopReason::MaxVocabulary;
        }

        // Greedy per-pair counting: an occurrence is taken unless it overlaps
        // the previously taken occurrence of the same pair.
        let mut tallies: FxHashMap<(u32, u32), Tally> = FxHashMap::default();
        let mut offset = 0;
        for segment in &segments {
            for i in 0..segment.len().saturating_sub(1) {
                let pos = offset + i;
                let t = tallies
                    .entry((segment[i], segment[i + 1]))
                    .or_insert(Tally {
                        count: 0,
                        first: pos,
                        last_taken: usize::MAX,
                    });
                if t.last_taken != usize::MAX && t.last_taken + 1 == pos {
                    continue;
                }
                t.count += 1;
                t.last_taken = pos;
            }
            offset += segment.len();
        }

        let best = tallies
            .iter()
            .max_by_key(|(&(l, r), t)| (t.count, Reverse(t.first), Reverse(l), Reverse(r)));
        let Some((&(left, right), tally)) = best else {
            break StopReason::MinFrequency;
        };
        if tally.count < stop.min_frequency {
            break StopReason::MinFrequency;
        }

        let new_id = next_id;
        next_id += 1;
        let mut replaced = 0;
        for segment in &mut segments {
            let mut out = Vec::with_capacity(segment.len());
            let mut i = 0;
            while i < segment.len() {
                if i + 1 < segment.len() && segment[i] == left && segment[i + 1] == right {
                    out.push(new_id);
                    replaced += 1;
                    i += 2;
                } else {
                    out.push(segment[i]);
                    i += 1;
                }
            }
            *segment = out;
        }
        debug_assert_eq!(replaced, tally.count);

        rules.push(Rule {
            id: SymbolId(new_id),
            left: SymbolId(left),
            right: SymbolId(right),
            freq_at_merge: replaced,
        });
        events.push(MergeEvent {
            new_id: SymbolId(new_id),
            left: SymbolId(left),
            right: SymbolId(right),
            count: replaced,
        });
    };

    let mut symbols = Vec::new();
    let mut boundaries = Vec::with_capacity(seq.boundaries.len());
    for (i, segment) in segments.iter().enumerate() {
        if i > 0 {
            boundaries.push(symbols.len());
        }
        symbols.extend(segment.iter().map(|&s| SymbolId(s)));
    }
    let compressed = BoundedSequence {
        symbols,
        boundaries,
        doc_ids: seq.doc_ids.clone(),
    };
    Training {
        grammar: Grammar::from_parts(table.clone(), rules).expect("rules built in id order"),
        compressed,
        events,
        stop_reason,
    }
}
