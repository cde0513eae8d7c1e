//! Linear-time merge engine.
//!
//! The sequence lives in slot arrays linked as a doubly linked list. A merge
//! writes the new symbol into the left slot of each occurrence and unlinks
//! the right slot, so slot indices stay monotone in sequence order and can
//! serve as positions for tie-breaking. Boundaries are sentinel slots that
//! never take part in a pair.
//!
//! Each pair keeps its count exactly and a lazy min-heap of candidate
//! positions: entries are validated when read, stale ones are dropped. For
//! unequal pairs an entry is the left slot of an occurrence; for `(x, x)` it
//! is the first slot of a run of `x` of length at least two.
//!
//! Around a merge, the affected stretch of the list is tallied out, rewritten
//! and tallied back in. Stretches are widened to whole runs of the symbols
//! being consumed, so run-based counts of `(x, x)` pairs stay exact.
//!
//! Existing pairs can only lose occurrences and their earliest occurrence
//! only moves right, so priority keys in the queue are upper bounds; the
//! queue is revalidated lazily on pop.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use super::{vocabulary_full, MergeEvent, StopCriteria, StopReason, Training};
use crate::corpus::{BoundedSequence, SymbolId, SymbolTable};
use crate::grammar::{Grammar, Rule};

const NIL: u32 = u32::MAX;
const BOUNDARY: u32 = u32::MAX;
const DEAD: u32 = u32::MAX - 1;
const NO_RUN: u32 = u32::MAX - 2;

#[inline]
fn key(left: u32, right: u32) -> u64 {
    ((left as u64) << 32) | right as u64
}

#[derive(Default)]
struct PairRecord {
    left: u32,
    right: u32,
    count: u64,
    positions: BinaryHeap<Reverse<u32>>,
}

/// An element of the in-training sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Symbol(SymbolId),
    Boundary,
}

pub(crate) struct MergeState {
    sym: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    head: u32,
    pair_index: FxHashMap<u64, u32>,
    records: Vec<PairRecord>,
    free_records: Vec<u32>,
    symbol_counts: Vec<u64>,
    live_symbols: usize,
}

/// A contiguous stretch of the list touched by one batch of replacements.
struct Region {
    start: u32,
    end: u32,
    occurrences: std::ops::Range<usize>,
}

impl MergeState {
    pub(crate) fn new(seq: &BoundedSequence) -> Self {
        let n = seq.len() + seq.boundaries.len();
        let mut sym = Vec::with_capacity(n);
        let mut counts: Vec<u64> = Vec::new();
        for (i, segment) in seq.segments().enumerate() {
            if i > 0 {
                sym.push(BOUNDARY);
            }
            for &s in segment {
                sym.push(s.0);
                if counts.len() <= s.index() {
                    counts.resize(s.index() + 1, 0);
                }
                counts[s.index()] += 1;
            }
        }
        let len = sym.len() as u32;
        let prev = (0..len).map(|i| if i == 0 { NIL } else { i - 1 }).collect();
        let next = (0..len)
            .map(|i| if i + 1 == len { NIL } else { i + 1 })
            .collect();
        let mut state = MergeState {
            sym,
            prev,
            next,
            head: if len == 0 { NIL } else { 0 },
            pair_index: FxHashMap::default(),
            records: Vec::new(),
            free_records: Vec::new(),
            symbol_counts: counts,
            live_symbols: seq.len(),
        };
        if len > 0 {
            let mut fresh = Vec::new();
            state.tally(0, len - 1, true, NO_RUN, &mut fresh);
        }
        state
    }

    pub(crate) fn live_symbols(&self) -> usize {
        self.live_symbols
    }

    pub(crate) fn symbol_counts(&self) -> &[u64] {
        &self.symbol_counts
    }

    pub(crate) fn slots(&self) -> SlotIter<'_> {
        SlotIter {
            state: self,
            cursor: self.head,
        }
    }

    pub(crate) fn to_sequence(&self, doc_ids: &[u32]) -> BoundedSequence {
        let mut symbols = Vec::with_capacity(self.live_symbols);
        let mut boundaries = Vec::new();
        for slot in self.slots() {
            match slot {
                Slot::Symbol(s) => symbols.push(s),
                Slot::Boundary => boundaries.push(symbols.len()),
            }
        }
        BoundedSequence {
            symbols,
            boundaries,
            doc_ids: doc_ids.to_vec(),
        }
    }

    /// Every pair with a nonzero count.
    pub(crate) fn pair_counts(&self) -> Vec<((SymbolId, SymbolId), u64)> {
        let mut out: Vec<_> = self
            .pair_index
            .values()
            .map(|&rid| &self.records[rid as usize])
            .filter(|r| r.count > 0)
            .map(|r| ((SymbolId(r.left), SymbolId(r.right)), r.count))
            .collect();
        out.sort_unstable();
        out
    }

    pub(crate) fn count_of(&self, left: u32, right: u32) -> u64 {
        self.pair_index
            .get(&key(left, right))
            .map_or(0, |&rid| self.records[rid as usize].count)
    }

    #[inline]
    fn is_symbol(&self, slot: u32) -> bool {
        slot != NIL && self.sym[slot as usize] != BOUNDARY
    }

    #[inline]
    fn is_occurrence(&self, left: u32, right: u32, p: u32) -> bool {
        let p = p as usize;
        if self.sym[p] != left {
            return false;
        }
        let q = self.next[p];
        if q == NIL || self.sym[q as usize] != right {
            return false;
        }
        if left == right {
            // Entries for (x, x) mark run starts.
            let before = self.prev[p];
            return before == NIL || self.sym[before as usize] != left;
        }
        true
    }

    /// Earliest current position of a pair, discarding stale entries.
    pub(crate) fn first_position(&mut self, left: u32, right: u32) -> Option<u32> {
        let rid = *self.pair_index.get(&key(left, right))?;
        loop {
            let Reverse(p) = *self.records[rid as usize].positions.peek()?;
            if self.is_occurrence(left, right, p) {
                return Some(p);
            }
            self.records[rid as usize].positions.pop();
        }
    }

    pub(crate) fn remove_pair(&mut self, left: u32, right: u32) {
        if let Some(rid) = self.pair_index.remove(&key(left, right)) {
            self.records[rid as usize] = PairRecord::default();
            self.free_records.push(rid);
        }
    }

    fn adjust(&mut self, left: u32, right: u32, pos: u32, delta: u64, add: bool) -> u32 {
        let k = key(left, right);
        let rid = match self.pair_index.get(&k) {
            Some(&rid) => rid,
            None => {
                debug_assert!(add, "removing an untracked pair");
                let record = PairRecord {
                    left,
                    right,
                    ..Default::default()
                };
                let rid = match self.free_records.pop() {
                    Some(rid) => {
                        self.records[rid as usize] = record;
                        rid
                    }
                    None => {
                        self.records.push(record);
                        (self.records.len() - 1) as u32
                    }
                };
                self.pair_index.insert(k, rid);
                rid
            }
        };
        let record = &mut self.records[rid as usize];
        if add {
            record.count += delta;
            record.positions.push(Reverse(pos));
        } else {
            debug_assert!(record.count >= delta, "pair count underflow");
            record.count -= delta;
        }
        rid
    }

    /// Adds or removes the pair contributions of the slots `start..=end`.
    ///
    /// The stretch must contain whole runs wherever a run is about to change;
    /// partial runs at the edges are fine as long as they read the same
    /// before and after the rewrite.
    fn tally(&mut self, start: u32, end: u32, add: bool, new_symbol: u32, fresh: &mut Vec<u32>) {
        let mut run_sym = NO_RUN;
        let mut run_start = NIL;
        let mut run_len = 0u64;
        let mut last = NIL;
        let mut p = start;
        loop {
            let s = self.sym[p as usize];
            if s == BOUNDARY {
                self.flush_run(run_sym, run_start, run_len, add, new_symbol, fresh);
                run_sym = NO_RUN;
                run_len = 0;
            } else if s == run_sym {
                run_len += 1;
            } else {
                self.flush_run(run_sym, run_start, run_len, add, new_symbol, fresh);
                if run_sym != NO_RUN {
                    let rid = self.adjust(run_sym, s, last, 1, add);
                    if add && (run_sym == new_symbol || s == new_symbol) {
                        fresh.push(rid);
                    }
                }
                run_sym = s;
                run_start = p;
                run_len = 1;
            }
            if p == end {
                break;
            }
            last = p;
            p = self.next[p as usize];
        }
        self.flush_run(run_sym, run_start, run_len, add, new_symbol, fresh);
    }

    #[inline]
    fn flush_run(
        &mut self,
        run_sym: u32,
        run_start: u32,
        run_len: u64,
        add: bool,
        new_symbol: u32,
        fresh: &mut Vec<u32>,
    ) {
        if run_len >= 2 {
            let rid = self.adjust(run_sym, run_sym, run_start, run_len / 2, add);
            if add && run_sym == new_symbol {
                fresh.push(rid);
            }
        }
    }

    /// Current occurrences of `(left, right)` as left slots, in order.
    fn occurrences(&mut self, left: u32, right: u32) -> Vec<u32> {
        let Some(&rid) = self.pair_index.get(&key(left, right)) else {
            return Vec::new();
        };
        let heap = std::mem::take(&mut self.records[rid as usize].positions);
        let mut candidates: Vec<u32> = heap.into_vec().into_iter().map(|Reverse(p)| p).collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.retain(|&p| self.is_occurrence(left, right, p));
        if left != right {
            return candidates;
        }
        let mut out = Vec::new();
        for run_start in candidates {
            let mut p = run_start;
            loop {
                let q = self.next[p as usize];
                if q == NIL || self.sym[q as usize] != left {
                    break;
                }
                out.push(p);
                p = self.next[q as usize];
                if p == NIL || self.sym[p as usize] != left {
                    break;
                }
            }
        }
        out
    }

    /// Group occurrences into disjoint stretches covering every pair that a
    /// rewrite can change, including whole runs of the consumed symbols.
    fn regions(&self, occurrences: &[u32]) -> Vec<Region> {
        let mut regions: Vec<Region> = Vec::new();
        let mut i = 0;
        while i < occurrences.len() {
            let first = occurrences[i];
            let mut j = i;
            while j + 1 < occurrences.len() {
                let q = self.next[occurrences[j] as usize];
                if self.next[q as usize] != occurrences[j + 1] {
                    break;
                }
                j += 1;
            }
            let last_right = self.next[occurrences[j] as usize];

            let left_sym = self.sym[first as usize];
            let mut start = first;
            loop {
                let before = self.prev[start as usize];
                if self.is_symbol(before) && self.sym[before as usize] == left_sym {
                    start = before;
                } else {
                    if self.is_symbol(before) {
                        start = before;
                    }
                    break;
                }
            }
            let right_sym = self.sym[last_right as usize];
            let mut end = last_right;
            loop {
                let after = self.next[end as usize];
                if self.is_symbol(after) && self.sym[after as usize] == right_sym {
                    end = after;
                } else {
                    if self.is_symbol(after) {
                        end = after;
                    }
                    break;
                }
            }

            match regions.last_mut() {
                Some(r) if start <= r.end => {
                    r.end = end;
                    r.occurrences.end = j + 1;
                }
                _ => regions.push(Region {
                    start,
                    end,
                    occurrences: i..j + 1,
                }),
            }
            i = j + 1;
        }
        regions
    }

    fn replace(&mut self, p: u32, new_symbol: u32) {
        let (pu, q) = (p as usize, self.next[p as usize]);
        let qu = q as usize;
        let left = self.sym[pu] as usize;
        let right = self.sym[qu] as usize;
        self.symbol_counts[left] -= 1;
        self.symbol_counts[right] -= 1;
        self.symbol_counts[new_symbol as usize] += 1;
        self.sym[pu] = new_symbol;
        self.sym[qu] = DEAD;
        let after = self.next[qu];
        self.next[pu] = after;
        if after != NIL {
            self.prev[after as usize] = p;
        }
        self.live_symbols -= 1;
    }

    /// Replaces every current occurrence of `(left, right)` by `new_symbol`,
    /// left to right. Returns the number of replacements and the records of
    /// pairs involving `new_symbol`.
    pub(crate) fn merge_pair(&mut self, left: u32, right: u32, new_symbol: u32) -> (u64, Vec<u32>) {
        let occurrences = self.occurrences(left, right);
        let mut fresh = Vec::new();
        if occurrences.is_empty() {
            self.remove_pair(left, right);
            return (0, fresh);
        }
        if self.symbol_counts.len() <= new_symbol as usize {
            self.symbol_counts.resize(new_symbol as usize + 1, 0);
        }
        for region in self.regions(&occurrences) {
            self.tally(region.start, region.end, false, NO_RUN, &mut fresh);
            let ops = &occurrences[region.occurrences.clone()];
            let last_left = *ops.last().expect("non-empty region");
            let end = if region.end == self.next[last_left as usize] {
                last_left
            } else {
                region.end
            };
            for &p in ops {
                self.replace(p, new_symbol);
            }
            self.tally(region.start, end, true, new_symbol, &mut fresh);
        }
        debug_assert_eq!(self.count_of(left, right), 0);
        self.remove_pair(left, right);
        fresh.sort_unstable();
        fresh.dedup();
        (occurrences.len() as u64, fresh)
    }

    fn record_pair(&self, rid: u32) -> (u32, u32, u64) {
        let r = &self.records[rid as usize];
        (r.left, r.right, r.count)
    }
}

pub(crate) struct SlotIter<'a> {
    state: &'a MergeState,
    cursor: u32,
}

impl Iterator for SlotIter<'_> {
    type Item = Slot;

    fn next(&mut self) -> Option<Slot> {
        if self.cursor == NIL {
            return None;
        }
        let s = self.state.sym[self.cursor as usize];
        self.cursor = self.state.next[self.cursor as usize];
        Some(if s == BOUNDARY {
            Slot::Boundary
        } else {
            Slot::Symbol(SymbolId(s))
        })
    }
}

type QueueKey = (u64, Reverse<u32>, Reverse<u32>, Reverse<u32>);

/// Stepwise trainer. Training is resumable: checkpoints can be taken between
/// calls to [`Trainer::step`] or [`Trainer::run_to`].
pub struct Trainer {
    state: MergeState,
    table: SymbolTable,
    stop: StopCriteria,
    doc_ids: Vec<u32>,
    rules: Vec<Rule>,
    events: Vec<MergeEvent>,
    queue: BinaryHeap<QueueKey>,
    stopped: Option<StopReason>,
}

impl Trainer {
    pub fn new(table: SymbolTable, seq: &BoundedSequence, stop: StopCriteria) -> Self {
        let mut state = MergeState::new(seq);
        let pairs: Vec<(u32, u32)> = state
            .pair_index
            .values()
            .map(|&rid| {
                let (l, r, _) = state.record_pair(rid);
                (l, r)
            })
            .collect();
        let mut queue = BinaryHeap::with_capacity(pairs.len());
        for (l, r) in pairs {
            let count = state.count_of(l, r);
            let first = state
                .first_position(l, r)
                .expect("counted pair has a position");
            queue.push((count, Reverse(first), Reverse(l), Reverse(r)));
        }
        Trainer {
            state,
            table,
            stop,
            doc_ids: seq.doc_ids.clone(),
            rules: Vec::new(),
            events: Vec::new(),
            queue,
            stopped: None,
        }
    }

    pub fn events(&self) -> &[MergeEvent] {
        &self.events
    }

    pub fn merges(&self) -> usize {
        self.events.len()
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stopped
    }

    /// Occurrence count of every symbol id in the current sequence.
    pub fn symbol_counts(&self) -> &[u64] {
        self.state.symbol_counts()
    }

    /// Number of symbols (excluding boundaries) in the current sequence.
    pub fn sequence_len(&self) -> usize {
        self.state.live_symbols()
    }

    pub fn current_sequence(&self) -> BoundedSequence {
        self.state.to_sequence(&self.doc_ids)
    }

    /// Walks the current sequence without materializing it.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        self.state.slots()
    }

    /// Incrementally maintained counts of all pairs with nonzero count.
    pub fn pair_counts(&self) -> Vec<((SymbolId, SymbolId), u64)> {
        self.state.pair_counts()
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Performs one merge, or returns `None` once a stop criterion fires.
    pub fn step(&mut self) -> Option<MergeEvent> {
        if self.stopped.is_some() {
            return None;
        }
        if self.stop.max_merges.is_some_and(|m| self.events.len() >= m) {
            self.stopped = Some(StopReason::MaxMerges);
            return None;
        }
        if vocabulary_full(&self.stop, self.table.len(), self.rules.len()) {
            self.stopped = Some(StopReason::MaxVocabulary);
            return None;
        }
        let (left, right, count) = loop {
            let Some(entry) = self.queue.pop() else {
                self.stopped = Some(StopReason::MinFrequency);
                return None;
            };
            let (stored_count, Reverse(stored_first), Reverse(l), Reverse(r)) = entry;
            let count = self.state.count_of(l, r);
            if count == 0 {
                self.state.remove_pair(l, r);
                continue;
            }
            let first = self
                .state
                .first_position(l, r)
                .expect("counted pair has a position");
            if (count, first) != (stored_count, stored_first) {
                debug_assert!((count, Reverse(first)) < (stored_count, Reverse(stored_first)));
                self.queue
                    .push((count, Reverse(first), Reverse(l), Reverse(r)));
                continue;
            }
            break (l, r, count);
        };
        if count < self.stop.min_frequency {
            self.stopped = Some(StopReason::MinFrequency);
            return None;
        }

        let new_id = (self.table.len() + self.rules.len()) as u32;
        let (replaced, fresh) = self.state.merge_pair(left, right, new_id);
        debug_assert_eq!(replaced, count);
        for rid in fresh {
            let (l, r, c) = self.state.record_pair(rid);
            if c == 0 {
                continue;
            }
            let first = self
                .state
                .first_position(l, r)
                .expect("counted pair has a position");
            self.queue.push((c, Reverse(first), Reverse(l), Reverse(r)));
        }
        let event = MergeEvent {
            new_id: SymbolId(new_id),
            left: SymbolId(left),
            right: SymbolId(right),
            count: replaced,
        };
        self.rules.push(Rule {
            id: event.new_id,
            left: event.left,
            right: event.right,
            freq_at_merge: replaced,
        });
        self.events.push(event);
        Some(event)
    }

    /// Merges until `merges` rules exist or a criterion stops training.
    /// Returns `true` if the target was reached.
    pub fn run_to(&mut self, merges: usize) -> bool {
        while self.events.len() < merges {
            if self.step().is_none() {
                return false;
            }
        }
        true
    }

    pub fn run(&mut self) {
        while self.step().is_some() {}
    }

    /// Grammar learned so far.
    pub fn grammar(&self) -> Grammar {
        Grammar::from_parts(self.table.clone(), self.rules.clone())
            .expect("rules built in id order")
    }

    pub fn finish(mut self) -> Training {
        if self.stopped.is_none() {
            self.run();
        }
        Training {
            compressed: self.current_sequence(),
            grammar: Grammar::from_parts(self.table, self.rules).expect("rules built in id order"),
            events: self.events,
            stop_reason: self.stopped.expect("run until stopped"),
        }
    }
}

/// Replays rules in creation order over `seq`.
pub(crate) fn replay(seq: &BoundedSequence, rules: &[Rule]) -> BoundedSequence {
    let mut state = MergeState::new(seq);
    for rule in rules {
        state.merge_pair(rule.left.0, rule.right.0, rule.id.0);
    }
    state.to_sequence(&seq.doc_ids)
}

/// Replays rules in creation order, calling `visit(checkpoint, applied,
/// symbol_counts)` once the first `checkpoint` rules (or all of them, if
/// fewer) have been applied. `checkpoints` must be ascending.
pub(crate) fn replay_checkpoints(
    seq: &BoundedSequence,
    rules: &[Rule],
    checkpoints: &[usize],
    mut visit: impl FnMut(usize, usize, &[u64]),
) {
    let mut state = MergeState::new(seq);
    let mut applied = 0;
    for &checkpoint in checkpoints {
        let target = checkpoint.min(rules.len());
        for rule in &rules[applied.min(target)..target] {
            state.merge_pair(rule.left.0, rule.right.0, rule.id.0);
        }
        applied = applied.max(target);
        visit(checkpoint, applied, state.symbol_counts());
    }
}
