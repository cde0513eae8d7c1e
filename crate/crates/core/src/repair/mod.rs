//! Iterated most-frequent-pair replacement.
//!
//! Counting convention: a pair's count is the number of non-overlapping
//! occurrences found scanning left to right, never spanning a boundary. For
//! `(x, x)` inside a run of `L` copies of `x` that is `L / 2`. The count
//! therefore equals the number of replacements a merge performs.
//!
//! Selection: highest count first; ties go to the pair whose earliest
//! current occurrence is leftmost, then to the smaller `(left, right)`.

mod engine;
mod naive;

use std::fmt;

pub(crate) use engine::{replay as engine_replay, replay_checkpoints};
pub use engine::{Slot, Trainer};
pub use naive::train_naive;

use crate::corpus::{BoundedSequence, SymbolId, SymbolTable};
use crate::grammar::Grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopCriteria {
    /// Merge only pairs occurring at least this often. Must be at least 2.
    pub min_frequency: u64,
    /// Upper bound on terminals plus rules.
    pub max_vocabulary: Option<usize>,
    pub max_merges: Option<usize>,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            min_frequency: 2,
            max_vocabulary: None,
            max_merges: None,
        }
    }
}

impl StopCriteria {
    pub fn with_max_merges(mut self, n: usize) -> Self {
        self.max_merges = Some(n);
        self
    }

    pub fn with_min_frequency(mut self, n: u64) -> Self {
        self.min_frequency = n;
        self
    }

    pub fn with_max_vocabulary(mut self, n: usize) -> Self {
        self.max_vocabulary = Some(n);
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.min_frequency < 2 {
            return Err(crate::Error::Validation(format!(
                "min_frequency must be at least 2, got {}",
                self.min_frequency
            )));
        }
        Ok(())
    }
}

/// One merge: `new_id -> (left, right)`, performed `count` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeEvent {
    pub new_id: SymbolId,
    pub left: SymbolId,
    pub right: SymbolId,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The best remaining pair occurs fewer than `min_frequency` times.
    MinFrequency,
    MaxVocabulary,
    MaxMerges,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MinFrequency => "minimum frequency",
            StopReason::MaxVocabulary => "maximum vocabulary",
            StopReason::MaxMerges => "maximum merges",
        })
    }
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub grammar: Grammar,
    pub compressed: BoundedSequence,
    pub events: Vec<MergeEvent>,
    pub stop_reason: StopReason,
}

/// Trains with the linear-time engine.
pub fn train(table: &SymbolTable, seq: &BoundedSequence, stop: &StopCriteria) -> Training {
    let mut trainer = Trainer::new(table.clone(), seq, *stop);
    trainer.run();
    trainer.finish()
}

/// Non-overlapping left-to-right occurrences of `(left, right)`, never
/// spanning a boundary.
pub fn pair_count(seq: &BoundedSequence, left: SymbolId, right: SymbolId) -> u64 {
    seq.segments()
        .map(|segment| {
            let mut count = 0;
            let mut i = 0;
            while i + 1 < segment.len() {
                if segment[i] == left && segment[i + 1] == right {
                    count += 1;
                    i += 2;
                } else {
                    i += 1;
                }
            }
            count
        })
        .sum()
}

fn vocabulary_full(stop: &StopCriteria, terminals: usize, rules: usize) -> bool {
    stop.max_vocabulary
        .is_some_and(|max| terminals + rules + 1 > max)
}
