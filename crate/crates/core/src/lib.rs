//! R-gram segmentation: learns a pair-replacement grammar over the characters
//! of a corpus, applies and inverts it, measures how the token frequency
//! distribution flattens as merges accumulate, and trains and evaluates
//! skipgram embeddings over the resulting tokens.

pub mod cli;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod grammar;
pub mod repair;
pub mod stats;

pub use corpus::{
    decode_terminals, encode, normalize, BoundedSequence, Encoded, NormalizationOptions,
    Separators, SymbolId, SymbolTable,
};
pub use error::{Error, Result};
pub use grammar::{Grammar, Rule, Segmentation};
pub use repair::{pair_count, train, train_naive, MergeEvent, StopCriteria, StopReason, Training};
