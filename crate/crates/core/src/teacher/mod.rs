//! Scripted user answers and text preprocessing.

mod annotation;
mod preprocess;
mod vocab;

pub use annotation::{Annotation, AnswerMode, Region, Shape};
pub use preprocess::{
    is_stop_word, preprocess_sentence, preprocess_token, singularize, STOP_WORDS,
};
pub use vocab::{extend_vocabulary, Vocabulary};

use crate::error::Result;
use crate::model::{BagOfWords, Point};
use crate::rng::{mix, tag};

/// Identifies one question so scripted answers are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub seed: u64,
    pub candidate: usize,
    /// How many times this candidate was asked before.
    pub visit: usize,
}

/// Tokens the scripted user gives at `x`. In sentence mode a candidate
/// starts at a hashed offset into the region's sentences and advances one
/// sentence per revisit.
pub fn answer_tokens(
    annotation: &Annotation,
    x: &Point,
    mode: AnswerMode,
    query: Query,
) -> Result<Vec<String>> {
    let region = &annotation.regions()[annotation.label_of(x)?];
    Ok(match mode {
        AnswerMode::SingleWord => preprocess_token(&region.word),
        AnswerMode::Sentence => {
            let n = region.utterances.len();
            let start = mix(query.seed ^ tag::TEACHER, query.candidate as u64, 0) % n as u64;
            let idx = (start as usize + query.visit) % n;
            preprocess_sentence(&region.utterances[idx])
        }
    })
}

/// Scripted answer encoded against a fixed vocabulary.
pub fn answer_query(
    annotation: &Annotation,
    vocab: &Vocabulary,
    x: &Point,
    mode: AnswerMode,
    query: Query,
) -> Result<BagOfWords> {
    vocab.encode(&answer_tokens(annotation, x, mode, query)?)
}
