use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BagOfWords;

/// Append-only word list with a reverse index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let mut vocab = Self::default();
        vocab.extend(words);
        vocab
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(vocab: Vocabulary) -> Self {
        vocab.words
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Appends unseen words and returns the index of every token.
    pub fn extend<S: AsRef<str>>(&mut self, tokens: impl IntoIterator<Item = S>) -> Vec<usize> {
        tokens
            .into_iter()
            .map(|t| {
                let t = t.as_ref();
                match self.index.get(t) {
                    Some(&i) => i,
                    None => {
                        let i = self.words.len();
                        self.words.push(t.to_string());
                        self.index.insert(t.to_string(), i);
                        i
                    }
                }
            })
            .collect()
    }

    /// Bag over known words; fails on the first unknown token.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<BagOfWords> {
        let indices = tokens
            .iter()
            .map(|t| {
                self.get(t.as_ref())
                    .ok_or_else(|| Error::UnknownWord(t.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BagOfWords::from_indices(indices))
    }
}

/// Grows `vocab` with `tokens` and encodes them.
pub fn extend_vocabulary<S: AsRef<str>>(vocab: &mut Vocabulary, tokens: &[S]) -> BagOfWords {
    BagOfWords::from_indices(vocab.extend(tokens.iter().map(AsRef::as_ref)))
}
