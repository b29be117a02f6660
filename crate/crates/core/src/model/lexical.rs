//! Per-word parameter lookup for the lexicalized models (WMask, FullLex).

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::phrase::PhraseDataset;

/// Which per-word matrix or mask a constituent uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexicalRow {
    Row(usize),
    /// No learned parameters: identity matrix (FullLex) or all-ones mask (WMask).
    Identity,
}

/// How words outside the training vocabulary are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    /// Borrow the parameters of the most similar training word (FullLex+, WMask+).
    NearestNeighbor,
    /// Use the identity transformation.
    Identity,
}

impl FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nearest_neighbor" | "nn" => Ok(FallbackPolicy::NearestNeighbor),
            "identity" => Ok(FallbackPolicy::Identity),
            _ => Err(Error::Config(format!("unknown resolver policy {s:?}"))),
        }
    }
}

/// Ordered set of words that own rows in the per-word tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut lexicon = Lexicon::default();
        for token in tokens {
            lexicon.insert(token);
        }
        lexicon
    }

    /// Constituent words of `dataset`, in order of first appearance.
    pub fn from_dataset(dataset: &PhraseDataset) -> Self {
        Self::new(dataset.records().iter().flat_map(|r| [r.word1.clone(), r.word2.clone()]))
    }

    fn insert(&mut self, token: String) {
        if !self.index.contains_key(&token) {
            self.index.insert(token.clone(), self.tokens.len());
            self.tokens.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn row(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalResolver {
    pub train_vocab: Lexicon,
    pub policy: FallbackPolicy,
}

impl LexicalResolver {
    pub fn new(train_vocab: Lexicon, policy: FallbackPolicy) -> Result<Self> {
        if policy == FallbackPolicy::NearestNeighbor && train_vocab.is_empty() {
            return Err(Error::EmptyTrainVocabulary);
        }
        Ok(LexicalResolver { train_vocab, policy })
    }

    /// Row of the per-word parameters `token` should use.
    ///
    /// Training words use their own row. Other words either borrow the row of
    /// the training word whose embedding is most similar (ties go to the
    /// earlier embedding row) or fall back to the identity.
    pub fn resolve(&self, token: &str, space: &EmbeddingSpace) -> Result<LexicalRow> {
        let query = space.lookup(token)?;
        if let Some(row) = self.train_vocab.row(token) {
            return Ok(LexicalRow::Row(row));
        }
        match self.policy {
            FallbackPolicy::Identity => Ok(LexicalRow::Identity),
            FallbackPolicy::NearestNeighbor => {
                if self.train_vocab.is_empty() {
                    return Err(Error::EmptyTrainVocabulary);
                }
                let hits = space.nearest_rows(query, 1, |row| self.train_vocab.row(space.token(row)).is_some())?;
                Ok(hits
                    .first()
                    .and_then(|&(row, _)| self.train_vocab.row(space.token(row)))
                    .map_or(LexicalRow::Identity, LexicalRow::Row))
            }
        }
    }
}
