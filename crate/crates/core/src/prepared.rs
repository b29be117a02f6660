//! Phrase records resolved against an embedding space.

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::model::backward::Example;
use crate::model::forward::CompositionInput;
use crate::model::lexical::{LexicalResolver, LexicalRow};
use crate::model::ModelKind;
use crate::phrase::PhraseDataset;

/// Embedding rows of a phrase and its constituents, plus per-word rows for
/// lexicalized models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparedPhrase {
    pub word1: usize,
    pub word2: usize,
    pub phrase: usize,
    pub lex1: Option<LexicalRow>,
    pub lex2: Option<LexicalRow>,
}

impl PreparedPhrase {
    pub fn input<'a>(&self, space: &'a EmbeddingSpace) -> CompositionInput<'a> {
        CompositionInput {
            u: space.vector(self.word1),
            v: space.vector(self.word2),
            word1: self.lex1,
            word2: self.lex2,
        }
    }

    pub fn example<'a>(&self, space: &'a EmbeddingSpace) -> Example<'a> {
        Example { input: self.input(space), target: space.vector(self.phrase) }
    }
}

/// Resolves every record of `dataset` in `space`.
///
/// Lexicalized kinds need a resolver to map constituents to per-word rows.
pub fn prepare(
    dataset: &PhraseDataset,
    space: &EmbeddingSpace,
    kind: ModelKind,
    resolver: Option<&LexicalResolver>,
) -> Result<Vec<PreparedPhrase>> {
    let resolver = match (kind.is_lexicalized(), resolver) {
        (true, None) => return Err(Error::MissingWordIds),
        (true, Some(r)) => Some(r),
        (false, _) => None,
    };
    let row = |token: &str| space.row(token).ok_or_else(|| Error::UnknownToken(token.to_owned()));
    dataset
        .records()
        .iter()
        .map(|r| {
            let (lex1, lex2) = match resolver {
                Some(res) => (Some(res.resolve(&r.word1, space)?), Some(res.resolve(&r.word2, space)?)),
                None => (None, None),
            };
            Ok(PreparedPhrase { word1: row(&r.word1)?, word2: row(&r.word2)?, phrase: row(&r.phrase)?, lex1, lex2 })
        })
        .collect()
}
