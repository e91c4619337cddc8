//! Narrative prompts: one key phrase per abstract sentence, taken from its
//! dependency parse, joined by the separator token.
//!
//! A key phrase is the root plus its closest non-punctuation direct child on each
//! side (largest id left of the root, smallest id right of it), in token order.

mod conllu;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{
    parse_conllu, parse_conllu_documents, read_conllu, BlockRef, ConlluError, DepParse, DepToken,
    ParsedDocument,
};

pub const SEPARATOR: &str = "</s>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NarrativeError {
    #[error("no parses to build a prompt from")]
    EmptyParses,
    #[error("parse of sentence {0} has no root")]
    MissingRoot(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseToken {
    pub id: usize,
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPhrase {
    pub sentence_index: usize,
    pub tokens: Vec<PhraseToken>,
}

impl KeyPhrase {
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrativePrompt {
    pub phrases: Vec<KeyPhrase>,
    pub rendered: String,
}

impl NarrativePrompt {
    pub fn from_phrases(phrases: Vec<KeyPhrase>) -> Self {
        let rendered = phrases
            .iter()
            .map(KeyPhrase::text)
            .collect::<Vec<_>>()
            .join(SEPARATOR);
        NarrativePrompt { phrases, rendered }
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

pub fn key_phrase(parse: &DepParse) -> Result<KeyPhrase, NarrativeError> {
    let root = parse
        .root()
        .ok_or(NarrativeError::MissingRoot(parse.sentence_index))?;
    let mut left: Option<&DepToken> = None;
    let mut right: Option<&DepToken> = None;
    for child in parse.children(root.id).filter(|c| !c.is_punct) {
        if child.id < root.id && left.is_none_or(|l| child.id > l.id) {
            left = Some(child);
        }
        if child.id > root.id && right.is_none_or(|r| child.id < r.id) {
            right = Some(child);
        }
    }
    let tokens = [left, Some(root), right]
        .into_iter()
        .flatten()
        .map(|t| PhraseToken {
            id: t.id,
            form: t.form.clone(),
        })
        .collect();
    Ok(KeyPhrase {
        sentence_index: parse.sentence_index,
        tokens,
    })
}

pub fn build_prompt(parses: &[DepParse]) -> Result<NarrativePrompt, NarrativeError> {
    if parses.is_empty() {
        return Err(NarrativeError::EmptyParses);
    }
    let phrases = parses.iter().map(key_phrase).collect::<Result<Vec<_>, _>>()?;
    Ok(NarrativePrompt::from_phrases(phrases))
}
