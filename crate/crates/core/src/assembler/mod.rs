//! Second-stage input assembly: `prompt </s> summary` under a token budget, and
//! the client side of the generation protocol.

mod adapter;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize;
use crate::narrative::{NarrativePrompt, SEPARATOR};
use crate::summarizer::ExtractiveSummary;

pub use adapter::{
    generate_all, DecodeParams, EchoAdapter, GenerationResult, RemoteSimplifier, Simplifier,
    Strategy,
};

pub const DEFAULT_BUDGET: usize = 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssembleError {
    #[error("narrative prompt is empty")]
    EmptyPrompt,
    #[error("extractive summary is empty")]
    EmptySummary,
    #[error("budget {budget} is below the minimal input of {minimum} tokens")]
    OverBudget { budget: usize, minimum: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssembledInput {
    pub doc_id: String,
    pub prompt: NarrativePrompt,
    pub summary: ExtractiveSummary,
    pub rendered: String,
    pub token_count: usize,
    pub dropped_sentences: usize,
    pub dropped_phrases: usize,
}

/// Canonical tokens of each separator-free segment, plus one per separator.
pub fn count_input_tokens(rendered: &str) -> usize {
    let segments: Vec<&str> = rendered.split(SEPARATOR).collect();
    segments.iter().map(|s| tokenize(s).len()).sum::<usize>() + segments.len() - 1
}

fn render(prompt: &NarrativePrompt, summary: &ExtractiveSummary) -> String {
    format!("{}{SEPARATOR}{}", prompt.rendered, summary.text())
}

/// Renders the input, dropping trailing summary sentences and then trailing
/// prompt phrases while the token count exceeds `budget`.
pub fn assemble_input(
    prompt: &NarrativePrompt,
    summary: &ExtractiveSummary,
    budget: usize,
) -> Result<AssembledInput, AssembleError> {
    if prompt.is_empty() {
        return Err(AssembleError::EmptyPrompt);
    }
    if summary.selected.is_empty() {
        return Err(AssembleError::EmptySummary);
    }
    let mut summary = summary.clone();
    let mut phrases = prompt.phrases.clone();
    let mut prompt = prompt.clone();
    let mut rendered = render(&prompt, &summary);
    let mut dropped_sentences = 0;
    let mut dropped_phrases = 0;

    while count_input_tokens(&rendered) > budget && summary.selected.len() > 1 {
        summary.selected.pop();
        dropped_sentences += 1;
        rendered = render(&prompt, &summary);
    }
    while count_input_tokens(&rendered) > budget && phrases.len() > 1 {
        phrases.pop();
        dropped_phrases += 1;
        prompt = NarrativePrompt::from_phrases(phrases.clone());
        rendered = render(&prompt, &summary);
    }
    let token_count = count_input_tokens(&rendered);
    if token_count > budget {
        return Err(AssembleError::OverBudget {
            budget,
            minimum: token_count,
        });
    }
    Ok(AssembledInput {
        doc_id: summary.doc_id.clone(),
        prompt,
        summary,
        rendered,
        token_count,
        dropped_sentences,
        dropped_phrases,
    })
}
