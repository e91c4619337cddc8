//! Summarize-then-simplify toolkit for paragraph-level medical text.
//!
//! The pipeline labels abstract sentences by matching them to the plain-language
//! summary ([`sentmatch`]), trains a sentence scorer and extracts a summary
//! ([`summarizer`]), builds a narrative prompt from dependency parses
//! ([`narrative`]), assembles the generator input ([`assembler`]) and scores the
//! outputs ([`metrics`]).

pub mod assembler;
pub mod corpus;
pub mod metrics;
pub mod narrative;
pub mod remote;
pub mod sentmatch;
pub mod summarizer;

pub use assembler::{assemble_input, AssembledInput, DecodeParams, GenerationResult, Simplifier};
pub use corpus::{Corpus, DocumentPair, Sentence, Split};
pub use metrics::{EvalInstance, MetricReport};
pub use narrative::{DepParse, KeyPhrase, NarrativePrompt, SEPARATOR};
pub use remote::{Endpoint, JsonClient, TransportConfig, TransportError};
pub use sentmatch::{LabeledSentence, LabeledSentenceDataset};
pub use summarizer::{ExtractiveSummary, SentenceScorer, SentenceScorerModel};
