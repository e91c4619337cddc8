//! Reference-free readability and reference-based overlap metrics.
//!
//! Every token-level metric runs on [`crate::corpus::tokenize`] output.

mod lexical;
mod readability;
mod report;
mod sari;

use thiserror::Error;

use crate::remote::TransportError;

pub use lexical::{bleu, lcs_length, rouge_l, rouge_n, Prf, BLEU_EPSILON, BLEU_MAX_ORDER};
pub use readability::{ari, count_syllables, fk_grade, text_stats, TextStats};
pub use report::{
    align, evaluate_corpus, evaluate_instance, DocMetrics, EvalInstance, ExternalSemanticScorer,
    MeanMetrics, MetricConfig, MetricReport, SemanticScorer,
};
pub use sari::{sari, sari_ngram, SariComponents, SariScore, SARI_MAX_ORDER};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("text has no words")]
    EmptyText,
    #[error("at least one reference is required")]
    EmptyReferences,
    #[error("nothing to evaluate")]
    EmptyCorpus,
    #[error("{what}: expected {expected} entries, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("document {doc_id}: {source}")]
    Document {
        doc_id: String,
        #[source]
        source: Box<MetricError>,
    },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
