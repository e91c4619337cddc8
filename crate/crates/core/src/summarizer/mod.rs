//! Simplification-oriented extractive summarization.
//!
//! Any [`SentenceScorer`] assigns each abstract sentence a probability of belonging
//! to the summary; [`extract_summary`] keeps those above the threshold in document
//! order, falling back to the single best sentence so the summary is never empty.

mod classifier;
mod features;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::corpus::Sentence;
use crate::remote::{JsonClient, TransportError};
use crate::sentmatch::{LabeledSentence, LabeledSentenceDataset};

pub use classifier::{
    design_matrix, evaluate_classifier, train_classifier, train_on_rows, ClassificationReport,
    SentenceScorerModel, TrainParams, TrainingMetadata,
};
pub use features::{featurize, SentenceFeatures, FEATURE_DIM, FEATURE_NAMES};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SummarizerError {
    #[error("document has no sentences")]
    EmptyDocument,
    #[error("training data is empty")]
    EmptyDataset,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("document {doc_id} has no positive labels")]
    NoPositiveLabels { doc_id: String },
    #[error("scorer returned {got} scores for {expected} sentences")]
    ScoreCount { expected: usize, got: usize },
    #[error("score {value} at sentence {index} is outside [0, 1]")]
    ScoreRange { index: usize, value: f64 },
    #[error("no gold labels for document {0}")]
    UnknownDocument(String),
    #[error("model: {0}")]
    Model(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Per-sentence summary-membership probabilities, one per input sentence.
pub trait SentenceScorer: Send + Sync {
    fn score(&self, doc_id: &str, doc: &[Sentence]) -> Result<Vec<f64>, SummarizerError>;
}

impl SentenceScorer for SentenceScorerModel {
    fn score(&self, _doc_id: &str, doc: &[Sentence]) -> Result<Vec<f64>, SummarizerError> {
        Ok(self.score_document(doc))
    }
}

/// Returns gold 0/1 labels as scores, keyed by document id.
#[derive(Clone, Debug, Default)]
pub struct OracleScorer {
    labels: HashMap<String, Vec<f64>>,
}

impl OracleScorer {
    pub fn from_dataset(dataset: &LabeledSentenceDataset) -> Self {
        let labels = dataset
            .documents()
            .map(|doc| {
                (
                    doc[0].doc_id.clone(),
                    doc.iter().map(|e| f64::from(e.label)).collect(),
                )
            })
            .collect();
        OracleScorer { labels }
    }
}

impl SentenceScorer for OracleScorer {
    fn score(&self, doc_id: &str, _doc: &[Sentence]) -> Result<Vec<f64>, SummarizerError> {
        self.labels
            .get(doc_id)
            .cloned()
            .ok_or_else(|| SummarizerError::UnknownDocument(doc_id.to_owned()))
    }
}

/// Scores via an external service: `{"doc_id", "sentences": [..]}` ->
/// `{"doc_id", "scores": [..]}` on route `/score`.
#[derive(Debug)]
pub struct ExternalScorer {
    client: JsonClient,
}

impl ExternalScorer {
    pub fn new(client: JsonClient) -> Self {
        ExternalScorer { client }
    }
}

impl SentenceScorer for ExternalScorer {
    fn score(&self, doc_id: &str, doc: &[Sentence]) -> Result<Vec<f64>, SummarizerError> {
        let request = json!({
            "doc_id": doc_id,
            "sentences": doc.iter().map(|s| s.text.as_str()).collect::<Vec<_>>(),
        });
        let reply = self.client.call("/score", &request, doc_id)?;
        let payload = reply.to_string();
        if reply.get("doc_id").and_then(|v| v.as_str()) != Some(doc_id) {
            return Err(TransportError::protocol("doc_id mismatch", &payload).into());
        }
        let scores = reply
            .get("scores")
            .and_then(|v| v.as_array())
            .ok_or_else(|| TransportError::protocol("missing scores array", &payload))?;
        scores
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| TransportError::protocol("non-numeric score", &payload).into())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractiveSummary {
    pub doc_id: String,
    pub selected: Vec<Sentence>,
    /// One score per abstract sentence, including unselected ones.
    pub scores: Vec<f64>,
}

impl ExtractiveSummary {
    pub fn text(&self) -> String {
        self.selected
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn indices(&self) -> Vec<usize> {
        self.selected.iter().map(|s| s.index).collect()
    }
}

/// Positions with `score > threshold`; if none, the first position attaining the maximum.
pub fn select_positions(scores: &[f64], threshold: f64) -> Vec<usize> {
    let above: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .map(|(i, _)| i)
        .collect();
    if !above.is_empty() || scores.is_empty() {
        return above;
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    vec![best]
}

fn validate_scores(scores: &[f64], expected: usize) -> Result<(), SummarizerError> {
    if scores.len() != expected {
        return Err(SummarizerError::ScoreCount {
            expected,
            got: scores.len(),
        });
    }
    if let Some((index, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, s)| !(0.0..=1.0).contains(*s))
    {
        return Err(SummarizerError::ScoreRange { index, value });
    }
    Ok(())
}

pub fn extract_summary(
    doc_id: &str,
    doc: &[Sentence],
    scorer: &dyn SentenceScorer,
    threshold: f64,
) -> Result<ExtractiveSummary, SummarizerError> {
    if doc.is_empty() {
        return Err(SummarizerError::EmptyDocument);
    }
    let scores = scorer.score(doc_id, doc)?;
    validate_scores(&scores, doc.len())?;
    let selected = select_positions(&scores, threshold)
        .into_iter()
        .map(|i| doc[i].clone())
        .collect();
    Ok(ExtractiveSummary {
        doc_id: doc_id.to_owned(),
        selected,
        scores,
    })
}

/// The label-1 sentences of one labelled document, in order.
pub fn oracle_extract(labeled: &[LabeledSentence]) -> Result<ExtractiveSummary, SummarizerError> {
    let first = labeled.first().ok_or(SummarizerError::EmptyDocument)?;
    let selected: Vec<Sentence> = labeled
        .iter()
        .filter(|e| e.is_positive())
        .map(|e| e.sentence.clone())
        .collect();
    if selected.is_empty() {
        return Err(SummarizerError::NoPositiveLabels {
            doc_id: first.doc_id.clone(),
        });
    }
    Ok(ExtractiveSummary {
        doc_id: first.doc_id.clone(),
        selected,
        scores: labeled.iter().map(|e| f64::from(e.label)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    struct Fixed(Vec<f64>);

    impl SentenceScorer for Fixed {
        fn score(&self, _: &str, _: &[Sentence]) -> Result<Vec<f64>, SummarizerError> {
            Ok(self.0.clone())
        }
    }

    fn doc(n: usize) -> Vec<Sentence> {
        (0..n).map(|i| Sentence::new(i, format!("Sentence number {i}."))).collect()
    }

    fn labeled(labels: &[u8]) -> Vec<LabeledSentence> {
        doc(labels.len())
            .into_iter()
            .zip(labels)
            .map(|(sentence, &label)| LabeledSentence {
                doc_id: "d".into(),
                split: Split::Test,
                matched_by: if label == 1 { vec![0] } else { vec![] },
                sentence,
                label,
            })
            .collect()
    }

    #[test]
    fn threshold_rule() {
        let s = extract_summary("d", &doc(3), &Fixed(vec![0.9, 0.2, 0.7]), 0.5).unwrap();
        assert_eq!(s.indices(), [0, 2]);
        assert_eq!(s.text(), "Sentence number 0. Sentence number 2.");
    }

    #[test]
    fn argmax_fallback_first_on_ties() {
        let s = extract_summary("d", &doc(3), &Fixed(vec![0.1, 0.4, 0.3]), 0.5).unwrap();
        assert_eq!(s.indices(), [1]);
        let s = extract_summary("d", &doc(3), &Fixed(vec![0.4, 0.1, 0.4]), 0.5).unwrap();
        assert_eq!(s.indices(), [0]);
        // exactly at threshold is not selected
        let s = extract_summary("d", &doc(2), &Fixed(vec![0.5, 0.5]), 0.5).unwrap();
        assert_eq!(s.indices(), [0]);
    }

    #[test]
    fn bad_scores_rejected() {
        assert!(matches!(
            extract_summary("d", &doc(3), &Fixed(vec![0.9, 0.2]), 0.5),
            Err(SummarizerError::ScoreCount { expected: 3, got: 2 })
        ));
        assert!(matches!(
            extract_summary("d", &doc(2), &Fixed(vec![0.9, 1.2]), 0.5),
            Err(SummarizerError::ScoreRange { index: 1, .. })
        ));
        assert!(matches!(
            extract_summary("d", &doc(1), &Fixed(vec![f64::NAN]), 0.5),
            Err(SummarizerError::ScoreRange { index: 0, .. })
        ));
        assert!(matches!(
            extract_summary("d", &[], &Fixed(vec![]), 0.5),
            Err(SummarizerError::EmptyDocument)
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_extract(&labeled(&[1, 0, 1])).unwrap().indices(), [0, 2]);
        assert_eq!(oracle_extract(&labeled(&[1, 1, 1])).unwrap().indices(), [0, 1, 2]);
        assert!(matches!(
            oracle_extract(&labeled(&[0, 0])),
            Err(SummarizerError::NoPositiveLabels { .. })
        ));
    }

    #[test]
    fn oracle_scorer_matches_oracle_extract() {
        let labels = labeled(&[0, 1, 1, 0, 1]);
        let dataset = LabeledSentenceDataset {
            entries: labels.clone(),
            skipped: vec![],
        };
        let sentences: Vec<Sentence> = labels.iter().map(|e| e.sentence.clone()).collect();
        let via_scorer = extract_summary("d", &sentences, &OracleScorer::from_dataset(&dataset), 0.5).unwrap();
        assert_eq!(via_scorer, oracle_extract(&labels).unwrap());
        assert!(matches!(
            OracleScorer::default().score("zzz", &sentences),
            Err(SummarizerError::UnknownDocument(_))
        ));
    }
}
