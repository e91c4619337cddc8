use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::lexical::{bleu, rouge_l, rouge_n, BLEU_EPSILON, BLEU_MAX_ORDER};
use super::readability::{ari, fk_grade};
use super::sari::{sari, SARI_MAX_ORDER};
use super::MetricError;
use crate::corpus::tokenize;
use crate::remote::{JsonClient, TransportError};

/// One evaluated output: the abstract it came from, the generation and its
/// reference plain-language summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalInstance {
    pub doc_id: String,
    pub source: String,
    pub candidate: String,
    pub references: Vec<String>,
}

/// Pairs generations with their sources and references by position, checking
/// that all three lists have the same length.
pub fn align(
    doc_ids: Vec<String>,
    sources: Vec<String>,
    candidates: Vec<String>,
    references: Vec<Vec<String>>,
) -> Result<Vec<EvalInstance>, MetricError> {
    let n = doc_ids.len();
    for (what, len) in [
        ("sources", sources.len()),
        ("candidates", candidates.len()),
        ("references", references.len()),
    ] {
        if len != n {
            return Err(MetricError::LengthMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    Ok(doc_ids
        .into_iter()
        .zip(sources)
        .zip(candidates)
        .zip(references)
        .map(|(((doc_id, source), candidate), references)| EvalInstance {
            doc_id,
            source,
            candidate,
            references,
        })
        .collect())
}

pub trait SemanticScorer: Send + Sync {
    /// One score per reference.
    fn score(&self, doc_id: &str, candidate: &str, references: &[String]) -> Result<Vec<f64>, TransportError>;

    fn name(&self) -> String;
}

/// `POST /semantic`: `{"doc_id", "candidate", "references"}` -> `{"doc_id", "scores"}`.
#[derive(Debug)]
pub struct ExternalSemanticScorer {
    client: JsonClient,
}

impl ExternalSemanticScorer {
    pub fn new(client: JsonClient) -> Self {
        ExternalSemanticScorer { client }
    }
}

impl SemanticScorer for ExternalSemanticScorer {
    fn score(&self, doc_id: &str, candidate: &str, references: &[String]) -> Result<Vec<f64>, TransportError> {
        let request = json!({
            "doc_id": doc_id,
            "candidate": candidate,
            "references": references,
        });
        let reply = self.client.call("/semantic", &request, doc_id)?;
        let payload = reply.to_string();
        if reply.get("doc_id").and_then(|v| v.as_str()) != Some(doc_id) {
            return Err(TransportError::protocol("doc_id mismatch", &payload));
        }
        let scores = reply
            .get("scores")
            .and_then(|v| v.as_array())
            .ok_or_else(|| TransportError::protocol("missing scores array", &payload))?;
        if scores.len() != references.len() {
            return Err(TransportError::protocol(
                format!("expected {} scores, got {}", references.len(), scores.len()),
                &payload,
            ));
        }
        scores
            .iter()
            .map(|v| match v.as_f64() {
                Some(x) if x.is_finite() => Ok(x),
                _ => Err(TransportError::protocol("non-numeric score", &payload)),
            })
            .collect()
    }

    fn name(&self) -> String {
        self.client.endpoint().to_string()
    }
}

/// Metric values for one document. ROUGE, BLEU and SARI are on a 0 to 100 scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocMetrics {
    pub doc_id: String,
    pub fk: f64,
    pub ari: f64,
    pub rouge1_f: f64,
    pub rouge2_f: f64,
    #[serde(rename = "rougeL_f")]
    pub rouge_l_f: f64,
    pub bleu: f64,
    pub sari: f64,
    pub sari_add: f64,
    pub sari_keep: f64,
    pub sari_del: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub documents: usize,
    pub fk: f64,
    pub ari: f64,
    pub rouge1_f: f64,
    pub rouge2_f: f64,
    #[serde(rename = "rougeL_f")]
    pub rouge_l_f: f64,
    pub bleu: f64,
    pub sari: f64,
    pub sari_add: f64,
    pub sari_keep: f64,
    pub sari_del: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub tokenizer: String,
    pub scale: f64,
    pub bleu_max_order: usize,
    pub bleu_smoothing: String,
    pub bleu_epsilon: f64,
    pub sari_max_order: usize,
    pub multi_reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_scorer: Option<String>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            tokenizer: "lowercase-alphanumeric".into(),
            scale: 100.0,
            bleu_max_order: BLEU_MAX_ORDER,
            bleu_smoothing: "add-epsilon".into(),
            bleu_epsilon: BLEU_EPSILON,
            sari_max_order: SARI_MAX_ORDER,
            multi_reference: "max-f1 for rouge, pooled for bleu and sari".into(),
            semantic_scorer: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_doc: Vec<DocMetrics>,
    pub mean: MeanMetrics,
    pub config: MetricConfig,
}

fn max_f<F: Fn(&[String]) -> f64>(refs: &[Vec<String>], f: F) -> f64 {
    refs.iter().map(|r| f(r)).fold(0.0, f64::max)
}

pub fn evaluate_instance(
    item: &EvalInstance,
    semantic: Option<&dyn SemanticScorer>,
) -> Result<DocMetrics, MetricError> {
    let wrap = |source: MetricError| MetricError::Document {
        doc_id: item.doc_id.clone(),
        source: Box::new(source),
    };
    if item.references.is_empty() {
        return Err(wrap(MetricError::EmptyReferences));
    }
    let src = tokenize(&item.source);
    let cand = tokenize(&item.candidate);
    let refs: Vec<Vec<String>> = item.references.iter().map(|r| tokenize(r)).collect();
    let s = sari(&src, &cand, &refs).map_err(wrap)?;
    let semantic = match semantic {
        Some(scorer) => {
            let scores = scorer
                .score(&item.doc_id, &item.candidate, &item.references)
                .map_err(|e| wrap(e.into()))?;
            Some(scores.into_iter().fold(f64::NEG_INFINITY, f64::max))
        }
        None => None,
    };
    Ok(DocMetrics {
        doc_id: item.doc_id.clone(),
        fk: fk_grade(&item.candidate).map_err(wrap)?,
        ari: ari(&item.candidate).map_err(wrap)?,
        rouge1_f: 100.0 * max_f(&refs, |r| rouge_n(&cand, r, 1).f1),
        rouge2_f: 100.0 * max_f(&refs, |r| rouge_n(&cand, r, 2).f1),
        rouge_l_f: 100.0 * max_f(&refs, |r| rouge_l(&cand, r).f1),
        bleu: 100.0 * bleu(&cand, &refs),
        sari: 100.0 * s.sari,
        sari_add: 100.0 * s.add,
        sari_keep: 100.0 * s.keep,
        sari_del: 100.0 * s.del,
        semantic,
    })
}

fn mean_of(docs: &[DocMetrics]) -> MeanMetrics {
    let n = docs.len() as f64;
    let avg = |f: fn(&DocMetrics) -> f64| docs.iter().map(f).sum::<f64>() / n;
    let semantic = docs
        .iter()
        .map(|d| d.semantic)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    MeanMetrics {
        documents: docs.len(),
        fk: avg(|d| d.fk),
        ari: avg(|d| d.ari),
        rouge1_f: avg(|d| d.rouge1_f),
        rouge2_f: avg(|d| d.rouge2_f),
        rouge_l_f: avg(|d| d.rouge_l_f),
        bleu: avg(|d| d.bleu),
        sari: avg(|d| d.sari),
        sari_add: avg(|d| d.sari_add),
        sari_keep: avg(|d| d.sari_keep),
        sari_del: avg(|d| d.sari_del),
        semantic,
    }
}

/// Scores every instance (in parallel, reported in input order) and averages
/// them without weighting.
pub fn evaluate_corpus(
    items: &[EvalInstance],
    semantic: Option<&dyn SemanticScorer>,
) -> Result<MetricReport, MetricError> {
    if items.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let per_doc = items
        .par_iter()
        .map(|item| evaluate_instance(item, semantic))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = mean_of(&per_doc);
    let config = MetricConfig {
        semantic_scorer: semantic.map(|s| s.name()),
        ..MetricConfig::default()
    };
    Ok(MetricReport {
        per_doc,
        mean,
        config,
    })
}

impl MetricReport {
    pub fn write_json<W: Write>(&self, writer: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(writer, self).map_err(std::io::Error::other)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "doc_id", "fk", "ari", "rouge1_f", "rouge2_f", "rougeL_f", "bleu", "sari", "sari_add",
            "sari_keep", "sari_del", "semantic",
        ])?;
        for d in &self.per_doc {
            let mut row = vec![d.doc_id.clone()];
            row.extend(
                [
                    d.fk, d.ari, d.rouge1_f, d.rouge2_f, d.rouge_l_f, d.bleu, d.sari, d.sari_add,
                    d.sari_keep, d.sari_del,
                ]
                .iter()
                .map(f64::to_string),
            );
            row.push(d.semantic.map(|s| s.to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), MetricError> {
        let json_path = dir.join(format!("{stem}.json"));
        let mut out = BufWriter::new(File::create(&json_path)?);
        self.write_json(&mut out)?;
        out.flush()?;
        let csv_path = dir.join(format!("{stem}.csv"));
        self.write_csv(BufWriter::new(File::create(&csv_path)?))
            .map_err(|e| MetricError::Io(std::io::Error::other(e)))?;
        Ok(())
    }
}
