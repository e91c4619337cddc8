//! Reference-summary construction by sentence matching.
//!
//! Every PLS sentence selects the abstract sentence at minimum Jaccard distance
//! over token sets; the union of selections is the positive (summary) class.
//! Ties go to the lowest abstract index because the running minimum is only
//! replaced on a strictly smaller distance.

use std::collections::HashSet;
use std::fs::File;
use std::hash::Hash;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Sentence, Split};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("abstract has no sentences")]
    EmptyAbstract,
    #[error("PLS has no sentences")]
    EmptyPls,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset io: {0}")]
    Io(#[from] io::Error),
    #[error("malformed dataset record at line {line}: {message}")]
    Record { line: usize, message: String },
}

/// `1 - |a ∩ b| / |a ∪ b|`. Two empty sets are identical (distance 0).
pub fn jaccard_distance<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let inter = small.iter().filter(|t| large.contains(*t)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    1.0 - inter as f64 / union as f64
}

pub fn token_set(sentence: &Sentence) -> HashSet<&str> {
    sentence.tokens.iter().map(String::as_str).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pls_index: usize,
    /// Position within the abstract sentence list.
    pub best_abs_index: usize,
    pub best_distance: f64,
}

fn best_match(pls_index: usize, pls: &HashSet<&str>, abs_sets: &[HashSet<&str>]) -> MatchResult {
    let mut best_distance = f64::INFINITY;
    let mut best_abs_index = 0;
    for (m, abs) in abs_sets.iter().enumerate() {
        let d = jaccard_distance(pls, abs);
        if d < best_distance {
            best_distance = d;
            best_abs_index = m;
        }
    }
    MatchResult {
        pls_index,
        best_abs_index,
        best_distance,
    }
}

pub fn match_pls_sentence(pls: &Sentence, abs_sents: &[Sentence]) -> Result<MatchResult, MatchError> {
    if abs_sents.is_empty() {
        return Err(MatchError::EmptyAbstract);
    }
    let abs_sets: Vec<_> = abs_sents.iter().map(token_set).collect();
    Ok(best_match(pls.index, &token_set(pls), &abs_sets))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSentence {
    pub doc_id: String,
    pub split: Split,
    pub sentence: Sentence,
    pub label: u8,
    /// PLS sentence indices that selected this sentence; empty iff `label == 0`.
    pub matched_by: Vec<usize>,
}

impl LabeledSentence {
    pub fn is_positive(&self) -> bool {
        self.label == 1
    }
}

/// Labels every abstract sentence, in order. PLS sentence indices in `matched_by`
/// are the `index` fields of `pls_sents`.
pub fn label_abstract(
    doc_id: &str,
    split: Split,
    abs_sents: &[Sentence],
    pls_sents: &[Sentence],
) -> Result<Vec<LabeledSentence>, MatchError> {
    if abs_sents.is_empty() {
        return Err(MatchError::EmptyAbstract);
    }
    if pls_sents.is_empty() {
        return Err(MatchError::EmptyPls);
    }
    let abs_sets: Vec<_> = abs_sents.iter().map(token_set).collect();
    let mut matched_by = vec![Vec::new(); abs_sents.len()];
    for pls in pls_sents {
        let result = best_match(pls.index, &token_set(pls), &abs_sets);
        matched_by[result.best_abs_index].push(pls.index);
    }
    Ok(abs_sents
        .iter()
        .zip(matched_by)
        .map(|(sentence, matched_by)| LabeledSentence {
            doc_id: doc_id.to_owned(),
            split,
            sentence: sentence.clone(),
            label: u8::from(!matched_by.is_empty()),
            matched_by,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDocument {
    pub doc_id: String,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub documents: usize,
    pub sentences: usize,
    pub positives: usize,
    pub positive_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub train: SplitStats,
    pub dev: SplitStats,
    pub test: SplitStats,
    pub skipped: usize,
}

impl DatasetStats {
    pub fn get(&self, split: Split) -> &SplitStats {
        match split {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }

    fn get_mut(&mut self, split: Split) -> &mut SplitStats {
        match split {
            Split::Train => &mut self.train,
            Split::Dev => &mut self.dev,
            Split::Test => &mut self.test,
        }
    }
}

/// Sentence-level labels for a whole corpus. Entries of one document are contiguous
/// and appear in sentence order; documents keep corpus order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSentenceDataset {
    pub entries: Vec<LabeledSentence>,
    pub skipped: Vec<SkippedDocument>,
}

impl LabeledSentenceDataset {
    pub fn stats(&self) -> DatasetStats {
        let mut stats = DatasetStats {
            skipped: self.skipped.len(),
            ..Default::default()
        };
        for doc in self.documents() {
            let s = stats.get_mut(doc[0].split);
            s.documents += 1;
            s.sentences += doc.len();
            s.positives += doc.iter().filter(|e| e.is_positive()).count();
        }
        for split in Split::ALL {
            let s = stats.get_mut(split);
            if s.sentences > 0 {
                s.positive_ratio = s.positives as f64 / s.sentences as f64;
            }
        }
        stats
    }

    /// Contiguous per-document groups.
    pub fn documents(&self) -> impl Iterator<Item = &[LabeledSentence]> {
        self.entries.chunk_by(|a, b| a.doc_id == b.doc_id)
    }

    pub fn split_documents(&self, split: Split) -> impl Iterator<Item = &[LabeledSentence]> {
        self.documents().filter(move |d| d[0].split == split)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for entry in &self.entries {
            serde_json::to_writer(&mut out, &DatasetRecord::from(entry))?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        self.write_jsonl(BufWriter::new(File::create(path)?))?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, DatasetError> {
        let mut entries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DatasetRecord = serde_json::from_str(&line).map_err(|e| DatasetError::Record {
                line: n + 1,
                message: e.to_string(),
            })?;
            if (record.label == 1) == record.matched_by.is_empty() || record.label > 1 {
                return Err(DatasetError::Record {
                    line: n + 1,
                    message: "label must be 1 exactly when matched_by is non-empty".into(),
                });
            }
            entries.push(LabeledSentence {
                doc_id: record.doc_id,
                split: record.split,
                sentence: Sentence::new(record.sent_index, record.text),
                label: record.label,
                matched_by: record.matched_by,
            });
        }
        Ok(LabeledSentenceDataset {
            entries,
            skipped: Vec::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }
}

/// On-disk form of one labelled sentence.
#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub doc_id: String,
    pub split: Split,
    pub sent_index: usize,
    pub text: String,
    pub label: u8,
    pub matched_by: Vec<usize>,
}

impl From<&LabeledSentence> for DatasetRecord {
    fn from(e: &LabeledSentence) -> Self {
        DatasetRecord {
            doc_id: e.doc_id.clone(),
            split: e.split,
            sent_index: e.sentence.index,
            text: e.sentence.text.clone(),
            label: e.label,
            matched_by: e.matched_by.clone(),
        }
    }
}

/// Segments and labels every pair. Documents whose abstract or PLS segment to
/// nothing are recorded in `skipped` instead of failing the build.
pub fn build_summary_dataset(corpus: &Corpus) -> LabeledSentenceDataset {
    let labelled: Vec<Result<Vec<LabeledSentence>, SkippedDocument>> = corpus
        .pairs
        .par_iter()
        .map(|pair| {
            let abs = pair.abstract_sentences();
            let pls = pair.pls_sentences();
            label_abstract(&pair.id, pair.split, &abs, &pls).map_err(|e| SkippedDocument {
                doc_id: pair.id.clone(),
                reason: e.to_string(),
            })
        })
        .collect();

    let mut dataset = LabeledSentenceDataset::default();
    for result in labelled {
        match result {
            Ok(entries) => dataset.entries.extend(entries),
            Err(skip) => dataset.skipped.push(skip),
        }
    }
    dataset
}
