use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{featurize, FEATURE_DIM, FEATURE_NAMES};
use super::SummarizerError;
use crate::corpus::{Sentence, Split};
use crate::sentmatch::{LabeledSentence, LabeledSentenceDataset};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            epochs: 300,
            learning_rate: 0.5,
            l2: 1e-3,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub params: TrainParams,
    pub examples: usize,
    pub positives: usize,
    /// Regularized mean log-loss before the first update and after every epoch.
    pub loss_history: Vec<f64>,
}

/// Logistic scorer over standardized sentence features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceScorerModel {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub metadata: TrainingMetadata,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Feature rows and 0/1 targets for every sentence of the given documents.
pub fn design_matrix<'a>(
    docs: impl Iterator<Item = &'a [LabeledSentence]>,
) -> (Vec<[f64; FEATURE_DIM]>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for doc in docs {
        let sentences: Vec<Sentence> = doc.iter().map(|e| e.sentence.clone()).collect();
        for (entry, sentence) in doc.iter().zip(&sentences) {
            rows.push(featurize(sentence, &sentences).to_vector());
            targets.push(f64::from(entry.label));
        }
    }
    (rows, targets)
}

fn regularized_loss(rows: &[[f64; FEATURE_DIM]], y: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = rows.len() as f64;
    let nll: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, &t)| {
            let z = b + x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
            // log(1 + e^z) - t z, evaluated stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - t * z
        })
        .sum();
    nll / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Fits the scorer on the train split by full-batch gradient descent.
pub fn train_classifier(
    dataset: &LabeledSentenceDataset,
    params: &TrainParams,
) -> Result<SentenceScorerModel, SummarizerError> {
    let (raw, y) = design_matrix(dataset.split_documents(Split::Train));
    train_on_rows(&raw, &y, params)
}

pub fn train_on_rows(
    raw: &[[f64; FEATURE_DIM]],
    y: &[f64],
    params: &TrainParams,
) -> Result<SentenceScorerModel, SummarizerError> {
    if raw.is_empty() {
        return Err(SummarizerError::EmptyDataset);
    }
    let positives = y.iter().filter(|&&t| t == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(SummarizerError::SingleClass);
    }

    let n = raw.len() as f64;
    let mut means = vec![0.0; FEATURE_DIM];
    let mut scales = vec![0.0; FEATURE_DIM];
    for row in raw {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    for row in raw {
        for ((s, m), v) in scales.iter_mut().zip(&means).zip(row) {
            *s += (v - m).powi(2) / n;
        }
    }
    for s in &mut scales {
        *s = if *s > 1e-12 { s.sqrt() } else { 1.0 };
    }
    let rows: Vec<[f64; FEATURE_DIM]> = raw
        .iter()
        .map(|r| std::array::from_fn(|j| (r[j] - means[j]) / scales[j]))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.random_range(-0.01..0.01)).collect();
    let mut b = 0.0;
    let mut loss_history = vec![regularized_loss(&rows, y, &w, b, params.l2)];

    for _ in 0..params.epochs {
        let mut grad_w = [0.0; FEATURE_DIM];
        let mut grad_b = 0.0;
        for (x, &t) in rows.iter().zip(y) {
            let z = b + x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let err = sigmoid(z) - t;
            for (g, v) in grad_w.iter_mut().zip(x) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (wj, g) in w.iter_mut().zip(grad_w) {
            *wj -= params.learning_rate * (g / n + params.l2 * *wj);
        }
        b -= params.learning_rate * grad_b / n;
        loss_history.push(regularized_loss(&rows, y, &w, b, params.l2));
    }

    Ok(SentenceScorerModel {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        means,
        scales,
        weights: w,
        bias: b,
        metadata: TrainingMetadata {
            params: *params,
            examples: raw.len(),
            positives,
            loss_history,
        },
    })
}

impl SentenceScorerModel {
    pub fn probability(&self, features: &[f64; FEATURE_DIM]) -> f64 {
        let z = self.bias
            + features
                .iter()
                .zip(&self.means)
                .zip(&self.scales)
                .zip(&self.weights)
                .map(|(((x, m), s), w)| (x - m) / s * w)
                .sum::<f64>();
        sigmoid(z)
    }

    pub fn score_document(&self, doc: &[Sentence]) -> Vec<f64> {
        doc.iter()
            .map(|s| self.probability(&featurize(s, doc).to_vector()))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), SummarizerError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| SummarizerError::Model(e.to_string()))?;
        fs::write(path, json + "\n").map_err(|e| SummarizerError::Model(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SummarizerError> {
        let text = fs::read_to_string(path).map_err(|e| SummarizerError::Model(format!("{}: {e}", path.display())))?;
        let model: Self = serde_json::from_str(&text).map_err(|e| SummarizerError::Model(e.to_string()))?;
        if model.weights.len() != FEATURE_DIM || model.means.len() != FEATURE_DIM || model.scales.len() != FEATURE_DIM {
            return Err(SummarizerError::Model(format!("expected {FEATURE_DIM} features")));
        }
        Ok(model)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub examples: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Accuracy of always predicting the more frequent class.
    pub majority_baseline: f64,
}

/// Sentence-level accuracy/F1 at the given decision threshold.
pub fn evaluate_classifier<'a>(
    model: &SentenceScorerModel,
    docs: impl Iterator<Item = &'a [LabeledSentence]>,
    threshold: f64,
) -> ClassificationReport {
    let (rows, y) = design_matrix(docs);
    let (mut tp, mut fp, mut fneg, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (x, &t) in rows.iter().zip(&y) {
        let predicted = model.probability(x) > threshold;
        let actual = t == 1.0;
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
        if predicted == actual {
            correct += 1;
        }
    }
    let n = rows.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let positives = tp + fneg;
    ClassificationReport {
        examples: n,
        accuracy: ratio(correct, n),
        precision,
        recall,
        f1: if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        },
        majority_baseline: ratio(positives.max(n - positives), n),
    }
}
