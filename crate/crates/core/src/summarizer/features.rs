use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;

const RESULT_CUES: &[&str] = &[
    "found", "showed", "show", "shows", "reduced", "reduces", "increased", "increases", "improved",
    "improves", "difference", "differences", "significant", "significantly", "effect", "effects",
    "risk", "evidence",
];
const CONCLUSION_LEADS: &[&str] = &["conclusions", "conclusion", "overall", "therefore", "thus", "authors"];
const CONCLUSION_CUES: &[&str] = &["conclude", "concluded", "recommend", "recommended", "suggest", "suggests", "should"];
const METHOD_CUES: &[&str] = &[
    "searched", "search", "databases", "database", "selection", "criteria", "extracted",
    "registers", "registry", "independently", "eligible",
];

/// Number of entries in [`SentenceFeatures::to_vector`].
pub const FEATURE_DIM: usize = 8;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "relative_position",
    "log_token_count",
    "type_token_ratio",
    "centroid_similarity",
    "numeric_ratio",
    "result_cue",
    "conclusion_cue",
    "method_cue",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceFeatures {
    pub relative_position: f64,
    pub token_count: usize,
    pub type_token_ratio: f64,
    /// Cosine between the sentence's term frequencies and the whole document's.
    pub centroid_similarity: f64,
    pub numeric_ratio: f64,
    pub result_cue: bool,
    pub conclusion_cue: bool,
    pub method_cue: bool,
}

impl SentenceFeatures {
    pub fn to_vector(&self) -> [f64; FEATURE_DIM] {
        [
            self.relative_position,
            (self.token_count as f64).ln_1p(),
            self.type_token_ratio,
            self.centroid_similarity,
            self.numeric_ratio,
            f64::from(u8::from(self.result_cue)),
            f64::from(u8::from(self.conclusion_cue)),
            f64::from(u8::from(self.method_cue)),
        ]
    }
}

fn term_frequencies<'a>(tokens: impl IntoIterator<Item = &'a String>) -> HashMap<&'a str, f64> {
    let mut tf = HashMap::new();
    for t in tokens {
        *tf.entry(t.as_str()).or_insert(0.0) += 1.0;
    }
    tf
}

fn cosine(a: &HashMap<&str, f64>, b: &HashMap<&str, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Features of `sentence` within `doc`. The sentence is located in `doc` by its
/// `index`; when absent it is treated as the first sentence.
pub fn featurize(sentence: &Sentence, doc: &[Sentence]) -> SentenceFeatures {
    let position = doc.iter().position(|s| s.index == sentence.index).unwrap_or(0);
    let relative_position = if doc.len() > 1 {
        position as f64 / (doc.len() - 1) as f64
    } else {
        0.0
    };
    let tokens = &sentence.tokens;
    let n = tokens.len();
    let distinct = tokens.iter().collect::<std::collections::HashSet<_>>().len();
    let ratio = |count: usize| if n == 0 { 0.0 } else { count as f64 / n as f64 };
    let has_any = |cues: &[&str]| tokens.iter().any(|t| cues.contains(&t.as_str()));

    let doc_tf = term_frequencies(doc.iter().flat_map(|s| &s.tokens));
    let sent_tf = term_frequencies(tokens);

    SentenceFeatures {
        relative_position,
        token_count: n,
        type_token_ratio: ratio(distinct),
        centroid_similarity: cosine(&sent_tf, &doc_tf),
        numeric_ratio: ratio(tokens.iter().filter(|t| t.chars().any(|c| c.is_ascii_digit())).count()),
        result_cue: has_any(RESULT_CUES),
        conclusion_cue: tokens.first().is_some_and(|t| CONCLUSION_LEADS.contains(&t.as_str()))
            || has_any(CONCLUSION_CUES),
        method_cue: has_any(METHOD_CUES),
    }
}
