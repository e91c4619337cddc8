//! Flesch-Kincaid grade and Automated Readability Index.

use super::MetricError;
use crate::corpus::{segment_sentences, tokenize};

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel groups (`aeiouy` runs), minus a silent final `e` unless the word ends in
/// `le`; at least 1.
pub fn count_syllables(word: &str) -> usize {
    let lower = word.to_lowercase();
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for c in lower.chars() {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    if lower.ends_with('e') && !lower.ends_with("le") {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TextStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
    /// Letters and digits only.
    pub chars: usize,
}

pub fn text_stats(text: &str) -> Result<TextStats, MetricError> {
    let words = tokenize(text);
    if words.is_empty() {
        return Err(MetricError::EmptyText);
    }
    Ok(TextStats {
        sentences: segment_sentences(text).len().max(1),
        words: words.len(),
        syllables: words.iter().map(|w| count_syllables(w)).sum(),
        chars: text.chars().filter(|c| c.is_alphanumeric()).count(),
    })
}

/// `0.39 * words/sentences + 11.8 * syllables/words - 15.59`
pub fn fk_grade(text: &str) -> Result<f64, MetricError> {
    let s = text_stats(text)?;
    Ok(0.39 * s.words as f64 / s.sentences as f64 + 11.8 * s.syllables as f64 / s.words as f64 - 15.59)
}

/// `4.71 * chars/words + 0.5 * words/sentences - 21.43`
pub fn ari(text: &str) -> Result<f64, MetricError> {
    let s = text_stats(text)?;
    Ok(4.71 * s.chars as f64 / s.words as f64 + 0.5 * s.words as f64 / s.sentences as f64 - 21.43)
}
