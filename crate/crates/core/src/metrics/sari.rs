//! SARI: add, keep and delete n-gram scores against the source and references.
//!
//! Counts are replicated by the number of references so that reference agreement
//! weights the keep and delete operations. A component whose denominator is empty
//! scores 1.0, which makes "nothing to do, nothing done" a perfect score and leaves
//! any mismatch at 0 through the F1.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::lexical::ngram_counts;
use super::MetricError;

pub const SARI_MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SariScore {
    pub sari: f64,
    pub add: f64,
    pub keep: f64,
    pub del: f64,
}

/// Per-order components `(keep_f1, del_precision, add_f1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SariComponents {
    pub keep: f64,
    pub del: f64,
    pub add: f64,
}

type Counts<'a> = HashMap<Vec<&'a str>, usize>;

fn get(c: &Counts, g: &[&str]) -> usize {
    c.get(g).copied().unwrap_or(0)
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

pub fn sari_ngram<T: AsRef<str>>(
    source: &[T],
    candidate: &[T],
    references: &[Vec<T>],
    n: usize,
) -> SariComponents {
    let numref = references.len();
    let s = ngram_counts(source, n);
    let c = ngram_counts(candidate, n);
    let mut r: Counts = HashMap::new();
    for reference in references {
        for (g, k) in ngram_counts(reference, n) {
            *r.entry(g).or_insert(0) += k;
        }
    }

    // keep: grams in both source and candidate
    let mut keep_p_sum = 0.0;
    let mut keep_good_sum = 0usize;
    let mut keep_len = 0usize;
    for (g, &sc) in &s {
        let kept = (sc * numref).min(get(&c, g) * numref);
        if kept == 0 {
            continue;
        }
        let good = kept.min(get(&r, g));
        keep_len += 1;
        keep_p_sum += good as f64 / kept as f64;
        keep_good_sum += good;
    }
    let keep_all: usize = s.iter().map(|(g, &sc)| (sc * numref).min(get(&r, g))).sum();
    let keep_p = if keep_len > 0 { keep_p_sum / keep_len as f64 } else { 1.0 };
    let keep_r = if keep_all > 0 { keep_good_sum as f64 / keep_all as f64 } else { 1.0 };

    // delete: grams the candidate dropped from the source
    let mut del_p_sum = 0.0;
    let mut del_len = 0usize;
    for (g, &sc) in &s {
        let deleted = (sc * numref).saturating_sub(get(&c, g) * numref);
        if deleted == 0 {
            continue;
        }
        let good = deleted.saturating_sub(get(&r, g));
        del_len += 1;
        del_p_sum += good as f64 / deleted as f64;
    }
    let del_p = if del_len > 0 { del_p_sum / del_len as f64 } else { 1.0 };

    // add: new grams, scored as sets
    let added: HashSet<&Vec<&str>> = c.keys().filter(|g| !s.contains_key(*g)).collect();
    let good = added.iter().filter(|g| r.contains_key(**g)).count();
    let wanted = r.keys().filter(|g| !s.contains_key(*g)).count();
    let add_p = if added.is_empty() { 1.0 } else { good as f64 / added.len() as f64 };
    let add_r = if wanted > 0 { good as f64 / wanted as f64 } else { 1.0 };

    SariComponents {
        keep: f1(keep_p, keep_r),
        del: del_p,
        add: f1(add_p, add_r),
    }
}

pub fn sari<T: AsRef<str>>(
    source: &[T],
    candidate: &[T],
    references: &[Vec<T>],
) -> Result<SariScore, MetricError> {
    if references.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let mut total = SariScore::default();
    for n in 1..=SARI_MAX_ORDER {
        let c = sari_ngram(source, candidate, references, n);
        total.keep += c.keep;
        total.del += c.del;
        total.add += c.add;
    }
    let k = SARI_MAX_ORDER as f64;
    total.keep /= k;
    total.del /= k;
    total.add /= k;
    total.sari = (total.keep + total.del + total.add) / 3.0;
    Ok(total)
}
