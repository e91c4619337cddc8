//! Seeded generators for synthetic documents, metric instances and parses.

#![allow(dead_code)]

use napss_core::corpus::Sentence;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn words<R: Rng>(rng: &mut R, len: usize, vocab: usize) -> Vec<String> {
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect()
}

pub fn sentence<R: Rng>(rng: &mut R, index: usize, vocab: usize) -> Sentence {
    let len = rng.random_range(1..=12);
    Sentence::new(index, words(rng, len, vocab).join(" "))
}

/// Abstract of 3 to 15 sentences and PLS of 1 to 8, drawn from `vocab` words.
pub fn document_pair(rng: &mut ChaCha8Rng, vocab: usize) -> (Vec<Sentence>, Vec<Sentence>) {
    let m = rng.random_range(3..=15);
    let q = rng.random_range(1..=8);
    let abs = (0..m).map(|i| sentence(rng, i, vocab)).collect();
    let pls = (0..q).map(|i| sentence(rng, i, vocab)).collect();
    (abs, pls)
}

pub struct MetricCase {
    pub source: Vec<String>,
    pub candidate: Vec<String>,
    pub references: Vec<Vec<String>>,
}

/// Every sequence has at most 12 tokens over a 6-word vocabulary, so overlaps
/// and repeats are common. The candidate may be empty.
pub fn metric_case(rng: &mut ChaCha8Rng) -> MetricCase {
    let vocab = 6;
    let source = {
        let n = rng.random_range(1..=12);
        words(rng, n, vocab)
    };
    let candidate = {
        let n = rng.random_range(0..=12);
        words(rng, n, vocab)
    };
    let refs = rng.random_range(1..=3);
    let references = (0..refs)
        .map(|_| {
            let n = rng.random_range(1..=12);
            words(rng, n, vocab)
        })
        .collect();
    MetricCase {
        source,
        candidate,
        references,
    }
}

/// One well-formed CoNLL-U sentence block: a random tree over `len` tokens with a
/// single root and some tokens tagged `PUNCT`.
pub fn conllu_block(rng: &mut ChaCha8Rng, len: usize, sent_id: &str) -> String {
    let mut order: Vec<usize> = (1..=len).collect();
    order.shuffle(rng);
    let mut head = vec![0usize; len + 1];
    for k in 1..len {
        head[order[k]] = order[rng.random_range(0..k)];
    }
    let mut out = format!("# sent_id = {sent_id}\n");
    for (id, &h) in head.iter().enumerate().skip(1) {
        let punct = h != 0 && rng.random_bool(0.2);
        let (form, upos) = if punct { (",", "PUNCT") } else { ("tok", "NOUN") };
        let deprel = if h == 0 { "root" } else if punct { "punct" } else { "dep" };
        out.push_str(&format!("{id}\t{form}{id}\t{form}\t{upos}\t_\t_\t{h}\t{deprel}\t_\t_\n"));
    }
    out.push('\n');
    out
}

/// A document of 1 to 6 sentence blocks of 1 to 20 tokens each.
pub fn conllu_document(rng: &mut ChaCha8Rng) -> String {
    let sentences = rng.random_range(1..=6);
    (0..sentences)
        .map(|i| {
            let len = rng.random_range(1..=20);
            conllu_block(rng, len, &format!("s{i}"))
        })
        .collect()
}
