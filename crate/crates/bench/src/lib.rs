//! Seeded synthetic inputs for the criterion benches.

use napss_core::corpus::Sentence;
use napss_core::narrative::{DepParse, DepToken};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn words(rng: &mut ChaCha8Rng, len: usize, vocab: usize) -> Vec<String> {
    (0..len).map(|_| format!("w{}", rng.random_range(0..vocab))).collect()
}

pub fn sentences(rng: &mut ChaCha8Rng, count: usize, len: usize, vocab: usize) -> Vec<Sentence> {
    (0..count)
        .map(|i| Sentence::new(i, words(rng, len, vocab).join(" ")))
        .collect()
}

/// A random tree: every token after the first attaches to an
/// earlier token, and token 1 is the root.
pub fn parse(rng: &mut ChaCha8Rng, len: usize) -> DepParse {
    let tokens = (1..=len)
        .map(|id| DepToken {
            form: format!("t{id}"),
            id,
            head: if id == 1 { 0 } else { rng.random_range(1..id) },
            deprel: if id == 1 { "root".into() } else { "dep".into() },
            is_punct: rng.random_bool(0.1),
        })
        .collect();
    DepParse {
        sentence_index: 0,
        sent_id: None,
        tokens,
    }
}
