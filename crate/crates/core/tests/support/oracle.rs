//! Brute-force reference implementations with exact rational arithmetic.
//!
//! Deliberately naive: n-gram multisets are plain vectors searched linearly,
//! LCS enumerates every subsequence, and argmin sorts all candidates.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;

pub type Q = Ratio<i128>;

fn q(n: usize, d: usize) -> Q {
    Q::new(n as i128, d as i128)
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn jaccard(a: &[String], b: &[String]) -> Q {
    let a: BTreeSet<&String> = a.iter().collect();
    let b: BTreeSet<&String> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return Q::from_integer(0);
    }
    Q::from_integer(1) - q(a.intersection(&b).count(), union)
}

/// Label vector: abstract sentence `i` is positive iff some PLS sentence has it
/// as its (lowest-index) nearest neighbour.
pub fn labels(abs: &[Vec<String>], pls: &[Vec<String>]) -> Vec<u8> {
    let mut out = vec![0u8; abs.len()];
    for p in pls {
        let mut ranked: Vec<(Q, usize)> = abs.iter().enumerate().map(|(i, a)| (jaccard(p, a), i)).collect();
        ranked.sort();
        out[ranked[0].1] = 1;
    }
    out
}

type Bag = Vec<(Vec<String>, usize)>;

pub fn ngrams(tokens: &[String], n: usize) -> Bag {
    let mut bag: Bag = Vec::new();
    if tokens.len() < n {
        return bag;
    }
    for i in 0..=tokens.len() - n {
        let g = tokens[i..i + n].to_vec();
        match bag.iter_mut().find(|(k, _)| *k == g) {
            Some(entry) => entry.1 += 1,
            None => bag.push((g, 1)),
        }
    }
    bag
}

fn count(bag: &Bag, g: &[String]) -> usize {
    bag.iter().find(|(k, _)| k.as_slice() == g).map_or(0, |e| e.1)
}

fn total(bag: &Bag) -> usize {
    bag.iter().map(|e| e.1).sum()
}

fn f1(p: Q, r: Q) -> Q {
    if p + r == Q::from_integer(0) {
        Q::from_integer(0)
    } else {
        Q::from_integer(2) * p * r / (p + r)
    }
}

fn prf(overlap: usize, c: usize, r: usize) -> (Q, Q, Q) {
    let p = if c == 0 { Q::from_integer(0) } else { q(overlap, c) };
    let rec = if r == 0 { Q::from_integer(0) } else { q(overlap, r) };
    (p, rec, f1(p, rec))
}

pub fn rouge_n(cand: &[String], reference: &[String], n: usize) -> (Q, Q, Q) {
    let c = ngrams(cand, n);
    let r = ngrams(reference, n);
    let overlap = c.iter().map(|(g, k)| (*k).min(count(&r, g))).sum();
    prf(overlap, total(&c), total(&r))
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == *x))
}

pub fn lcs(a: &[String], b: &[String]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| &a[i]).collect();
        if is_subsequence(&sub, b) {
            best = len;
        }
    }
    best
}

pub fn rouge_l(cand: &[String], reference: &[String]) -> (Q, Q, Q) {
    prf(lcs(cand, reference), cand.len(), reference.len())
}

/// Modified precisions are exact; only the geometric mean and brevity penalty
/// leave the rationals.
pub fn bleu(cand: &[String], refs: &[Vec<String>]) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let order = cand.len().min(4);
    let mut log_sum = 0.0;
    for n in 1..=order {
        let c = ngrams(cand, n);
        let clipped: usize = c
            .iter()
            .map(|(g, k)| {
                let max_ref = refs.iter().map(|r| count(&ngrams(r, n), g)).max().unwrap_or(0);
                (*k).min(max_ref)
            })
            .sum();
        let p = if clipped == 0 {
            1e-9 / total(&c) as f64
        } else {
            to_f64(q(clipped, total(&c)))
        };
        log_sum += p.ln();
    }
    let mut lens: Vec<usize> = refs.iter().map(Vec::len).collect();
    lens.sort_by_key(|&l| (l.abs_diff(cand.len()), l));
    let r = lens[0];
    let bp = if cand.len() < r {
        (1.0 - r as f64 / cand.len() as f64).exp()
    } else {
        1.0
    };
    bp * (log_sum / order as f64).exp()
}

/// `(keep_f1, del_precision, add_f1)` for one order.
pub fn sari_ngram(src: &[String], cand: &[String], refs: &[Vec<String>], n: usize) -> (Q, Q, Q) {
    let m = refs.len();
    let s = ngrams(src, n);
    let c = ngrams(cand, n);
    let mut r: Bag = Vec::new();
    for reference in refs {
        for (g, k) in ngrams(reference, n) {
            match r.iter_mut().find(|(key, _)| *key == g) {
                Some(e) => e.1 += k,
                None => r.push((g, k)),
            }
        }
    }
    let one = Q::from_integer(1);

    let mut keep_terms = Vec::new();
    let mut keep_good = 0;
    let mut keep_all = 0;
    let mut del_terms = Vec::new();
    for (g, sk) in &s {
        let s_rep = sk * m;
        let c_rep = count(&c, g) * m;
        let rc = count(&r, g);
        keep_all += s_rep.min(rc);
        let kept = s_rep.min(c_rep);
        if kept > 0 {
            let good = kept.min(rc);
            keep_terms.push(q(good, kept));
            keep_good += good;
        }
        let deleted = s_rep.saturating_sub(c_rep);
        if deleted > 0 {
            del_terms.push(q(deleted.saturating_sub(rc), deleted));
        }
    }
    let mean = |v: &[Q]| {
        if v.is_empty() {
            one
        } else {
            v.iter().fold(Q::from_integer(0), |a, b| a + b) / Q::from_integer(v.len() as i128)
        }
    };
    let keep_p = mean(&keep_terms);
    let keep_r = if keep_all == 0 { one } else { q(keep_good, keep_all) };
    let del_p = mean(&del_terms);

    let in_src = |g: &Vec<String>| s.iter().any(|(k, _)| k == g);
    let added: Vec<&Vec<String>> = c.iter().map(|(g, _)| g).filter(|g| !in_src(g)).collect();
    let good = added.iter().filter(|g| r.iter().any(|(k, _)| k == **g)).count();
    let wanted = r.iter().filter(|(g, _)| !in_src(g)).count();
    let add_p = if added.is_empty() { one } else { q(good, added.len()) };
    let add_r = if wanted == 0 { one } else { q(good, wanted) };

    (f1(keep_p, keep_r), del_p, f1(add_p, add_r))
}

/// `(sari, add, keep, del)`
pub fn sari(src: &[String], cand: &[String], refs: &[Vec<String>]) -> (Q, Q, Q, Q) {
    let zero = Q::from_integer(0);
    let (mut keep, mut del, mut add) = (zero, zero, zero);
    for n in 1..=4 {
        let (k, d, a) = sari_ngram(src, cand, refs, n);
        keep += k;
        del += d;
        add += a;
    }
    let four = Q::from_integer(4);
    let (keep, del, add) = (keep / four, del / four, add / four);
    ((keep + del + add) / Q::from_integer(3), add, keep, del)
}
