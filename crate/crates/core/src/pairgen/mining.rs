use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::Rng;
use rayon::prelude::*;

use super::{check_words, EmbeddingTable, PairOrigin, PairState, WordPair};
use crate::corpus::Stemmer;
use crate::ids::{IdSequence, PairId};

/// Number of random pairs drawn per language.
pub const DEFAULT_SAMPLE_N: usize = 1_000_000;
/// Number of mined pairs kept per language.
pub const DEFAULT_TOP_K: usize = 250;

/// Draw `sample_n` unordered pairs of distinct vocabulary rows uniformly over
/// types, with replacement across draws. Duplicates are collapsed; the result
/// keeps first-draw order and stores each pair as `(low, high)`.
pub fn sample_pair_indices<R: Rng + ?Sized>(
    vocab_len: usize,
    sample_n: usize,
    rng: &mut R,
) -> Vec<(u32, u32)> {
    if vocab_len < 2 {
        return Vec::new();
    }
    let mut seen = HashSet::with_capacity(sample_n.min(vocab_len * vocab_len / 2));
    let mut out = Vec::new();
    for _ in 0..sample_n {
        let i = rng.gen_range(0..vocab_len);
        let mut j = rng.gen_range(0..vocab_len - 1);
        if j >= i {
            j += 1;
        }
        let key = (i.min(j) as u32, i.max(j) as u32);
        if seen.insert(key) {
            out.push(key);
        }
    }
    out
}

#[derive(Debug)]
pub struct MinedPairs {
    pub pairs: Vec<WordPair>,
    /// Distinct pairs in the sample.
    pub sampled: usize,
    /// How many of the requested `top_k` could not be filled with valid pairs.
    pub shortfall: usize,
}

struct Candidate<'a> {
    cosine: f64,
    a: &'a str,
    b: &'a str,
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Max-heap order: higher cosine first, then lexicographically smaller words.
impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cosine
            .total_cmp(&other.cosine)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

/// Rank a random sample of pairs by cosine similarity and keep the `top_k`
/// best pairs that are valid word pairs (distinct stems, not case variants).
pub fn mine_pairs<R: Rng + ?Sized>(
    table: &EmbeddingTable,
    sample_n: usize,
    top_k: usize,
    rng: &mut R,
    ids: &IdSequence,
    created_at: i64,
) -> MinedPairs {
    let stemmer = Stemmer::new(table.language());
    let sample = sample_pair_indices(table.len(), sample_n, rng);
    let sampled = sample.len();
    if top_k == 0 {
        return MinedPairs {
            pairs: Vec::new(),
            sampled,
            shortfall: 0,
        };
    }

    let words = table.words();
    let candidates: Vec<Candidate<'_>> = sample
        .par_iter()
        .map(|&(i, j)| {
            let (wi, wj) = (words[i as usize].as_str(), words[j as usize].as_str());
            let (a, b) = if wi <= wj { (wi, wj) } else { (wj, wi) };
            Candidate {
                cosine: table.cosine_rows(i as usize, j as usize),
                a,
                b,
            }
        })
        .collect();
    let mut heap = BinaryHeap::from(candidates);

    let mut pairs = Vec::with_capacity(top_k);
    while pairs.len() < top_k {
        let Some(best) = heap.pop() else { break };
        if !check_words(best.a, best.b, &stemmer).is_empty() {
            continue;
        }
        pairs.push(WordPair {
            id: PairId(ids.next()),
            language: table.language(),
            word_a: best.a.to_string(),
            word_b: best.b.to_string(),
            origin: PairOrigin::EmbeddingMined,
            proposer: None,
            state: PairState::Active,
            created_at,
        });
    }
    let shortfall = top_k - pairs.len();
    if shortfall > 0 {
        tracing::warn!(shortfall, top_k, "not enough valid pairs in the sample");
    }
    MinedPairs {
        pairs,
        sampled,
        shortfall,
    }
}
