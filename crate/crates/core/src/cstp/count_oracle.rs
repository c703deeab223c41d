use std::collections::HashMap;

use super::{
    AutoregressiveOracle, ConditionalOracle, ContextGenerativeOracle, ContextTemplate, CstpError,
    MembershipOracle, Prob,
};
use crate::corpus::{CorpusIndex, Sentence};
use crate::ids::SentenceId;

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";

/// Add-alpha count model over one corpus, usable as every oracle family.
///
/// Co-occurrence `C(t, w)` counts ordered pairs of distinct positions in the
/// same sentence, and `C(t) = Σ_w C(t, w)`. The model factorizes as
///
/// * prior `P(t) ∝ C(t) + α|V|`
/// * likelihood `P(w | t) = (C(t, w) + α) / (C(t) + α|V|)`, multiplied over the
///   context bag
///
/// so for a single-token context `P(w | t) P(t) ∝ C(t, w) + α`, the smoothed
/// joint-count conditional. Membership and bigram statistics are sentence
/// counts and add-alpha bigrams over `V ∪ {</s>}`.
#[derive(Debug)]
pub struct CountOracle<'a> {
    index: &'a CorpusIndex,
    alpha: f64,
    mass: HashMap<&'a str, u64>,
    total_mass: u64,
}

impl<'a> CountOracle<'a> {
    pub fn new(index: &'a CorpusIndex, alpha: f64) -> Result<Self, CstpError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CstpError::InvalidSmoothing(alpha));
        }
        if index.total_tokens() == 0 {
            return Err(CstpError::EmptyCorpus);
        }
        let mut mass: HashMap<&str, u64> = HashMap::with_capacity(index.vocabulary().len());
        let mut total_mass = 0u64;
        for sentence in index.sentences() {
            let others = (sentence.tokens.len() as u64).saturating_sub(1);
            for token in &sentence.tokens {
                *mass.entry(token.as_str()).or_insert(0) += others;
                total_mass += others;
            }
        }
        for token in index.vocabulary().keys() {
            mass.entry(token.as_str()).or_insert(0);
        }
        Ok(CountOracle {
            index,
            alpha,
            mass,
            total_mass,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary_size(&self) -> usize {
        self.mass.len()
    }

    fn v(&self) -> f64 {
        self.mass.len() as f64
    }

    fn known_mass(&self, term: &str) -> Result<u64, CstpError> {
        self.mass
            .get(term)
            .copied()
            .ok_or_else(|| CstpError::UnknownTerm(term.to_string()))
    }

    /// Sentences containing both tokens, walking the shorter posting list.
    fn shared<'s>(&'s self, a: &str, b: &str) -> impl Iterator<Item = &'s Sentence> + 's {
        let (pa, pb) = (
            self.index.sentences_with_token(a),
            self.index.sentences_with_token(b),
        );
        let (short, other) = if pa.len() <= pb.len() { (pa, b) } else { (pb, a) };
        let other = other.to_string();
        short
            .iter()
            .filter_map(|id: &SentenceId| self.index.sentence(*id))
            .filter(move |s| s.contains_token(&other))
    }

    /// `C(t, w)`: ordered pairs of distinct positions holding `t` and `w`.
    pub fn cooccurrence(&self, t: &str, w: &str) -> u64 {
        self.shared(t, w)
            .map(|s| {
                let ct = occurrences(s, t);
                if t == w {
                    ct * ct.saturating_sub(1)
                } else {
                    ct * occurrences(s, w)
                }
            })
            .sum()
    }

    /// Number of sentences containing both tokens (at least two copies when
    /// they are equal).
    pub fn sentence_cooccurrence(&self, t: &str, w: &str) -> u64 {
        if t == w {
            return self
                .index
                .sentences_with_token(t)
                .iter()
                .filter_map(|id| self.index.sentence(*id))
                .filter(|s| occurrences(s, t) >= 2)
                .count() as u64;
        }
        self.shared(t, w).count() as u64
    }

    fn bigram(&self, a: &str, b: &str) -> u64 {
        let sentences = self.index.sentences();
        match (a, b) {
            (SENTENCE_START, SENTENCE_END) => 0,
            (SENTENCE_START, b) => self
                .index
                .sentences_with_token(b)
                .iter()
                .filter(|id| sentences[id.0 as usize].tokens.first().map(String::as_str) == Some(b))
                .count() as u64,
            (a, SENTENCE_END) => self
                .index
                .sentences_with_token(a)
                .iter()
                .filter(|id| sentences[id.0 as usize].tokens.last().map(String::as_str) == Some(a))
                .count() as u64,
            (a, b) => self
                .shared(a, b)
                .map(|s| s.tokens.windows(2).filter(|w| w[0] == a && w[1] == b).count() as u64)
                .sum(),
        }
    }

    fn bigram_context_total(&self, a: &str) -> u64 {
        if a == SENTENCE_START {
            self.index.len() as u64
        } else {
            self.index.token_count(a)
        }
    }
}

fn occurrences(sentence: &Sentence, token: &str) -> u64 {
    sentence.tokens.iter().filter(|t| *t == token).count() as u64
}

impl ContextGenerativeOracle for CountOracle<'_> {
    fn likelihood(&self, context: &ContextTemplate, term: &str) -> Result<Prob, CstpError> {
        let denom = self.known_mass(term)? as f64 + self.alpha * self.v();
        let mut ln = 0.0;
        for w in context.bag() {
            ln += ((self.cooccurrence(term, w) as f64 + self.alpha) / denom).ln();
        }
        Prob::from_ln(ln)
    }

    fn prior(&self, term: &str) -> Result<Prob, CstpError> {
        let av = self.alpha * self.v();
        let num = self.known_mass(term)? as f64 + av;
        Prob::new(num / (self.total_mass as f64 + av * self.v()))
    }
}

impl ConditionalOracle for CountOracle<'_> {
    /// Prior times likelihood: `P(t | c)` up to the context's normalizer.
    fn conditional(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        Ok(self.prior(term)? * self.likelihood(context, term)?)
    }
}

impl MembershipOracle for CountOracle<'_> {
    /// Mean over context tokens of the smoothed fraction of sentences with
    /// that token which also contain `term`.
    fn membership(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        self.known_mass(term)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for w in context.bag() {
            let with_w = self.index.sentences_with_token(w).len() as f64;
            sum += (self.sentence_cooccurrence(term, w) as f64 + self.alpha)
                / (with_w + 2.0 * self.alpha);
            n += 1;
        }
        Prob::new(sum / n as f64)
    }
}

impl AutoregressiveOracle for CountOracle<'_> {
    /// Add-alpha bigram on the last history token (`<s>` when empty).
    fn next_prob(&self, prefix: &[String], token: &str) -> Result<Prob, CstpError> {
        let previous = prefix.last().map_or(SENTENCE_START, String::as_str);
        let num = self.bigram(previous, token) as f64 + self.alpha;
        let den = self.bigram_context_total(previous) as f64 + self.alpha * (self.v() + 1.0);
        Prob::new(num / den)
    }
}
