//! Context-specific term preference: given a context with one empty slot,
//! which of two terms does a model prefer?
//!
//! Four model families expose four different quantities, and each yields the
//! same comparison:
//!
//! * conditional models give `P(t | c)` directly;
//! * context-generative models give `P(c | t)` and `P(t)`; by Bayes' rule the
//!   shared `P(c)` cancels, so `P(c | t) P(t)` is compared;
//! * membership models give `P(t ∈ c)`; normalizing over the vocabulary
//!   divides both sides by the same positive constant, so raw values are
//!   compared;
//! * autoregressive models give next-token probabilities; the filled-in
//!   context is scored by the probability of its final token.
//!
//! All scores are handled as natural logarithms. Two scores within the tie
//! tolerance (default `1e-9`) are a tie, and so are two hard zeros.

mod agreement;
mod coin;
mod count_oracle;
mod external;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use agreement::{
    agreement_report, aggregate_majority, AgreementReport, AgreementRow, AgreementSummary,
    CorpusLookup,
};
pub use coin::CoinFlipOracle;
pub use count_oracle::CountOracle;
pub use external::{SubprocessOracle, DEFAULT_ORACLE_TIMEOUT};

pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CstpError {
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("degenerate comparison: both terms have zero prior probability")]
    DegenerateComparison,
    #[error("oracle contract violation: {0}")]
    OracleContract(String),
    #[error("unsupported template: {0}")]
    UnsupportedTemplate(String),
    #[error("a context template needs at least one context token")]
    EmptyTemplate,
    #[error("cannot build a count oracle from an empty corpus")]
    EmptyCorpus,
    #[error("smoothing must be positive and finite (got {0})")]
    InvalidSmoothing(f64),
    #[error("external oracle: {0}")]
    External(String),
    #[error("external oracle did not answer within {0:?}")]
    Timeout(std::time::Duration),
}

/// A probability stored as its natural logarithm. Hard zeros are `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Prob(f64);

impl Prob {
    pub const ZERO: Prob = Prob(f64::NEG_INFINITY);
    pub const ONE: Prob = Prob(0.0);

    /// From a nonnegative value. Negative, NaN or infinite input violates the
    /// oracle contract.
    pub fn new(p: f64) -> Result<Prob, CstpError> {
        if !p.is_finite() || p < 0.0 {
            return Err(CstpError::OracleContract(format!(
                "probability must be finite and nonnegative, got {p}"
            )));
        }
        Ok(Prob(p.ln()))
    }

    pub fn from_ln(ln: f64) -> Result<Prob, CstpError> {
        if ln.is_nan() || ln == f64::INFINITY {
            return Err(CstpError::OracleContract(format!("invalid log probability {ln}")));
        }
        Ok(Prob(ln))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for Prob {
    type Output = Prob;

    fn mul(self, rhs: Prob) -> Prob {
        // log-space product
        #[allow(clippy::suspicious_arithmetic_impl)]
        Prob(self.0 + rhs.0)
    }
}

/// A context with one slot: `prefix _ suffix`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextTemplate {
    prefix: Vec<String>,
    suffix: Vec<String>,
}

impl ContextTemplate {
    pub fn new(prefix: Vec<String>, suffix: Vec<String>) -> Result<Self, CstpError> {
        if prefix.is_empty() && suffix.is_empty() {
            return Err(CstpError::EmptyTemplate);
        }
        Ok(ContextTemplate { prefix, suffix })
    }

    /// Parse whitespace-separated tokens with a single `_` slot, e.g. `"x _ y"`.
    pub fn parse(text: &str) -> Result<Self, CstpError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let slots: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter_map(|(i, t)| (*t == "_").then_some(i))
            .collect();
        let [slot] = slots[..] else {
            return Err(CstpError::UnsupportedTemplate(format!(
                "expected exactly one `_` slot in `{text}`"
            )));
        };
        let owned = |s: &[&str]| s.iter().map(|t| t.to_string()).collect();
        Self::new(owned(&tokens[..slot]), owned(&tokens[slot + 1..]))
    }

    /// Template for a tokenized sentence: the slot is the first occurrence of
    /// `target`, and any further occurrences are dropped from the context
    /// (they are blanks too). `None` if the target is absent or is the whole
    /// sentence.
    pub fn from_tokens(tokens: &[String], target: &str) -> Option<Self> {
        let slot = tokens.iter().position(|t| t == target)?;
        let keep = |s: &[String]| -> Vec<String> {
            s.iter().filter(|t| *t != target).cloned().collect()
        };
        Self::new(keep(&tokens[..slot]), keep(&tokens[slot + 1..])).ok()
    }

    pub fn prefix(&self) -> &[String] {
        &self.prefix
    }

    pub fn suffix(&self) -> &[String] {
        &self.suffix
    }

    pub fn slot_position(&self) -> usize {
        self.prefix.len()
    }

    /// Context tokens as an unordered bag (prefix then suffix).
    pub fn bag(&self) -> impl Iterator<Item = &str> + '_ {
        self.prefix.iter().chain(&self.suffix).map(String::as_str)
    }
}

impl fmt::Display for ContextTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = self.prefix.iter().map(String::as_str).collect::<Vec<_>>();
        parts.push("_");
        parts.extend(self.suffix.iter().map(String::as_str));
        f.write_str(&parts.join(" "))
    }
}

/// Models of `P(t | c)`, up to a factor constant for a given context.
pub trait ConditionalOracle: Send + Sync {
    fn conditional(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError>;
}

/// Models of `P(c | t)` with a term prior `P(t)`.
pub trait ContextGenerativeOracle: Send + Sync {
    fn likelihood(&self, context: &ContextTemplate, term: &str) -> Result<Prob, CstpError>;
    fn prior(&self, term: &str) -> Result<Prob, CstpError>;
}

/// Models of `P(t ∈ c)`.
pub trait MembershipOracle: Send + Sync {
    fn membership(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError>;
}

/// Models of `P(token | prefix)`.
pub trait AutoregressiveOracle: Send + Sync {
    fn next_prob(&self, prefix: &[String], token: &str) -> Result<Prob, CstpError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    First,
    Second,
    Tie,
}

impl Winner {
    pub fn swapped(self) -> Winner {
        match self {
            Winner::First => Winner::Second,
            Winner::Second => Winner::First,
            Winner::Tie => Winner::Tie,
        }
    }
}

/// Which comparison produced a [`Preference`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Direct,
    Bayes,
    Membership,
    Autoregressive,
}

/// Outcome of one comparison. Scores are natural logs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub winner: Winner,
    pub score_first: f64,
    pub score_second: f64,
    pub rule: Rule,
}

/// How autoregressive models score the filled-in context.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuation {
    /// Probability of the final context token given everything before it.
    #[default]
    FinalToken,
    /// Product over every suffix token. Not a standard reading; offered as an
    /// option because bigram-like models ignore the slot when the suffix is
    /// longer than one token.
    FullContinuation,
}

/// A model bound to the comparison rule its family supports.
#[derive(Clone, Copy)]
pub enum Model<'a> {
    Direct(&'a dyn ConditionalOracle),
    Bayes(&'a dyn ContextGenerativeOracle),
    Membership(&'a dyn MembershipOracle),
    Autoregressive(&'a dyn AutoregressiveOracle),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judge {
    pub tie_tolerance: f64,
    pub continuation: Continuation,
}

impl Default for Judge {
    fn default() -> Self {
        Judge {
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            continuation: Continuation::FinalToken,
        }
    }
}

impl Judge {
    pub fn decide(&self, first: f64, second: f64) -> Winner {
        if first == second {
            // covers -inf vs -inf
            return Winner::Tie;
        }
        let delta = first - second;
        if delta.abs() < self.tie_tolerance {
            Winner::Tie
        } else if delta > 0.0 {
            Winner::First
        } else {
            Winner::Second
        }
    }

    fn preference(&self, first: Prob, second: Prob, rule: Rule) -> Preference {
        Preference {
            winner: self.decide(first.ln(), second.ln()),
            score_first: first.ln(),
            score_second: second.ln(),
            rule,
        }
    }

    pub fn prefer(
        &self,
        model: Model<'_>,
        context: &ContextTemplate,
        t1: &str,
        t2: &str,
    ) -> Result<Preference, CstpError> {
        match model {
            Model::Direct(o) => self.prefer_direct(o, context, t1, t2),
            Model::Bayes(o) => self.prefer_bayes(o, context, t1, t2),
            Model::Membership(o) => self.prefer_membership(o, context, t1, t2),
            Model::Autoregressive(o) => self.prefer_autoregressive(o, context, t1, t2),
        }
    }

    pub fn prefer_direct<O: ConditionalOracle + ?Sized>(
        &self,
        oracle: &O,
        context: &ContextTemplate,
        t1: &str,
        t2: &str,
    ) -> Result<Preference, CstpError> {
        let s1 = oracle.conditional(t1, context)?;
        let s2 = oracle.conditional(t2, context)?;
        Ok(self.preference(s1, s2, Rule::Direct))
    }

    /// Compares `P(c | t) P(t)`; `P(c)` is never computed.
    pub fn prefer_bayes<O: ContextGenerativeOracle + ?Sized>(
        &self,
        oracle: &O,
        context: &ContextTemplate,
        t1: &str,
        t2: &str,
    ) -> Result<Preference, CstpError> {
        let (p1, p2) = (oracle.prior(t1)?, oracle.prior(t2)?);
        if p1.is_zero() && p2.is_zero() {
            return Err(CstpError::DegenerateComparison);
        }
        let s1 = oracle.likelihood(context, t1)? * p1;
        let s2 = oracle.likelihood(context, t2)? * p2;
        Ok(self.preference(s1, s2, Rule::Bayes))
    }

    /// Compares raw membership; the vocabulary normalizer is a positive
    /// constant for the context and cannot change the winner.
    pub fn prefer_membership<O: MembershipOracle + ?Sized>(
        &self,
        oracle: &O,
        context: &ContextTemplate,
        t1: &str,
        t2: &str,
    ) -> Result<Preference, CstpError> {
        let s1 = oracle.membership(t1, context)?;
        let s2 = oracle.membership(t2, context)?;
        Ok(self.preference(s1, s2, Rule::Membership))
    }

    /// Scores `P(c_n | prefix, t, c_{i+1} .. c_{n-1})`, or the product over
    /// the whole suffix in [`Continuation::FullContinuation`] mode.
    pub fn prefer_autoregressive<O: AutoregressiveOracle + ?Sized>(
        &self,
        oracle: &O,
        context: &ContextTemplate,
        t1: &str,
        t2: &str,
    ) -> Result<Preference, CstpError> {
        if context.suffix().is_empty() {
            return Err(CstpError::UnsupportedTemplate(
                "autoregressive comparison needs at least one token after the slot".into(),
            ));
        }
        let s1 = self.continuation_score(oracle, context, t1)?;
        let s2 = self.continuation_score(oracle, context, t2)?;
        Ok(self.preference(s1, s2, Rule::Autoregressive))
    }

    fn continuation_score<O: AutoregressiveOracle + ?Sized>(
        &self,
        oracle: &O,
        context: &ContextTemplate,
        term: &str,
    ) -> Result<Prob, CstpError> {
        let suffix = context.suffix();
        let mut history: Vec<String> = context.prefix().to_vec();
        history.push(term.to_string());
        let last = suffix.len() - 1;
        match self.continuation {
            Continuation::FinalToken => {
                history.extend_from_slice(&suffix[..last]);
                oracle.next_prob(&history, &suffix[last])
            }
            Continuation::FullContinuation => {
                let mut total = Prob::ONE;
                for token in suffix {
                    total = total * oracle.next_prob(&history, token)?;
                    history.push(token.clone());
                }
                Ok(total)
            }
        }
    }
}

pub fn prefer_direct<O: ConditionalOracle + ?Sized>(
    oracle: &O,
    context: &ContextTemplate,
    t1: &str,
    t2: &str,
) -> Result<Preference, CstpError> {
    Judge::default().prefer_direct(oracle, context, t1, t2)
}

pub fn prefer_bayes<O: ContextGenerativeOracle + ?Sized>(
    oracle: &O,
    context: &ContextTemplate,
    t1: &str,
    t2: &str,
) -> Result<Preference, CstpError> {
    Judge::default().prefer_bayes(oracle, context, t1, t2)
}

pub fn prefer_membership<O: MembershipOracle + ?Sized>(
    oracle: &O,
    context: &ContextTemplate,
    t1: &str,
    t2: &str,
) -> Result<Preference, CstpError> {
    Judge::default().prefer_membership(oracle, context, t1, t2)
}

pub fn prefer_autoregressive<O: AutoregressiveOracle + ?Sized>(
    oracle: &O,
    context: &ContextTemplate,
    t1: &str,
    t2: &str,
) -> Result<Preference, CstpError> {
    Judge::default().prefer_autoregressive(oracle, context, t1, t2)
}
