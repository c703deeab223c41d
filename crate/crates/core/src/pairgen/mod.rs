//! Initial word-pair set: manual semantic series and embedding-similarity
//! mining, plus the validity rules every pair must satisfy.

mod embedding;
mod mining;
mod series;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, CorpusIndex, Stemmer};
use crate::ids::{PairId, PlayerId};
use crate::lang::Language;

pub use embedding::{cosine, EmbeddingTable};
pub use mining::{mine_pairs, sample_pair_indices, MinedPairs, DEFAULT_SAMPLE_N, DEFAULT_TOP_K};
pub use series::{manual_series_pairs, parse_series, series_candidates, Series, SeriesPairs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrigin {
    Manual,
    EmbeddingMined,
    UserProposed,
}

impl PairOrigin {
    pub const ALL: [PairOrigin; 3] = [
        PairOrigin::UserProposed,
        PairOrigin::Manual,
        PairOrigin::EmbeddingMined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairOrigin::Manual => "manual",
            PairOrigin::EmbeddingMined => "embedding_mined",
            PairOrigin::UserProposed => "user_proposed",
        }
    }
}

impl fmt::Display for PairOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PairOrigin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PairOrigin::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown pair origin `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairState {
    Active,
    Deferred,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPair {
    pub id: PairId,
    pub language: Language,
    pub word_a: String,
    pub word_b: String,
    pub origin: PairOrigin,
    /// Present iff `origin` is [`PairOrigin::UserProposed`].
    pub proposer: Option<PlayerId>,
    pub state: PairState,
    /// Milliseconds since the Unix epoch.
    pub created_at: i64,
}

impl WordPair {
    pub fn words(&self) -> (&str, &str) {
        (&self.word_a, &self.word_b)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_a == word || self.word_b == word
    }

    /// The other word of the pair, if `word` belongs to it.
    pub fn other(&self, word: &str) -> Option<&str> {
        if word == self.word_a {
            Some(&self.word_b)
        } else if word == self.word_b {
            Some(&self.word_a)
        } else {
            None
        }
    }
}

/// Why a candidate pair cannot become a [`WordPair`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum PairRejection {
    IdenticalWords,
    CaseVariants,
    IdenticalStems { stem: String },
    NotASingleToken { word: String },
    OutOfVocabulary { word: String },
    InsufficientContexts { best: usize, required: usize },
    AlreadyExists { pair_id: PairId },
}

impl fmt::Display for PairRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairRejection::IdenticalWords => f.write_str("identical words"),
            PairRejection::CaseVariants => f.write_str("words differ only by case"),
            PairRejection::IdenticalStems { stem } => write!(f, "identical stems ({stem})"),
            PairRejection::NotASingleToken { word } => write!(f, "`{word}` is not a single word"),
            PairRejection::OutOfVocabulary { word } => {
                write!(f, "`{word}` does not occur in the corpus")
            }
            PairRejection::InsufficientContexts { best, required } => write!(
                f,
                "not enough usable sentences ({best} found, {required} needed)"
            ),
            PairRejection::AlreadyExists { pair_id } => {
                write!(f, "pair already exists (#{pair_id})")
            }
        }
    }
}

/// Form-level checks shared by every pair source: the two words must be
/// distinct single tokens that differ beyond case and do not share a stem.
pub fn check_words(a: &str, b: &str, stemmer: &Stemmer) -> Vec<PairRejection> {
    let mut out = Vec::new();
    for word in [a, b] {
        if tokenize(word, stemmer.language()).len() != 1 {
            out.push(PairRejection::NotASingleToken {
                word: word.to_string(),
            });
        }
    }
    if a == b {
        out.push(PairRejection::IdenticalWords);
        return out;
    }
    if a.to_lowercase() == b.to_lowercase() {
        out.push(PairRejection::CaseVariants);
        return out;
    }
    let (sa, sb) = (stemmer.stem(&a.to_lowercase()), stemmer.stem(&b.to_lowercase()));
    if sa == sb {
        out.push(PairRejection::IdenticalStems { stem: sa });
    }
    out
}

/// [`check_words`] plus corpus vocabulary membership.
pub fn check_pair(a: &str, b: &str, index: &CorpusIndex) -> Vec<PairRejection> {
    let mut out = check_words(a, b, index.stemmer());
    for word in [a, b] {
        if !index.contains_token(word) {
            out.push(PairRejection::OutOfVocabulary {
                word: word.to_string(),
            });
        }
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum PairgenError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("numeric domain error: {0}")]
    NumericDomain(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
