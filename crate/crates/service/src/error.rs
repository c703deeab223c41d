use blankcrack_core::pairgen::PairRejection;
use blankcrack_core::{CorpusError, Language};

use crate::journal::JournalError;
use crate::state::{AnswerResponse, StateError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("authentication required")]
    Unauthorized,
    #[error("wrong username or password")]
    InvalidCredentials,
    #[error("username `{0}` is taken")]
    UsernameTaken(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("unsupported setting `{0}`")]
    UnsupportedSetting(String),
    #[error("no corpus loaded for {0}")]
    LanguageNotLoaded(Language),
    #[error("no riddles available for {0}")]
    NoRiddles(Language),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("riddle already answered")]
    Duplicate(Box<AnswerResponse>),
    #[error("pair rejected: {}", list(.0))]
    PairRejected(Vec<PairRejection>),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn list(reasons: &[PairRejection]) -> String {
    reasons
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
