//! Sentence corpora: ingestion, tokenization, stemming and the inverted
//! indexes that answer riddle eligibility queries.

mod index;
mod snapshot;
mod stem;
mod text;

use std::path::PathBuf;

pub use index::{
    sample_sentences, CorpusBuilder, CorpusIndex, EligibilityOptions, Sentence,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use stem::Stemmer;
pub use text::{normalize, token_spans, tokenize, TokenSpan};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus file {} is not valid UTF-8 (line {line})", path.display())]
    Encoding { path: PathBuf, line: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("only {available} eligible sentences, {requested} requested")]
    InsufficientContext { available: usize, requested: usize },
    #[error("corpus snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}
