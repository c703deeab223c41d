//! Core of the blankcrack cloze annotation game: per-language corpus
//! indexing, word-pair generation, riddle construction, scoring, pair
//! scheduling, term-preference evaluation and log statistics.

pub mod annotation_log;
pub mod corpus;
pub mod cstp;
pub mod ids;
pub mod lang;
pub mod pairgen;
pub mod riddle;
pub mod scheduler;
pub mod scoring;
pub mod stats;

pub use annotation_log::{read_log, write_log, AnnotationLog, LogError};
pub use corpus::{CorpusBuilder, CorpusError, CorpusIndex, Sentence, Stemmer};
pub use ids::{AnnotationId, IdSequence, PairId, PlayerId, RiddleId, SentenceId};
pub use lang::{Genre, Language};
pub use pairgen::{PairOrigin, PairRejection, PairState, WordPair};
pub use riddle::{build_riddle, Riddle, RiddleError, RiddlePayload};
pub use scheduler::{Scheduler, SchedulerError};
pub use scoring::{AnnotationRecord, PairDifficulty, PlayerScores, PointTable};
