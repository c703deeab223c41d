//! Cracker points and blanker success rates.
//!
//! Points for a correct answer are `base(k) * difficulty * time`, clamped to
//! `[0.1, 3.0]`:
//!
//! | factor     | values                                     |
//! |------------|--------------------------------------------|
//! | base(k)    | k=5: 0.5, k=3: 1.0, k=1: 1.5               |
//! | difficulty | normal: 1.0, known difficult: 2.0          |
//! | time       | under the threshold (3 min): 1.0, else 0.2 |
//!
//! Incorrect answers score 0; points are never deducted.

use serde::{Deserialize, Serialize};

use crate::ids::{AnnotationId, PairId, PlayerId, RiddleId};
use crate::lang::Language;
use crate::pairgen::PairOrigin;
use crate::riddle::is_valid_k;

pub const MIN_POINTS: f64 = 0.1;
pub const MAX_POINTS: f64 = 3.0;
pub const DEFAULT_TIME_THRESHOLD_MS: i64 = 180_000;

/// A pair needs at least this many annotations before it can be labelled
/// known-difficult.
pub const DIFFICULTY_MIN_ANNOTATIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairDifficulty {
    Normal,
    KnownDifficult,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScoringError {
    #[error("elapsed time cannot be negative ({0} ms)")]
    NegativeElapsed(i64),
    #[error("k must be one of 1, 3, 5 (got {0})")]
    InvalidK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointTable {
    pub time_threshold_ms: i64,
}

impl Default for PointTable {
    fn default() -> Self {
        PointTable {
            time_threshold_ms: DEFAULT_TIME_THRESHOLD_MS,
        }
    }
}

impl PointTable {
    pub fn score(
        &self,
        correct: bool,
        elapsed_ms: i64,
        k: usize,
        difficulty: PairDifficulty,
    ) -> Result<f64, ScoringError> {
        if elapsed_ms < 0 {
            return Err(ScoringError::NegativeElapsed(elapsed_ms));
        }
        // factors in tenths so the product is an exact count of hundredths
        let base = match k {
            5 => 5,
            3 => 10,
            1 => 15,
            _ => return Err(ScoringError::InvalidK(k)),
        };
        if !correct {
            return Ok(0.0);
        }
        let difficulty = match difficulty {
            PairDifficulty::Normal => 1,
            PairDifficulty::KnownDifficult => 2,
        };
        let time = if elapsed_ms < self.time_threshold_ms { 10 } else { 2 };
        let hundredths = (base * difficulty * time).clamp(10, 300);
        Ok(f64::from(hundredths) / 100.0)
    }
}

/// Score with the default three-minute threshold.
pub fn score_annotation(
    correct: bool,
    elapsed_ms: i64,
    k: usize,
    difficulty: PairDifficulty,
) -> Result<f64, ScoringError> {
    PointTable::default().score(correct, elapsed_ms, k, difficulty)
}

/// One cracker judgment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: AnnotationId,
    pub riddle_id: RiddleId,
    pub player_id: PlayerId,
    pub pair_id: PairId,
    pub language: Language,
    pub pair_origin: PairOrigin,
    pub choice: String,
    pub correct: bool,
    pub elapsed_ms: i64,
    pub k: usize,
    pub points: f64,
    /// Milliseconds since the Unix epoch.
    #[serde(rename = "timestamp")]
    pub created_at: i64,
}

impl AnnotationRecord {
    /// Field-level invariants: valid k, nonnegative time, points consistent
    /// with correctness.
    pub fn validate(&self) -> Result<(), String> {
        if !is_valid_k(self.k) {
            return Err(format!("k={} outside {{1,3,5}}", self.k));
        }
        if self.elapsed_ms < 0 {
            return Err("negative elapsed_ms".into());
        }
        if !self.correct && self.points != 0.0 {
            return Err("incorrect answer with nonzero points".into());
        }
        if self.correct && !(MIN_POINTS..=MAX_POINTS).contains(&self.points) {
            return Err(format!("points {} outside [0.1, 3]", self.points));
        }
        Ok(())
    }
}

/// Percentage of annotations on a proposer's pairs where the cracker picked
/// the foil. `None` without records.
pub fn blanker_rate<'a, I>(records: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a AnnotationRecord>,
{
    let (total, failed) = records
        .into_iter()
        .fold((0usize, 0usize), |(t, f), r| (t + 1, f + usize::from(!r.correct)));
    (total > 0).then(|| 100.0 * failed as f64 / total as f64)
}

/// Known difficult: at least three annotations and crackers right less than
/// half of the time.
pub fn classify_pair_difficulty<'a, I>(records: I) -> PairDifficulty
where
    I: IntoIterator<Item = &'a AnnotationRecord>,
{
    let (total, correct) = records
        .into_iter()
        .fold((0usize, 0usize), |(t, c), r| (t + 1, c + usize::from(r.correct)));
    difficulty_from_counts(total, correct)
}

pub fn difficulty_from_counts(total: usize, correct: usize) -> PairDifficulty {
    if total >= DIFFICULTY_MIN_ANNOTATIONS && 2 * correct < total {
        PairDifficulty::KnownDifficult
    } else {
        PairDifficulty::Normal
    }
}

/// Both scores of one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerScores {
    pub player_id: PlayerId,
    pub cracker_points: f64,
    pub blanker_annotation_count: usize,
    pub blanker_failures: usize,
}

impl PlayerScores {
    pub fn new(player_id: PlayerId) -> Self {
        PlayerScores {
            player_id,
            cracker_points: 0.0,
            blanker_annotation_count: 0,
            blanker_failures: 0,
        }
    }

    pub fn blanker_success_rate(&self) -> Option<f64> {
        (self.blanker_annotation_count > 0)
            .then(|| 100.0 * self.blanker_failures as f64 / self.blanker_annotation_count as f64)
    }

    pub fn add_cracker_points(&mut self, points: f64) {
        self.cracker_points += points;
    }

    /// Record a cracker judgment on one of this player's proposed pairs.
    pub fn add_blanker_outcome(&mut self, cracker_correct: bool) {
        self.blanker_annotation_count += 1;
        if !cracker_correct {
            self.blanker_failures += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(correct: bool) -> AnnotationRecord {
        AnnotationRecord {
            id: AnnotationId(1),
            riddle_id: RiddleId(1),
            player_id: PlayerId(1),
            pair_id: PairId(1),
            language: Language::En,
            pair_origin: PairOrigin::UserProposed,
            choice: "x".into(),
            correct,
            elapsed_ms: 1000,
            k: 5,
            points: if correct { 0.5 } else { 0.0 },
            created_at: 0,
        }
    }

    fn records(correct: usize, total: usize) -> Vec<AnnotationRecord> {
        (0..total).map(|i| record(i < correct)).collect()
    }

    #[test]
    fn table_extremes() {
        use PairDifficulty::*;
        assert_eq!(score_annotation(true, 90_000, 1, KnownDifficult), Ok(3.0));
        assert_eq!(score_annotation(true, 300_000, 5, Normal), Ok(0.1));
        assert_eq!(score_annotation(false, 10, 1, KnownDifficult), Ok(0.0));
        assert_eq!(score_annotation(true, 179_999, 3, Normal), Ok(1.0));
        assert_eq!(score_annotation(true, 180_000, 3, Normal), Ok(0.2));
    }

    #[test]
    fn table_errors() {
        assert_eq!(
            score_annotation(true, -1, 5, PairDifficulty::Normal),
            Err(ScoringError::NegativeElapsed(-1))
        );
        assert_eq!(
            score_annotation(false, 0, 4, PairDifficulty::Normal),
            Err(ScoringError::InvalidK(4))
        );
    }

    #[test]
    fn blanker_rates() {
        let rate = blanker_rate(&records(2, 6)).unwrap();
        assert!((rate - 66.7).abs() < 0.05, "{rate}");
        assert_eq!(blanker_rate(&records(4, 4)), Some(0.0));
        assert_eq!(blanker_rate(&[]), None);
    }

    #[test]
    fn difficulty_rule() {
        assert_eq!(classify_pair_difficulty(&records(2, 6)), PairDifficulty::KnownDifficult);
        assert_eq!(classify_pair_difficulty(&records(0, 2)), PairDifficulty::Normal);
        assert_eq!(classify_pair_difficulty(&records(9, 10)), PairDifficulty::Normal);
        // exactly half is not below half
        assert_eq!(classify_pair_difficulty(&records(2, 4)), PairDifficulty::Normal);
    }

    #[test]
    fn player_scores() {
        let mut s = PlayerScores::new(PlayerId(4));
        assert_eq!(s.blanker_success_rate(), None);
        s.add_blanker_outcome(true);
        s.add_blanker_outcome(false);
        assert_eq!(s.blanker_success_rate(), Some(50.0));
        s.add_cracker_points(1.5);
        assert_eq!(s.cracker_points, 1.5);
    }

    #[test]
    fn record_validation() {
        assert!(record(true).validate().is_ok());
        let mut r = record(false);
        r.points = 1.0;
        assert!(r.validate().is_err());
        let mut r = record(true);
        r.k = 2;
        assert!(r.validate().is_err());
    }
}
