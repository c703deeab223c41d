//! Annotation items: a word pair with target/foil roles and `k` blanked
//! sentences that contain the target and no variant of the foil.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{sample_sentences, token_spans, CorpusIndex, EligibilityOptions, Sentence};
use crate::ids::{PairId, RiddleId, SentenceId};
use crate::lang::Language;
use crate::pairgen::{PairState, WordPair};

/// Marker replacing every occurrence of the target.
pub const BLANK: &str = "___";
pub const DEFAULT_K: usize = 5;
pub const ALLOWED_K: [usize; 3] = [1, 3, 5];

pub fn is_valid_k(k: usize) -> bool {
    ALLOWED_K.contains(&k)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RiddleError {
    #[error("k must be one of 1, 3, 5 (got {0})")]
    InvalidK(usize),
    #[error("pair #{0} is not active")]
    PairNotActive(PairId),
    #[error("pair #{pair_id} has too few usable sentences in either role (best {best}, need {needed})")]
    NoRiddle {
        pair_id: PairId,
        best: usize,
        needed: usize,
    },
    #[error("internal invariant violated: target `{target}` absent from sentence {sentence}")]
    TargetAbsent { target: String, sentence: SentenceId },
}

/// A served riddle, including its answer key. Only [`RiddlePayload`] ever
/// leaves the server.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Riddle {
    pub id: RiddleId,
    pub pair_id: PairId,
    pub language: Language,
    pub target: String,
    pub foil: String,
    pub k: usize,
    pub sentence_ids: Vec<SentenceId>,
    pub display_sentences: Vec<String>,
    pub option_order: [String; 2],
    /// The coin flip picked the other word first but it lacked sentences.
    pub roles_swapped: bool,
    pub created_at: i64,
}

/// Client view of a riddle. Carries no field identifying the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiddlePayload {
    pub riddle_id: RiddleId,
    pub k: usize,
    pub sentences: Vec<String>,
    pub options: [String; 2],
}

impl Riddle {
    pub fn payload(&self) -> RiddlePayload {
        RiddlePayload {
            riddle_id: self.id,
            k: self.k,
            sentences: self.display_sentences.clone(),
            options: self.option_order.clone(),
        }
    }

    pub fn is_option(&self, choice: &str) -> bool {
        self.option_order.iter().any(|o| o == choice)
    }

    pub fn is_correct(&self, choice: &str) -> bool {
        choice == self.target
    }
}

/// Replace every token equal to `target` by [`BLANK`], keeping the rest of
/// the sentence byte-for-byte.
pub fn blank(sentence: &Sentence, target: &str) -> Result<String, RiddleError> {
    let text = &sentence.raw_text;
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    let mut hits = 0;
    for span in token_spans(text, sentence.language) {
        if span.text == target {
            out.push_str(&text[cursor..span.start]);
            out.push_str(BLANK);
            cursor = span.end;
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(RiddleError::TargetAbsent {
            target: target.to_string(),
            sentence: sentence.id,
        });
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}

/// Build a riddle for `pair`. Roles are assigned by a fair coin; if the
/// chosen target lacks `k` eligible sentences the roles are swapped once.
/// On [`RiddleError::NoRiddle`] the caller is expected to defer the pair.
pub fn build_riddle<R: Rng + ?Sized>(
    pair: &WordPair,
    k: usize,
    index: &CorpusIndex,
    rng: &mut R,
    id: RiddleId,
    created_at: i64,
    options: EligibilityOptions,
) -> Result<Riddle, RiddleError> {
    if !is_valid_k(k) {
        return Err(RiddleError::InvalidK(k));
    }
    if pair.state != PairState::Active {
        return Err(RiddleError::PairNotActive(pair.id));
    }

    let a_first = rng.gen_bool(0.5);
    let roles = if a_first {
        [(&pair.word_a, &pair.word_b), (&pair.word_b, &pair.word_a)]
    } else {
        [(&pair.word_b, &pair.word_a), (&pair.word_a, &pair.word_b)]
    };

    let mut best = 0;
    for (attempt, (target, foil)) in roles.into_iter().enumerate() {
        let eligible = index.eligible_sentences_with(target, foil, options);
        best = best.max(eligible.len());
        let Ok(sentence_ids) = sample_sentences(&eligible, k, rng) else {
            continue;
        };
        let display_sentences = sentence_ids
            .iter()
            .map(|&sid| {
                let sentence = index.sentence(sid).expect("eligible ids come from the index");
                blank(sentence, target)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let option_order = if rng.gen_bool(0.5) {
            [target.clone(), foil.clone()]
        } else {
            [foil.clone(), target.clone()]
        };
        return Ok(Riddle {
            id,
            pair_id: pair.id,
            language: index.language(),
            target: target.clone(),
            foil: foil.clone(),
            k,
            sentence_ids,
            display_sentences,
            option_order,
            roles_swapped: attempt == 1,
            created_at,
        });
    }
    Err(RiddleError::NoRiddle {
        pair_id: pair.id,
        best,
        needed: k,
    })
}
