//! Game state as a fold over journal events.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use blankcrack_core::scoring::{difficulty_from_counts, AnnotationRecord, PairDifficulty};
use blankcrack_core::{
    IdSequence, Language, PairId, PairOrigin, PlayerId, PlayerScores, Riddle, RiddleId, Scheduler,
    WordPair,
};
use serde::{Deserialize, Serialize};

use crate::auth::PasswordHash;
use crate::journal::Event;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Player {
    pub id: PlayerId,
    pub username: String,
    pub password: PasswordHash,
    pub language: Language,
    pub k_setting: usize,
    /// Directional: `a` lists `b` as a friend.
    pub friends: BTreeSet<PlayerId>,
    pub created_at: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PendingRiddle {
    pub riddle: Riddle,
    pub player_id: PlayerId,
    pub served_at: i64,
    pub expires_at: i64,
    pub difficulty: PairDifficulty,
    pub session_id: Option<SessionId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTally {
    pub total: usize,
    pub correct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningTotals {
    pub cracker_points: f64,
    pub annotations: usize,
    pub blanker_success_rate_percent: Option<f64>,
    pub session_points: Option<f64>,
}

/// Result of a committed answer, returned verbatim on resubmission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub riddle_id: RiddleId,
    pub correct: bool,
    pub answer: String,
    pub points: f64,
    pub elapsed_ms: i64,
    pub running_totals: RunningTotals,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Open,
    Running,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetitionSession {
    pub id: SessionId,
    pub creator: PlayerId,
    pub participants: Vec<PlayerId>,
    pub language: Language,
    pub riddle_count: usize,
    pub state: SessionState,
    pub points: BTreeMap<PlayerId, f64>,
    pub served: BTreeMap<PlayerId, usize>,
    pub answered: BTreeMap<PlayerId, usize>,
    pub created_at: i64,
    pub closed_at: Option<i64>,
}

impl CompetitionSession {
    pub fn is_participant(&self, player: PlayerId) -> bool {
        self.participants.contains(&player)
    }

    fn everyone_done(&self) -> bool {
        self.participants
            .iter()
            .all(|p| self.answered.get(p).copied().unwrap_or(0) >= self.riddle_count)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("inconsistent event: {0}")]
pub struct StateError(pub String);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdCounters {
    pub players: IdSequence,
    pub pairs: IdSequence,
    pub riddles: IdSequence,
    pub annotations: IdSequence,
    pub sessions: IdSequence,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GameState {
    pub players: BTreeMap<PlayerId, Player>,
    pub usernames: HashMap<String, PlayerId>,
    pub pairs: BTreeMap<PairId, WordPair>,
    pub pair_keys: HashMap<(Language, String, String), PairId>,
    pub tallies: HashMap<PairId, PairTally>,
    pub pending: HashMap<RiddleId, PendingRiddle>,
    pub answered: HashMap<RiddleId, (PlayerId, AnswerResponse)>,
    pub records: Vec<AnnotationRecord>,
    pub scores: BTreeMap<PlayerId, PlayerScores>,
    pub language_points: BTreeMap<(PlayerId, Language), f64>,
    pub annotation_counts: HashMap<PlayerId, usize>,
    pub scheduler: Scheduler,
    pub sessions: BTreeMap<SessionId, CompetitionSession>,
    pub ids: IdCounters,
}

/// Order-free key identifying a pair within a language.
pub fn pair_key(language: Language, a: &str, b: &str) -> (Language, String, String) {
    if a <= b {
        (language, a.to_string(), b.to_string())
    } else {
        (language, b.to_string(), a.to_string())
    }
}

pub fn username_key(username: &str) -> String {
    username.trim().to_lowercase()
}

impl GameState {
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a Event>) -> Result<Self, StateError> {
        let mut state = GameState::default();
        for event in events {
            state.apply(event)?;
        }
        Ok(state)
    }

    pub fn difficulty(&self, pair: PairId) -> PairDifficulty {
        let t = self.tallies.get(&pair).copied().unwrap_or_default();
        difficulty_from_counts(t.total, t.correct)
    }

    pub fn mutual_friends(&self, a: PlayerId, b: PlayerId) -> bool {
        let lists = |x: PlayerId, y: PlayerId| {
            self.players
                .get(&x)
                .is_some_and(|p| p.friends.contains(&y))
        };
        lists(a, b) && lists(b, a)
    }

    fn player_mut(&mut self, id: PlayerId) -> Result<&mut Player, StateError> {
        self.players
            .get_mut(&id)
            .ok_or_else(|| StateError(format!("unknown player {id}")))
    }

    pub fn apply(&mut self, event: &Event) -> Result<(), StateError> {
        match event {
            Event::PlayerRegistered {
                player_id,
                username,
                password,
                language,
                k_setting,
                created_at,
            } => {
                let key = username_key(username);
                if self.usernames.contains_key(&key) || self.players.contains_key(player_id) {
                    return Err(StateError(format!("player {username} registered twice")));
                }
                self.ids.players.observe(player_id.0);
                self.usernames.insert(key, *player_id);
                self.scores.insert(*player_id, PlayerScores::new(*player_id));
                self.players.insert(
                    *player_id,
                    Player {
                        id: *player_id,
                        username: username.clone(),
                        password: password.clone(),
                        language: *language,
                        k_setting: *k_setting,
                        friends: BTreeSet::new(),
                        created_at: *created_at,
                    },
                );
            }
            Event::SettingsChanged {
                player_id,
                k_setting,
                language,
            } => {
                let p = self.player_mut(*player_id)?;
                if let Some(k) = k_setting {
                    p.k_setting = *k;
                }
                if let Some(l) = language {
                    p.language = *l;
                }
            }
            Event::FriendAdded {
                player_id,
                friend_id,
            } => {
                if !self.players.contains_key(friend_id) {
                    return Err(StateError(format!("unknown player {friend_id}")));
                }
                self.player_mut(*player_id)?.friends.insert(*friend_id);
            }
            Event::PairAdded { pair } => {
                let key = pair_key(pair.language, &pair.word_a, &pair.word_b);
                if self.pairs.contains_key(&pair.id) || self.pair_keys.contains_key(&key) {
                    return Err(StateError(format!("pair {} added twice", pair.id)));
                }
                self.ids.pairs.observe(pair.id.0);
                self.pair_keys.insert(key, pair.id);
                self.scheduler.add_pair(pair);
                self.pairs.insert(pair.id, pair.clone());
            }
            Event::PairStateChanged { pair_id, state } => {
                let pair = self
                    .pairs
                    .get_mut(pair_id)
                    .ok_or_else(|| StateError(format!("unknown pair {pair_id}")))?;
                pair.state = *state;
                self.scheduler
                    .set_state(*pair_id, *state)
                    .map_err(|e| StateError(e.to_string()))?;
            }
            Event::RiddleServed {
                riddle,
                player_id,
                served_at,
                expires_at,
                difficulty,
                session_id,
            } => {
                if self.pending.contains_key(&riddle.id) || self.answered.contains_key(&riddle.id) {
                    return Err(StateError(format!("riddle {} served twice", riddle.id)));
                }
                self.ids.riddles.observe(riddle.id.0);
                self.scheduler
                    .lease(riddle.pair_id, *player_id, *expires_at)
                    .map_err(|e| StateError(e.to_string()))?;
                if let Some(sid) = session_id {
                    let session = self
                        .sessions
                        .get_mut(sid)
                        .ok_or_else(|| StateError(format!("unknown session {sid}")))?;
                    *session.served.entry(*player_id).or_default() += 1;
                    if session.state == SessionState::Open {
                        session.state = SessionState::Running;
                    }
                }
                self.pending.insert(
                    riddle.id,
                    PendingRiddle {
                        riddle: riddle.clone(),
                        player_id: *player_id,
                        served_at: *served_at,
                        expires_at: *expires_at,
                        difficulty: *difficulty,
                        session_id: *session_id,
                    },
                );
            }
            Event::AnnotationCommitted { record, session_id } => {
                self.commit(record, *session_id)?;
            }
            Event::SessionCreated { session } => {
                if self.sessions.contains_key(&session.id) {
                    return Err(StateError(format!("session {} created twice", session.id)));
                }
                self.ids.sessions.observe(session.id.0);
                self.sessions.insert(session.id, session.clone());
            }
            Event::SessionClosed {
                session_id,
                closed_at,
            } => {
                let session = self
                    .sessions
                    .get_mut(session_id)
                    .ok_or_else(|| StateError(format!("unknown session {session_id}")))?;
                if session.state != SessionState::Finished {
                    session.state = SessionState::Finished;
                    session.closed_at = Some(*closed_at);
                }
            }
        }
        Ok(())
    }

    fn commit(
        &mut self,
        record: &AnnotationRecord,
        session_id: Option<SessionId>,
    ) -> Result<(), StateError> {
        if self.answered.contains_key(&record.riddle_id) {
            return Err(StateError(format!("riddle {} answered twice", record.riddle_id)));
        }
        let pending = self
            .pending
            .remove(&record.riddle_id)
            .ok_or_else(|| StateError(format!("riddle {} was never served", record.riddle_id)))?;
        self.ids.annotations.observe(record.id.0);

        let tally = self.tallies.entry(record.pair_id).or_default();
        tally.total += 1;
        tally.correct += usize::from(record.correct);
        let new_count = tally.total;
        self.scheduler
            .on_annotation_committed(record.pair_id, record.player_id, new_count)
            .map_err(|e| StateError(e.to_string()))?;

        self.scores
            .get_mut(&record.player_id)
            .ok_or_else(|| StateError(format!("unknown player {}", record.player_id)))?
            .add_cracker_points(record.points);
        *self
            .language_points
            .entry((record.player_id, record.language))
            .or_default() += record.points;
        let proposer = self.pairs.get(&record.pair_id).and_then(|p| {
            (p.origin == PairOrigin::UserProposed).then_some(p.proposer).flatten()
        });
        if let Some(proposer) = proposer {
            if let Some(s) = self.scores.get_mut(&proposer) {
                s.add_blanker_outcome(record.correct);
            }
        }

        let mut session_points = None;
        if let Some(sid) = session_id {
            let session = self
                .sessions
                .get_mut(&sid)
                .ok_or_else(|| StateError(format!("unknown session {sid}")))?;
            if session.state != SessionState::Finished {
                let pts = session.points.entry(record.player_id).or_default();
                *pts += record.points;
                session_points = Some(*pts);
                *session.answered.entry(record.player_id).or_default() += 1;
                if session.everyone_done() {
                    session.state = SessionState::Finished;
                    session.closed_at = Some(record.created_at);
                }
            }
        }

        let scores = &self.scores[&record.player_id];
        let annotations = {
            let n = self.annotation_counts.entry(record.player_id).or_default();
            *n += 1;
            *n
        };
        let response = AnswerResponse {
            riddle_id: record.riddle_id,
            correct: record.correct,
            answer: pending.riddle.target.clone(),
            points: record.points,
            elapsed_ms: record.elapsed_ms,
            running_totals: RunningTotals {
                cracker_points: scores.cracker_points,
                annotations,
                blanker_success_rate_percent: scores.blanker_success_rate(),
                session_points,
            },
        };
        self.answered
            .insert(record.riddle_id, (record.player_id, response));
        self.records.push(record.clone());
        Ok(())
    }
}
