//! The game engine: every operation validates against the current state,
//! journals one event and applies it.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use blankcrack_core::corpus::{normalize, read_snapshot, CorpusBuilder, EligibilityOptions};
use blankcrack_core::pairgen::{check_pair, manual_series_pairs, parse_series, PairRejection};
use blankcrack_core::riddle::{is_valid_k, ALLOWED_K};
use blankcrack_core::scoring::AnnotationRecord;
use blankcrack_core::stats::{breakdown_records, histogram, overall_success, BreakdownReport};
use blankcrack_core::{
    build_riddle, write_log, AnnotationId, CorpusIndex, IdSequence, Language, PairId, PairOrigin,
    PairState, PlayerId, PointTable, RiddleError, RiddleId, RiddlePayload, SchedulerError, WordPair,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::auth::{new_token, PasswordHash};
use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::journal::{Event, Journal};
use crate::state::{
    pair_key, username_key, AnswerResponse, CompetitionSession, GameState, SessionId,
    SessionState,
};

pub const MAX_SESSION_RIDDLES: usize = 100;
const SERVE_ATTEMPTS: usize = 16;

/// Most sentences any riddle can ask for; pairs must support this many.
pub fn required_contexts() -> usize {
    ALLOWED_K.into_iter().max().unwrap_or(1)
}

/// Eligible sentences for the better of the two role assignments.
pub fn context_support(corpus: &CorpusIndex, a: &str, b: &str) -> usize {
    corpus
        .eligible_sentences(a, b)
        .len()
        .max(corpus.eligible_sentences(b, a).len())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServedRiddle {
    #[serde(flatten)]
    pub payload: RiddlePayload,
    pub served_at: i64,
    pub expires_at: i64,
    pub session_id: Option<SessionId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileView {
    pub username: String,
    pub language: Language,
    pub k_setting: usize,
    pub created_at: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FriendView {
    pub username: String,
    pub mutual: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProposalView {
    pub pair_id: PairId,
    pub language: Language,
    pub word_a: String,
    pub word_b: String,
    pub state: PairState,
    pub annotations: usize,
    /// Only once the pair has enough annotations to be meaningful.
    pub success_rate_percent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoresView {
    pub username: String,
    pub language: Language,
    pub cracker_points: f64,
    pub annotations: usize,
    pub blanker_annotation_count: usize,
    pub blanker_success_rate_percent: Option<f64>,
    pub points_by_language: BTreeMap<Language, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub username: String,
    pub language: Language,
    pub cracker_points: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Standing {
    pub username: String,
    pub points: f64,
    pub answered: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: SessionId,
    pub language: Language,
    pub riddle_count: usize,
    pub state: SessionState,
    pub standings: Vec<Standing>,
    /// Plain-text summary to share, once the session is finished.
    pub share_text: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsSummary {
    pub annotations: usize,
    pub overall_success_percent: Option<f64>,
    pub distinct_pairs: usize,
    pub breakdown: BreakdownReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramView {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub min_annotations: usize,
    pub distinct_pairs: usize,
    pub included_count: usize,
    pub excluded_count: usize,
    pub mean_annotations_per_pair: Option<f64>,
    pub mean_annotations_per_included_pair: Option<f64>,
    pub pairs_at_least_90_percent: usize,
    pub pairs_at_least_80_percent: usize,
}

struct Inner {
    state: GameState,
    journal: Journal,
    rng: ChaCha8Rng,
    events: usize,
}

impl Inner {
    fn commit(&mut self, event: Event) -> Result<(), ServiceError> {
        self.journal.append(&event)?;
        self.state.apply(&event)?;
        self.events += 1;
        Ok(())
    }
}

pub struct Game {
    config: ServiceConfig,
    corpora: HashMap<Language, Arc<CorpusIndex>>,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
    tokens: RwLock<HashMap<String, PlayerId>>,
}

/// Build or load the corpus of every configured language.
pub fn load_corpora(
    config: &ServiceConfig,
) -> Result<HashMap<Language, Arc<CorpusIndex>>, ServiceError> {
    let mut out = HashMap::new();
    for lang in &config.languages {
        let index = if let Some(path) = &lang.snapshot {
            let file = std::fs::File::open(path).map_err(|source| {
                blankcrack_core::CorpusError::Io {
                    path: path.clone(),
                    source,
                }
            })?;
            read_snapshot(BufReader::new(file))?
        } else {
            let mut builder = CorpusBuilder::new(lang.code);
            for file in &lang.corpus {
                builder.ingest_files(std::slice::from_ref(&file.path), file.genre)?;
            }
            builder.build()
        };
        tracing::info!(language = %lang.code, sentences = index.len(), "corpus ready");
        out.insert(lang.code, Arc::new(index));
    }
    Ok(out)
}

impl Game {
    /// Start from the configured journal (or an empty in-memory one),
    /// replaying whatever it holds.
    pub fn open(
        config: ServiceConfig,
        corpora: HashMap<Language, Arc<CorpusIndex>>,
        clock: Arc<dyn Clock>,
    ) -> Result<Game, ServiceError> {
        let (journal, events) = match &config.journal {
            Some(path) => Journal::open(path, config.fsync)?,
            None => (Journal::in_memory(), Vec::new()),
        };
        Self::from_events(config, corpora, clock, journal, &events)
    }

    pub fn from_events(
        config: ServiceConfig,
        corpora: HashMap<Language, Arc<CorpusIndex>>,
        clock: Arc<dyn Clock>,
        journal: Journal,
        events: &[Event],
    ) -> Result<Game, ServiceError> {
        let state = GameState::replay(events)?;
        let rng = match config.seed {
            Some(seed) => ChaCha8Rng::seed_from_u64(seed),
            None => ChaCha8Rng::from_entropy(),
        };
        Ok(Game {
            config,
            corpora,
            clock,
            inner: Mutex::new(Inner {
                state,
                journal,
                rng,
                events: events.len(),
            }),
            tokens: RwLock::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn corpus(&self, language: Language) -> Option<&Arc<CorpusIndex>> {
        self.corpora.get(&language)
    }

    pub fn now(&self) -> i64 {
        self.clock.now_ms()
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Events in the journal, replayed ones included.
    pub fn event_count(&self) -> usize {
        self.lock().events
    }

    /// Read-only access to the current state.
    pub fn with_state<R>(&self, f: impl FnOnce(&GameState) -> R) -> R {
        f(&self.lock().state)
    }

    /// Add manual series pairs and mined pairs for languages that have no
    /// system pairs yet. Returns the number of pairs added.
    pub fn seed_pairs(&self) -> Result<usize, ServiceError> {
        let now = self.now();
        let mut inner = self.lock();
        let mut added = 0;
        for lang in &self.config.languages {
            let Some(corpus) = self.corpora.get(&lang.code) else {
                continue;
            };
            let seeded = inner
                .state
                .pairs
                .values()
                .any(|p| p.language == lang.code && p.origin != PairOrigin::UserProposed);
            if seeded {
                continue;
            }
            let mut candidates: Vec<WordPair> = Vec::new();
            if let Some(path) = &lang.series {
                let text = read_text(path)?;
                let series = parse_series(&text)
                    .map_err(|e| ServiceError::InvalidInput(format!("{}: {e}", path.display())))?;
                let scratch = IdSequence::default();
                candidates.extend(manual_series_pairs(&series, corpus, &scratch, now).pairs);
            }
            if let Some(path) = &lang.pairs {
                for (i, line) in read_text(path)?.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let pair: WordPair = serde_json::from_str(line).map_err(|e| {
                        ServiceError::InvalidInput(format!("{}:{}: {e}", path.display(), i + 1))
                    })?;
                    if pair.language == lang.code
                        && check_pair(&pair.word_a, &pair.word_b, corpus).is_empty()
                    {
                        candidates.push(pair);
                    }
                }
            }
            for mut pair in candidates {
                let key = pair_key(lang.code, &pair.word_a, &pair.word_b);
                if inner.state.pair_keys.contains_key(&key)
                    || context_support(corpus, &pair.word_a, &pair.word_b) < required_contexts()
                {
                    continue;
                }
                pair.id = PairId(inner.state.ids.pairs.peek());
                pair.created_at = now;
                pair.state = PairState::Active;
                pair.proposer = None;
                inner.commit(Event::PairAdded { pair })?;
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn register(
        &self,
        username: &str,
        password: &str,
        language: Language,
    ) -> Result<PlayerId, ServiceError> {
        let username = username.trim();
        let valid_name = (3..=32).contains(&username.chars().count())
            && username
                .chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
        if !valid_name {
            return Err(ServiceError::InvalidInput(
                "username must be 3-32 letters, digits, `_`, `-` or `.`".into(),
            ));
        }
        if password.chars().count() < 4 {
            return Err(ServiceError::InvalidInput(
                "password must have at least 4 characters".into(),
            ));
        }
        let hash = PasswordHash::new(password, self.config.password_rounds);
        let now = self.now();
        let mut inner = self.lock();
        if inner.state.usernames.contains_key(&username_key(username)) {
            return Err(ServiceError::UsernameTaken(username.to_string()));
        }
        let player_id = PlayerId(inner.state.ids.players.peek());
        inner.commit(Event::PlayerRegistered {
            player_id,
            username: username.to_string(),
            password: hash,
            language,
            k_setting: self.config.default_k,
            created_at: now,
        })?;
        Ok(player_id)
    }

    pub fn login(&self, username: &str, password: &str) -> Result<String, ServiceError> {
        let stored = {
            let inner = self.lock();
            let id = inner
                .state
                .usernames
                .get(&username_key(username))
                .copied()
                .ok_or(ServiceError::InvalidCredentials)?;
            (id, inner.state.players[&id].password.clone())
        };
        if !stored.1.verify(password) {
            return Err(ServiceError::InvalidCredentials);
        }
        let token = new_token();
        self.tokens
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(token.clone(), stored.0);
        Ok(token)
    }

    pub fn authenticate(&self, token: &str) -> Result<PlayerId, ServiceError> {
        self.tokens
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(token)
            .copied()
            .ok_or(ServiceError::Unauthorized)
    }

    pub fn profile(&self, player: PlayerId) -> Result<ProfileView, ServiceError> {
        let inner = self.lock();
        let p = inner
            .state
            .players
            .get(&player)
            .ok_or(ServiceError::Unauthorized)?;
        Ok(ProfileView {
            username: p.username.clone(),
            language: p.language,
            k_setting: p.k_setting,
            created_at: p.created_at,
        })
    }

    pub fn update_settings(
        &self,
        player: PlayerId,
        k_setting: Option<usize>,
        language: Option<Language>,
    ) -> Result<ProfileView, ServiceError> {
        if let Some(k) = k_setting {
            if !is_valid_k(k) {
                return Err(ServiceError::InvalidInput(format!(
                    "k_setting must be 1, 3 or 5 (got {k})"
                )));
            }
        }
        if k_setting.is_some() || language.is_some() {
            self.lock().commit(Event::SettingsChanged {
                player_id: player,
                k_setting,
                language,
            })?;
        }
        self.profile(player)
    }

    pub fn add_friend(&self, player: PlayerId, username: &str) -> Result<FriendView, ServiceError> {
        let mut inner = self.lock();
        let friend = inner
            .state
            .usernames
            .get(&username_key(username))
            .copied()
            .ok_or_else(|| ServiceError::NotFound(format!("no player named `{username}`")))?;
        if friend == player {
            return Err(ServiceError::InvalidInput("cannot befriend yourself".into()));
        }
        if !inner.state.players[&player].friends.contains(&friend) {
            inner.commit(Event::FriendAdded {
                player_id: player,
                friend_id: friend,
            })?;
        }
        Ok(FriendView {
            username: inner.state.players[&friend].username.clone(),
            mutual: inner.state.mutual_friends(player, friend),
        })
    }

    pub fn friends(&self, player: PlayerId) -> Vec<FriendView> {
        let inner = self.lock();
        let s = &inner.state;
        s.players
            .get(&player)
            .map(|p| {
                p.friends
                    .iter()
                    .map(|f| FriendView {
                        username: s.players[f].username.clone(),
                        mutual: s.mutual_friends(player, *f),
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn propose_pair(
        &self,
        player: PlayerId,
        language: Language,
        word_a: &str,
        word_b: &str,
    ) -> Result<WordPair, ServiceError> {
        let corpus = self
            .corpora
            .get(&language)
            .ok_or(ServiceError::LanguageNotLoaded(language))?;
        let clean = |w: &str| normalize(w.trim()).to_lowercase();
        let (a, b) = (clean(word_a), clean(word_b));
        let mut reasons = check_pair(&a, &b, corpus);
        if reasons.is_empty() {
            let best = context_support(corpus, &a, &b);
            if best < required_contexts() {
                reasons.push(PairRejection::InsufficientContexts {
                    best,
                    required: required_contexts(),
                });
            }
        }
        let now = self.now();
        let mut inner = self.lock();
        if let Some(existing) = inner.state.pair_keys.get(&pair_key(language, &a, &b)) {
            reasons.push(PairRejection::AlreadyExists { pair_id: *existing });
        }
        if !reasons.is_empty() {
            return Err(ServiceError::PairRejected(reasons));
        }
        let pair = WordPair {
            id: PairId(inner.state.ids.pairs.peek()),
            language,
            word_a: a,
            word_b: b,
            origin: PairOrigin::UserProposed,
            proposer: Some(player),
            state: PairState::Active,
            created_at: now,
        };
        inner.commit(Event::PairAdded { pair: pair.clone() })?;
        Ok(pair)
    }

    pub fn my_pairs(&self, player: PlayerId) -> Vec<ProposalView> {
        let inner = self.lock();
        let s = &inner.state;
        s.pairs
            .values()
            .filter(|p| p.proposer == Some(player))
            .map(|p| {
                let t = s.tallies.get(&p.id).copied().unwrap_or_default();
                ProposalView {
                    pair_id: p.id,
                    language: p.language,
                    word_a: p.word_a.clone(),
                    word_b: p.word_b.clone(),
                    state: p.state,
                    annotations: t.total,
                    success_rate_percent: (t.total >= self.config.min_annotations)
                        .then(|| 100.0 * t.correct as f64 / t.total as f64),
                }
            })
            .collect()
    }

    /// Pick a pair for `player`, build a riddle at their k and record it as
    /// pending. Pairs that cannot supply k sentences are deferred.
    pub fn serve_riddle(
        &self,
        player: PlayerId,
        language: Option<Language>,
        session: Option<SessionId>,
    ) -> Result<ServedRiddle, ServiceError> {
        let now = self.now();
        let mut inner = self.lock();
        let p = inner
            .state
            .players
            .get(&player)
            .ok_or(ServiceError::Unauthorized)?;
        let k = p.k_setting;
        let mut language = language.unwrap_or(p.language);
        if let Some(sid) = session {
            let s = inner
                .state
                .sessions
                .get(&sid)
                .filter(|s| s.is_participant(player))
                .ok_or_else(|| ServiceError::NotFound(format!("no competition {sid}")))?;
            if s.state == SessionState::Finished {
                return Err(ServiceError::Forbidden("competition is finished".into()));
            }
            if s.served.get(&player).copied().unwrap_or(0) >= s.riddle_count {
                return Err(ServiceError::Forbidden(
                    "all riddles of this competition were served".into(),
                ));
            }
            language = s.language;
        }
        let corpus = self
            .corpora
            .get(&language)
            .ok_or(ServiceError::LanguageNotLoaded(language))?
            .clone();

        for _ in 0..SERVE_ATTEMPTS {
            let Inner { state, rng, .. } = &mut *inner;
            let pair_id = match state.scheduler.choose(language, player, now, rng) {
                Ok((id, _)) => id,
                Err(SchedulerError::Empty(_)) => return Err(ServiceError::NoRiddles(language)),
                Err(e) => return Err(ServiceError::InvalidInput(e.to_string())),
            };
            let pair = state.pairs[&pair_id].clone();
            let riddle_id = RiddleId(state.ids.riddles.peek());
            match build_riddle(&pair, k, &corpus, rng, riddle_id, now, EligibilityOptions::default()) {
                Ok(riddle) => {
                    let payload = riddle.payload();
                    let expires_at = now + self.config.riddle_ttl_ms();
                    let difficulty = state.difficulty(pair_id);
                    inner.commit(Event::RiddleServed {
                        riddle,
                        player_id: player,
                        served_at: now,
                        expires_at,
                        difficulty,
                        session_id: session,
                    })?;
                    return Ok(ServedRiddle {
                        payload,
                        served_at: now,
                        expires_at,
                        session_id: session,
                    });
                }
                Err(RiddleError::NoRiddle { best, needed, .. }) => {
                    tracing::info!(%pair_id, best, needed, "deferring pair without enough sentences");
                    inner.commit(Event::PairStateChanged {
                        pair_id,
                        state: PairState::Deferred,
                    })?;
                }
                Err(e) => return Err(ServiceError::InvalidInput(e.to_string())),
            }
        }
        Err(ServiceError::NoRiddles(language))
    }

    /// Score an answer and commit it as one event. A second submission for
    /// the same riddle returns the first result as [`ServiceError::Duplicate`].
    pub fn submit_answer(
        &self,
        player: PlayerId,
        riddle_id: RiddleId,
        choice: &str,
    ) -> Result<AnswerResponse, ServiceError> {
        let now = self.now();
        let mut inner = self.lock();
        let not_found = || ServiceError::NotFound(format!("no pending riddle {riddle_id}"));
        if let Some((owner, response)) = inner.state.answered.get(&riddle_id) {
            if *owner == player {
                return Err(ServiceError::Duplicate(Box::new(response.clone())));
            }
            return Err(not_found());
        }
        let pending = inner
            .state
            .pending
            .get(&riddle_id)
            .filter(|p| p.player_id == player)
            .ok_or_else(not_found)?;
        if now >= pending.expires_at {
            return Err(ServiceError::NotFound(format!("riddle {riddle_id} expired")));
        }
        let riddle = &pending.riddle;
        if !riddle.is_option(choice) {
            return Err(ServiceError::InvalidInput(format!(
                "choice must be `{}` or `{}`",
                riddle.option_order[0], riddle.option_order[1]
            )));
        }
        let correct = riddle.is_correct(choice);
        let elapsed_ms = (now - pending.served_at).max(0);
        let table = PointTable {
            time_threshold_ms: self.config.time_threshold_ms(),
        };
        let points = table
            .score(correct, elapsed_ms, riddle.k, pending.difficulty)
            .map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        let origin = inner.state.pairs[&riddle.pair_id].origin;
        let record = AnnotationRecord {
            id: AnnotationId(inner.state.ids.annotations.peek()),
            riddle_id,
            player_id: player,
            pair_id: riddle.pair_id,
            language: riddle.language,
            pair_origin: origin,
            choice: choice.to_string(),
            correct,
            elapsed_ms,
            k: riddle.k,
            points,
            created_at: now,
        };
        let session_id = pending.session_id;
        inner.commit(Event::AnnotationCommitted { record, session_id })?;
        Ok(inner.state.answered[&riddle_id].1.clone())
    }

    pub fn scores(&self, player: PlayerId) -> Result<ScoresView, ServiceError> {
        let inner = self.lock();
        let s = &inner.state;
        let p = s.players.get(&player).ok_or(ServiceError::Unauthorized)?;
        let sc = &s.scores[&player];
        Ok(ScoresView {
            username: p.username.clone(),
            language: p.language,
            cracker_points: sc.cracker_points,
            annotations: s.annotation_counts.get(&player).copied().unwrap_or(0),
            blanker_annotation_count: sc.blanker_annotation_count,
            blanker_success_rate_percent: sc.blanker_success_rate(),
            points_by_language: s
                .language_points
                .range((player, Language::ALL[0])..)
                .take_while(|((id, _), _)| *id == player)
                .map(|((_, l), v)| (*l, *v))
                .collect(),
        })
    }

    /// Players by cracker points, ties broken by earlier registration. With
    /// a language, only points earned in that language count.
    pub fn leaderboard(&self, language: Option<Language>, limit: usize) -> Vec<LeaderboardRow> {
        let inner = self.lock();
        let s = &inner.state;
        let mut rows: Vec<(f64, i64, PlayerId, Language)> = match language {
            Some(lang) => s
                .language_points
                .iter()
                .filter(|((_, l), _)| *l == lang)
                .map(|((id, _), pts)| (*pts, s.players[id].created_at, *id, lang))
                .collect(),
            None => s
                .players
                .values()
                .map(|p| (s.scores[&p.id].cracker_points, p.created_at, p.id, p.language))
                .collect(),
        };
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        rows.into_iter()
            .take(limit)
            .enumerate()
            .map(|(i, (pts, _, id, lang))| LeaderboardRow {
                rank: i + 1,
                username: s.players[&id].username.clone(),
                language: lang,
                cracker_points: pts,
            })
            .collect()
    }

    pub fn create_session(
        &self,
        player: PlayerId,
        friend_usernames: &[String],
        riddle_count: usize,
    ) -> Result<SessionView, ServiceError> {
        if !(1..=MAX_SESSION_RIDDLES).contains(&riddle_count) {
            return Err(ServiceError::InvalidInput(format!(
                "riddle_count must be between 1 and {MAX_SESSION_RIDDLES}"
            )));
        }
        if friend_usernames.is_empty() {
            return Err(ServiceError::InvalidInput(
                "a competition needs at least one friend".into(),
            ));
        }
        let now = self.now();
        let mut inner = self.lock();
        let s = &inner.state;
        let language = s.players[&player].language;
        if !self.corpora.contains_key(&language) {
            return Err(ServiceError::LanguageNotLoaded(language));
        }
        let mut participants = vec![player];
        for name in friend_usernames {
            let id = s
                .usernames
                .get(&username_key(name))
                .copied()
                .ok_or_else(|| ServiceError::NotFound(format!("no player named `{name}`")))?;
            if !s.mutual_friends(player, id) {
                return Err(ServiceError::Forbidden(format!(
                    "`{name}` and you are not mutual friends"
                )));
            }
            if !participants.contains(&id) {
                participants.push(id);
            }
        }
        if participants.len() < 2 {
            return Err(ServiceError::InvalidInput(
                "a competition needs at least two players".into(),
            ));
        }
        let session = CompetitionSession {
            id: SessionId(s.ids.sessions.peek()),
            creator: player,
            points: participants.iter().map(|p| (*p, 0.0)).collect(),
            served: BTreeMap::new(),
            answered: BTreeMap::new(),
            participants,
            language,
            riddle_count,
            state: SessionState::Open,
            created_at: now,
            closed_at: None,
        };
        let id = session.id;
        inner.commit(Event::SessionCreated { session })?;
        Ok(session_view(&inner.state, id))
    }

    pub fn session(&self, player: PlayerId, id: SessionId) -> Result<SessionView, ServiceError> {
        let inner = self.lock();
        match inner.state.sessions.get(&id) {
            Some(s) if s.is_participant(player) => Ok(session_view(&inner.state, id)),
            _ => Err(ServiceError::NotFound(format!("no competition {id}"))),
        }
    }

    /// Freeze the standings. Closing a finished session changes nothing.
    pub fn close_session(&self, player: PlayerId, id: SessionId) -> Result<SessionView, ServiceError> {
        let now = self.now();
        let mut inner = self.lock();
        let s = inner
            .state
            .sessions
            .get(&id)
            .filter(|s| s.is_participant(player))
            .ok_or_else(|| ServiceError::NotFound(format!("no competition {id}")))?;
        if s.state != SessionState::Finished {
            inner.commit(Event::SessionClosed {
                session_id: id,
                closed_at: now,
            })?;
        }
        Ok(session_view(&inner.state, id))
    }

    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.lock().state.records.clone()
    }

    pub fn export_log<W: Write>(&self, out: W) -> Result<(), ServiceError> {
        let records = self.records();
        write_log(&records, out).map_err(|e| ServiceError::InvalidInput(e.to_string()))
    }

    pub fn stats_summary(&self) -> StatsSummary {
        let records = self.records();
        let distinct: std::collections::HashSet<PairId> =
            records.iter().map(|r| r.pair_id).collect();
        StatsSummary {
            annotations: records.len(),
            overall_success_percent: overall_success(&records).ok(),
            distinct_pairs: distinct.len(),
            breakdown: breakdown_records(&records),
        }
    }

    pub fn stats_histogram(
        &self,
        min_annotations: Option<usize>,
        bins: Option<usize>,
    ) -> Result<HistogramView, ServiceError> {
        let records = self.records();
        let h = histogram(
            &records,
            min_annotations.unwrap_or(self.config.min_annotations),
            bins.unwrap_or(self.config.histogram_bins),
        )
        .map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        Ok(HistogramView {
            pairs_at_least_90_percent: h.count_at_least(9, 10),
            pairs_at_least_80_percent: h.count_at_least(8, 10),
            bin_edges: h.bin_edges,
            counts: h.counts,
            min_annotations: h.min_annotations,
            distinct_pairs: h.distinct_pairs,
            included_count: h.included_count,
            excluded_count: h.excluded_count,
            mean_annotations_per_pair: h.mean_annotations_per_pair,
            mean_annotations_per_included_pair: h.mean_annotations_per_included_pair,
        })
    }
}

fn read_text(path: &std::path::Path) -> Result<String, ServiceError> {
    let file = std::fs::File::open(path).map_err(|source| blankcrack_core::CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| blankcrack_core::CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    Ok(text)
}

fn session_view(state: &GameState, id: SessionId) -> SessionView {
    let s = &state.sessions[&id];
    let name = |p: &PlayerId| state.players[p].username.clone();
    let mut standings: Vec<Standing> = s
        .participants
        .iter()
        .map(|p| Standing {
            username: name(p),
            points: s.points.get(p).copied().unwrap_or(0.0),
            answered: s.answered.get(p).copied().unwrap_or(0),
        })
        .collect();
    standings.sort_by(|a, b| b.points.total_cmp(&a.points).then_with(|| a.username.cmp(&b.username)));
    let share_text = (s.state == SessionState::Finished).then(|| {
        let ranking = standings
            .iter()
            .enumerate()
            .map(|(i, st)| format!("{}. {} {:.2} pts", i + 1, st.username, st.points))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "blankcrack competition #{} ({}, {} riddles): {}",
            s.id, s.language, s.riddle_count, ranking
        )
    });
    SessionView {
        session_id: id,
        language: s.language,
        riddle_count: s.riddle_count,
        state: s.state,
        standings,
        share_text,
    }
}
