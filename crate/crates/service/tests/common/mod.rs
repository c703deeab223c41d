#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use blankcrack_core::{CorpusIndex, Genre, Language, PairId, PairOrigin, PairState, PlayerId, RiddleId};
use blankcrack_service::config::LanguageConfig;
use blankcrack_service::journal::Journal;
use blankcrack_service::{Game, GameState, ManualClock, ServiceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

/// Words of the seeded manual series.
pub const SERIES: [&str; 6] = ["hyena", "jackal", "wolf", "fox", "lion", "tiger"];
/// Words only ever paired by players.
pub const FREE: [&str; 8] = ["kitten", "puppy", "parrot", "rabbit", "turtle", "beaver", "falcon", "camel"];

pub const START_MS: i64 = 1_622_505_600_000;

pub fn corpus_lines() -> Vec<String> {
    let places = ["river", "forest", "village", "desert", "mountain", "lake", "road", "field"];
    let mut lines = Vec::new();
    for w in SERIES.iter().chain(&FREE) {
        for (i, place) in places.iter().enumerate() {
            lines.push(format!("The {w} walked near the {place} on day {i}."));
        }
    }
    for i in 0..6 {
        lines.push(format!("They run and keep running for {i} hours."));
    }
    lines
}

pub fn corpus() -> CorpusIndex {
    CorpusIndex::from_lines(Language::En, Genre::Books, corpus_lines())
}

pub struct Harness {
    pub game: Arc<Game>,
    pub clock: Arc<ManualClock>,
    pub config: ServiceConfig,
    pub corpus: Arc<CorpusIndex>,
    pub dir: TempDir,
}

impl Harness {
    pub fn new(seed: u64) -> Harness {
        Self::build(seed, false)
    }

    /// Journal written to `dir/events.jsonl`.
    pub fn with_journal(seed: u64) -> Harness {
        Self::build(seed, true)
    }

    fn build(seed: u64, journal: bool) -> Harness {
        let dir = tempfile::tempdir().unwrap();
        let series = dir.path().join("en.txt");
        std::fs::write(&series, format!("# animals\n{}\n", SERIES.join("\n"))).unwrap();
        let config = ServiceConfig {
            journal: journal.then(|| dir.path().join("events.jsonl")),
            fsync: false,
            password_rounds: 1,
            seed: Some(seed),
            languages: vec![LanguageConfig {
                code: Language::En,
                corpus: Vec::new(),
                snapshot: None,
                series: Some(series),
                pairs: None,
            }],
            ..ServiceConfig::default()
        };
        let corpus = Arc::new(corpus());
        let clock = Arc::new(ManualClock::new(START_MS));
        let game = Game::open(config.clone(), corpora(&corpus), clock.clone()).unwrap();
        game.seed_pairs().unwrap();
        Harness {
            game: Arc::new(game),
            clock,
            config,
            corpus,
            dir,
        }
    }

    pub fn journal_path(&self) -> PathBuf {
        self.dir.path().join("events.jsonl")
    }

    /// A fresh engine over the journal on disk, as after a restart.
    pub fn restart(&self) -> Game {
        let (journal, events) = Journal::open(&self.journal_path(), false).unwrap();
        Game::from_events(
            self.config.clone(),
            corpora(&self.corpus),
            self.clock.clone(),
            journal,
            &events,
        )
        .unwrap()
    }

    pub fn player(&self, name: &str) -> PlayerId {
        self.game.register(name, "secret", Language::En).unwrap()
    }
}

pub fn corpora(corpus: &Arc<CorpusIndex>) -> HashMap<Language, Arc<CorpusIndex>> {
    HashMap::from([(Language::En, corpus.clone())])
}

/// Drive a seeded random mix of operations, returning the live state after
/// each one together with the number of events committed so far.
pub fn random_workload(h: &Harness, seed: u64, steps: usize) -> Vec<(usize, GameState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let game = &h.game;
    let mut players: Vec<(PlayerId, String)> = Vec::new();
    let mut served: Vec<(PlayerId, RiddleId)> = Vec::new();
    let mut snapshots = Vec::with_capacity(steps);
    for step in 0..steps {
        h.clock.advance(rng.gen_range(0..240_000));
        let op = if players.len() < 2 { 0 } else { rng.gen_range(0..10) };
        match op {
            0 => {
                let name = format!("player{step}");
                if let Ok(id) = game.register(&name, "secret", Language::En) {
                    players.push((id, name));
                }
            }
            1..=4 => {
                let (p, _) = players[rng.gen_range(0..players.len())];
                if let Ok(r) = game.serve_riddle(p, None, None) {
                    served.push((p, r.payload.riddle_id));
                }
            }
            5..=7 if !served.is_empty() => {
                let (p, rid) = served[rng.gen_range(0..served.len())];
                let key = game.with_state(|s| {
                    s.pending
                        .get(&rid)
                        .map(|r| (r.riddle.target.clone(), r.riddle.foil.clone()))
                });
                let choice = match key {
                    Some((t, f)) => if rng.gen_bool(0.6) { t } else { f },
                    None => "hyena".to_string(),
                };
                let _ = game.submit_answer(p, rid, &choice);
            }
            8 => {
                let (p, _) = players[rng.gen_range(0..players.len())];
                let a = FREE[rng.gen_range(0..FREE.len())];
                let b = FREE[rng.gen_range(0..FREE.len())];
                let _ = game.propose_pair(p, Language::En, a, b);
            }
            _ => {
                let (p, _) = players[rng.gen_range(0..players.len())];
                let (_, friend) = &players[rng.gen_range(0..players.len())];
                let _ = game.add_friend(p, friend);
                let _ = game.update_settings(p, Some([1, 3, 5][rng.gen_range(0..3)]), None);
            }
        }
        snapshots.push((game.event_count(), game.with_state(GameState::clone)));
    }
    snapshots
}

/// Zero-annotation user-proposed pairs `player` may be served right now,
/// computed from the game state rather than the scheduler.
pub fn servable_fresh_pairs(state: &GameState, player: PlayerId, now: i64) -> Vec<PairId> {
    state
        .pairs
        .values()
        .filter(|p| p.origin == PairOrigin::UserProposed && p.state == PairState::Active)
        .filter(|p| p.proposer != Some(player))
        .filter(|p| state.tallies.get(&p.id).map_or(0, |t| t.total) == 0)
        .filter(|p| {
            !state
                .pending
                .values()
                .any(|r| r.riddle.pair_id == p.id && r.expires_at > now)
        })
        .map(|p| p.id)
        .collect()
}

/// One interleaved propose/serve/answer schedule. Returns the number of
/// riddles served, or a description of the first priority violation.
pub fn priority_schedule(seed: u64, steps: usize) -> Result<usize, String> {
    let h = Harness::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let players: Vec<PlayerId> = (0..4).map(|i| h.player(&format!("player{i}"))).collect();
    let mut open: Vec<(PlayerId, RiddleId)> = Vec::new();
    let mut served = 0;
    for _ in 0..steps {
        h.clock.advance(rng.gen_range(0..30 * 60_000));
        let p = players[rng.gen_range(0..players.len())];
        match rng.gen_range(0..3) {
            0 => {
                let a = FREE[rng.gen_range(0..FREE.len())];
                let b = FREE[rng.gen_range(0..FREE.len())];
                let _ = h.game.propose_pair(p, Language::En, a, b);
            }
            1 => {
                let now = h.game.now();
                let fresh = h.game.with_state(|s| servable_fresh_pairs(s, p, now));
                let Ok(r) = h.game.serve_riddle(p, None, None) else {
                    if !fresh.is_empty() {
                        return Err(format!("no riddle for {p} while {fresh:?} were servable"));
                    }
                    continue;
                };
                served += 1;
                let pair = h.game.with_state(|s| {
                    let id = s.pending[&r.payload.riddle_id].riddle.pair_id;
                    s.pairs[&id].clone()
                });
                if pair.proposer == Some(p) {
                    return Err(format!("{p} was served their own pair {}", pair.id));
                }
                if !fresh.is_empty() && !fresh.contains(&pair.id) {
                    return Err(format!(
                        "pool pair {} served to {p} while {fresh:?} were servable",
                        pair.id
                    ));
                }
                open.push((p, r.payload.riddle_id));
            }
            _ if !open.is_empty() => {
                let (p, rid) = open.swap_remove(rng.gen_range(0..open.len()));
                let options = h.game.with_state(|s| s.pending.get(&rid).map(|r| r.riddle.option_order.clone()));
                if let Some(options) = options {
                    let _ = h.game.submit_answer(p, rid, &options[rng.gen_range(0..2)]);
                }
            }
            _ => {}
        }
    }
    Ok(served)
}
