//! Pair selection for riddle requests.
//!
//! User-proposed pairs with no annotation wait in a per-language FIFO and are
//! always served before anything else, so proposers get feedback quickly.
//! All other active pairs form a pool sampled with weight `1 / (1 + n)`,
//! where `n` is the pair's annotation count.
//!
//! Serving a pair records a lease `(player, expires_at)`. A FIFO entry leased
//! to someone is skipped by later requests, so two concurrent requests never
//! receive the same FIFO head; a player is never served a pair they hold a
//! live lease on, have annotated, or proposed.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use rand::Rng;

use crate::ids::{PairId, PlayerId};
use crate::lang::Language;
use crate::pairgen::{PairOrigin, PairState, WordPair};
use crate::scoring::AnnotationRecord;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("no riddles available for {0}")]
    Empty(Language),
    #[error("unknown pair #{0}")]
    UnknownPair(PairId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct PairEntry {
    language: Language,
    proposer: Option<PlayerId>,
    origin: PairOrigin,
    state: PairState,
    created_at: i64,
    count: usize,
    annotators: HashSet<PlayerId>,
    leases: BTreeMap<PlayerId, i64>,
}

impl PairEntry {
    fn live_lease(&self, now: i64) -> bool {
        self.leases.values().any(|&until| until > now)
    }

    fn servable_to(&self, player: PlayerId, now: i64) -> bool {
        self.state == PairState::Active
            && self.proposer != Some(player)
            && !self.annotators.contains(&player)
            && !self.leases.get(&player).is_some_and(|&until| until > now)
    }
}

/// Where a chosen pair came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Fifo,
    Pool,
}

/// Queue state for every language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scheduler {
    entries: HashMap<PairId, PairEntry>,
    /// Zero-annotation user-proposed pairs, ordered by (created_at, id).
    fifo: HashMap<Language, VecDeque<PairId>>,
    /// Every other pair.
    pool: HashMap<Language, BTreeMap<PairId, ()>>,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild queue state from the pair table and the annotation log.
    pub fn rebuild<'a>(
        pairs: impl IntoIterator<Item = &'a WordPair>,
        records: impl IntoIterator<Item = &'a AnnotationRecord>,
    ) -> Self {
        let mut s = Scheduler::new();
        for pair in pairs {
            s.add_pair(pair);
        }
        let mut counts: HashMap<PairId, usize> = HashMap::new();
        for r in records {
            let n = counts.entry(r.pair_id).or_default();
            *n += 1;
            // unknown pairs in an old log are not fatal for a rebuild
            let _ = s.on_annotation_committed(r.pair_id, r.player_id, *n);
        }
        s
    }

    pub fn add_pair(&mut self, pair: &WordPair) {
        if self.entries.contains_key(&pair.id) {
            return;
        }
        self.entries.insert(
            pair.id,
            PairEntry {
                language: pair.language,
                proposer: pair.proposer,
                origin: pair.origin,
                state: pair.state,
                created_at: pair.created_at,
                count: 0,
                annotators: HashSet::new(),
                leases: BTreeMap::new(),
            },
        );
        if pair.origin == PairOrigin::UserProposed && pair.state == PairState::Active {
            let key = (pair.created_at, pair.id);
            let entries = &self.entries;
            let queue = self.fifo.entry(pair.language).or_default();
            let at = queue.partition_point(|id| {
                let e = &entries[id];
                (e.created_at, *id) < key
            });
            queue.insert(at, pair.id);
        } else {
            self.pool.entry(pair.language).or_default().insert(pair.id, ());
        }
    }

    pub fn contains(&self, pair: PairId) -> bool {
        self.entries.contains_key(&pair)
    }

    pub fn annotation_count(&self, pair: PairId) -> Option<usize> {
        self.entries.get(&pair).map(|e| e.count)
    }

    pub fn fifo_len(&self, language: Language) -> usize {
        self.fifo.get(&language).map_or(0, VecDeque::len)
    }

    pub fn in_fifo(&self, pair: PairId) -> bool {
        self.entries
            .get(&pair)
            .is_some_and(|e| self.fifo.get(&e.language).is_some_and(|q| q.contains(&pair)))
    }

    pub fn pool_weight(&self, pair: PairId) -> Option<f64> {
        let e = self.entries.get(&pair)?;
        self.pool
            .get(&e.language)
            .is_some_and(|p| p.contains_key(&pair))
            .then(|| 1.0 / (1.0 + e.count as f64))
    }

    /// First FIFO pair `player` may receive, if any.
    pub fn servable_fifo_head(&self, language: Language, player: PlayerId, now: i64) -> Option<PairId> {
        self.fifo.get(&language)?.iter().copied().find(|id| {
            let e = &self.entries[id];
            e.servable_to(player, now) && !e.live_lease(now)
        })
    }

    /// Pick a pair without changing state.
    pub fn choose<R: Rng + ?Sized>(
        &self,
        language: Language,
        player: PlayerId,
        now: i64,
        rng: &mut R,
    ) -> Result<(PairId, Source), SchedulerError> {
        if let Some(id) = self.servable_fifo_head(language, player, now) {
            return Ok((id, Source::Fifo));
        }
        let candidates: Vec<(PairId, f64)> = self
            .pool
            .get(&language)
            .into_iter()
            .flat_map(BTreeMap::keys)
            .filter_map(|id| {
                let e = &self.entries[id];
                e.servable_to(player, now)
                    .then(|| (*id, 1.0 / (1.0 + e.count as f64)))
            })
            .collect();
        let total: f64 = candidates.iter().map(|(_, w)| w).sum();
        if candidates.is_empty() {
            return Err(SchedulerError::Empty(language));
        }
        let mut x = rng.gen::<f64>() * total;
        for &(id, w) in &candidates {
            if x < w {
                return Ok((id, Source::Pool));
            }
            x -= w;
        }
        Ok((candidates[candidates.len() - 1].0, Source::Pool))
    }

    /// Record that `pair` was served to `player` until `expires_at`.
    pub fn lease(&mut self, pair: PairId, player: PlayerId, expires_at: i64) -> Result<(), SchedulerError> {
        let e = self
            .entries
            .get_mut(&pair)
            .ok_or(SchedulerError::UnknownPair(pair))?;
        e.leases.insert(player, expires_at);
        Ok(())
    }

    /// Drop a lease without an annotation (expired or abandoned riddle).
    pub fn release(&mut self, pair: PairId, player: PlayerId) {
        if let Some(e) = self.entries.get_mut(&pair) {
            e.leases.remove(&player);
        }
    }

    /// [`Scheduler::choose`] followed by [`Scheduler::lease`].
    pub fn next_pair<R: Rng + ?Sized>(
        &mut self,
        language: Language,
        player: PlayerId,
        now: i64,
        lease_until: i64,
        rng: &mut R,
    ) -> Result<PairId, SchedulerError> {
        let (id, _) = self.choose(language, player, now, rng)?;
        self.lease(id, player, lease_until)?;
        Ok(id)
    }

    /// `player`'s annotation brought `pair` to `new_count` annotations.
    /// Replaying a count that is not new is a no-op.
    pub fn on_annotation_committed(
        &mut self,
        pair: PairId,
        player: PlayerId,
        new_count: usize,
    ) -> Result<(), SchedulerError> {
        let e = self
            .entries
            .get_mut(&pair)
            .ok_or(SchedulerError::UnknownPair(pair))?;
        e.leases.remove(&player);
        if new_count <= e.count {
            return Ok(());
        }
        e.count = new_count;
        e.annotators.insert(player);
        let language = e.language;
        if let Some(queue) = self.fifo.get_mut(&language) {
            if let Some(at) = queue.iter().position(|id| *id == pair) {
                queue.remove(at);
                self.pool.entry(language).or_default().insert(pair, ());
            }
        }
        Ok(())
    }

    pub fn set_state(&mut self, pair: PairId, state: PairState) -> Result<(), SchedulerError> {
        let e = self
            .entries
            .get_mut(&pair)
            .ok_or(SchedulerError::UnknownPair(pair))?;
        e.state = state;
        let language = e.language;
        if state != PairState::Active {
            if let Some(queue) = self.fifo.get_mut(&language) {
                if let Some(at) = queue.iter().position(|id| *id == pair) {
                    queue.remove(at);
                    self.pool.entry(language).or_default().insert(pair, ());
                }
            }
        }
        Ok(())
    }

    /// Every pair sits in exactly one of FIFO or pool, and the FIFO holds
    /// exactly the active zero-annotation user-proposed pairs.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for (lang, queue) in &self.fifo {
            for id in queue {
                let e = &self.entries[id];
                if e.language != *lang || e.origin != PairOrigin::UserProposed || e.count != 0 {
                    return Err(format!("pair {id} should not be in the FIFO"));
                }
                if !seen.insert(*id) {
                    return Err(format!("pair {id} queued twice"));
                }
            }
        }
        for (lang, pool) in &self.pool {
            for id in pool.keys() {
                let e = &self.entries[id];
                if e.language != *lang {
                    return Err(format!("pair {id} pooled under the wrong language"));
                }
                if e.origin == PairOrigin::UserProposed && e.count == 0 && e.state == PairState::Active {
                    return Err(format!("fresh proposal {id} missing from the FIFO"));
                }
                if !seen.insert(*id) {
                    return Err(format!("pair {id} in both FIFO and pool"));
                }
            }
        }
        if seen.len() != self.entries.len() {
            return Err("pair lost from the queues".into());
        }
        Ok(())
    }
}
