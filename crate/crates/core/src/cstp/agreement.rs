use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{ContextTemplate, CstpError, Judge, Model, Winner};
use crate::corpus::CorpusIndex;
use crate::ids::{AnnotationId, PairId, RiddleId};
use crate::lang::Language;
use crate::pairgen::PairOrigin;
use crate::riddle::Riddle;
use crate::scoring::AnnotationRecord;

/// Where riddle sentences are looked up.
pub trait CorpusLookup: Sync {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex>;
}

impl CorpusLookup for CorpusIndex {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex> {
        (self.language() == language).then_some(self)
    }
}

impl CorpusLookup for HashMap<Language, CorpusIndex> {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex> {
        self.get(&language)
    }
}

impl CorpusLookup for BTreeMap<Language, CorpusIndex> {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex> {
        self.get(&language)
    }
}

impl CorpusLookup for HashMap<Language, Arc<CorpusIndex>> {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex> {
        self.get(&language).map(Arc::as_ref)
    }
}

impl CorpusLookup for BTreeMap<Language, Arc<CorpusIndex>> {
    fn corpus(&self, language: Language) -> Option<&CorpusIndex> {
        self.get(&language).map(Arc::as_ref)
    }
}

/// Majority vote over per-sentence preferences; ties abstain.
pub fn aggregate_majority(votes: &[Winner]) -> Winner {
    let first = votes.iter().filter(|w| **w == Winner::First).count();
    let second = votes.iter().filter(|w| **w == Winner::Second).count();
    match first.cmp(&second) {
        std::cmp::Ordering::Greater => Winner::First,
        std::cmp::Ordering::Less => Winner::Second,
        std::cmp::Ordering::Equal => Winner::Tie,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgreementSummary {
    pub n: usize,
    pub human_correct: usize,
    pub model_correct: usize,
    pub agreements: usize,
    pub model_ties: usize,
}

impl AgreementSummary {
    fn add(&mut self, human_correct: bool, model: Winner) {
        self.n += 1;
        self.human_correct += usize::from(human_correct);
        self.model_correct += usize::from(model == Winner::First);
        self.model_ties += usize::from(model == Winner::Tie);
        let agrees = match model {
            Winner::First => human_correct,
            Winner::Second => !human_correct,
            Winner::Tie => false,
        };
        self.agreements += usize::from(agrees);
    }

    fn rate(count: usize, n: usize) -> Option<f64> {
        (n > 0).then(|| count as f64 / n as f64)
    }

    pub fn human_success(&self) -> Option<f64> {
        Self::rate(self.human_correct, self.n)
    }

    pub fn model_success(&self) -> Option<f64> {
        Self::rate(self.model_correct, self.n)
    }

    pub fn agreement(&self) -> Option<f64> {
        Self::rate(self.agreements, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementRow {
    pub pair_id: PairId,
    pub language: Language,
    pub pair_origin: PairOrigin,
    pub summary: AgreementSummary,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AgreementReport {
    pub overall: AgreementSummary,
    pub per_origin: BTreeMap<PairOrigin, AgreementSummary>,
    pub per_language: BTreeMap<Language, AgreementSummary>,
    pub per_pair: Vec<AgreementRow>,
    pub skipped: Vec<(AnnotationId, String)>,
}

/// Compare a model with human crackers on logged riddles.
///
/// For each riddle the model judges every sentence with the target as first
/// term and the foil as second, and the sentence votes are combined by
/// [`aggregate_majority`]. The model is correct when the target wins and
/// agrees with the human when both picked the same word; a tied model agrees
/// with nobody. Sentences the rule cannot score (e.g. nothing after the slot
/// for an autoregressive model) abstain. Records whose riddle, corpus or
/// sentences are missing, or whose oracle fails, are listed in `skipped`.
pub fn agreement_report(
    judge: &Judge,
    model: Model<'_>,
    records: &[AnnotationRecord],
    riddles: &HashMap<RiddleId, Riddle>,
    corpora: &dyn CorpusLookup,
) -> AgreementReport {
    let mut wanted: Vec<RiddleId> = records.iter().map(|r| r.riddle_id).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let decisions: HashMap<RiddleId, Result<Winner, String>> = wanted
        .into_par_iter()
        .map(|id| {
            let decision = match riddles.get(&id) {
                Some(riddle) => judge_riddle(judge, model, riddle, corpora),
                None => Err(format!("riddle {id} not found")),
            };
            (id, decision)
        })
        .collect();

    let mut report = AgreementReport::default();
    let mut pairs: BTreeMap<PairId, AgreementRow> = BTreeMap::new();
    for record in records {
        let winner = match &decisions[&record.riddle_id] {
            Ok(w) => *w,
            Err(reason) => {
                report.skipped.push((record.id, reason.clone()));
                continue;
            }
        };
        report.overall.add(record.correct, winner);
        report
            .per_origin
            .entry(record.pair_origin)
            .or_default()
            .add(record.correct, winner);
        report
            .per_language
            .entry(record.language)
            .or_default()
            .add(record.correct, winner);
        pairs
            .entry(record.pair_id)
            .or_insert_with(|| AgreementRow {
                pair_id: record.pair_id,
                language: record.language,
                pair_origin: record.pair_origin,
                summary: AgreementSummary::default(),
            })
            .summary
            .add(record.correct, winner);
    }
    report.per_pair = pairs.into_values().collect();
    report
}

fn judge_riddle(
    judge: &Judge,
    model: Model<'_>,
    riddle: &Riddle,
    corpora: &dyn CorpusLookup,
) -> Result<Winner, String> {
    let corpus = corpora
        .corpus(riddle.language)
        .ok_or_else(|| format!("no corpus for {}", riddle.language))?;
    let mut votes = Vec::with_capacity(riddle.sentence_ids.len());
    for id in &riddle.sentence_ids {
        let sentence = corpus
            .sentence(*id)
            .ok_or_else(|| format!("sentence {id} not in the {} corpus", riddle.language))?;
        let Some(template) = ContextTemplate::from_tokens(&sentence.tokens, &riddle.target) else {
            continue;
        };
        match judge.prefer(model, &template, &riddle.target, &riddle.foil) {
            Ok(p) => votes.push(p.winner),
            Err(CstpError::UnsupportedTemplate(_)) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(aggregate_majority(&votes))
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.1}", 100.0 * v))
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>7} {:>8} {:>8} {:>9} {:>6}", "group", "n", "human%", "model%", "agree%", "ties")?;
        let line = |f: &mut fmt::Formatter<'_>, name: &str, s: &AgreementSummary| {
            writeln!(
                f,
                "{:<16} {:>7} {:>8} {:>8} {:>9} {:>6}",
                name,
                s.n,
                pct(s.human_success()),
                pct(s.model_success()),
                pct(s.agreement()),
                s.model_ties
            )
        };
        line(f, "all", &self.overall)?;
        for (lang, s) in &self.per_language {
            line(f, lang.code(), s)?;
        }
        for (origin, s) in &self.per_origin {
            line(f, origin.name(), s)?;
        }
        if !self.skipped.is_empty() {
            writeln!(f, "skipped {} record(s)", self.skipped.len())?;
        }
        Ok(())
    }
}
