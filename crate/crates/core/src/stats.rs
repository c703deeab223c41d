//! Usage statistics over an annotation log.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::annotation_log::AnnotationLog;
use crate::ids::PairId;
use crate::lang::Language;
use crate::pairgen::PairOrigin;
use crate::scoring::{AnnotationRecord, DIFFICULTY_MIN_ANNOTATIONS};

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_MIN_ANNOTATIONS: usize = DIFFICULTY_MIN_ANNOTATIONS;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("success rate is undefined for an empty log")]
    EmptyLog,
    #[error("histogram needs at least one bin")]
    InvalidBins,
    #[error("min_annotations must be at least 1")]
    InvalidMinAnnotations,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub total: usize,
    pub correct: usize,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }

    /// Exact percentage, `None` without records.
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.correct as f64 / self.total as f64)
    }

    pub fn rounded_percent(&self) -> Option<u32> {
        self.percent().map(|p| p.round() as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownRow {
    pub language: Language,
    /// `None` is the all-origins row.
    pub origin: Option<PairOrigin>,
    pub annotation_count: usize,
    pub correct_count: usize,
    pub success_rate_percent: Option<f64>,
}

/// Annotation counts and success rates per language and pair origin. Cells
/// without data have no rate, which is distinct from 0%.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BreakdownReport {
    cells: BTreeMap<(Language, Option<PairOrigin>), Tally>,
    pub rejects: usize,
}

impl Serialize for BreakdownReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("BreakdownReport", 2)?;
        s.serialize_field("rows", &self.rows())?;
        s.serialize_field("rejects", &self.rejects)?;
        s.end()
    }
}

impl BreakdownReport {
    pub fn tally(&self, language: Language, origin: Option<PairOrigin>) -> Tally {
        self.cells.get(&(language, origin)).copied().unwrap_or_default()
    }

    pub fn count(&self, language: Language, origin: Option<PairOrigin>) -> usize {
        self.tally(language, origin).total
    }

    pub fn percent(&self, language: Language, origin: Option<PairOrigin>) -> Option<f64> {
        self.tally(language, origin).percent()
    }

    /// Every language × {all, each origin}, in a fixed order.
    pub fn rows(&self) -> Vec<BreakdownRow> {
        let origins = std::iter::once(None).chain(PairOrigin::ALL.into_iter().map(Some));
        let origins: Vec<_> = origins.collect();
        Language::ALL
            .into_iter()
            .flat_map(|language| origins.iter().map(move |o| (language, *o)))
            .map(|(language, origin)| {
                let t = self.tally(language, origin);
                BreakdownRow {
                    language,
                    origin,
                    annotation_count: t.total,
                    correct_count: t.correct,
                    success_rate_percent: t.percent(),
                }
            })
            .collect()
    }
}

impl fmt::Display for BreakdownReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<5} {:<16} {:>7} {:>8}", "lang", "origin", "count", "success")?;
        for row in self.rows() {
            let rate = row
                .success_rate_percent
                .map_or_else(|| "-".to_string(), |p| format!("{:.0}%", p));
            let origin = row.origin.map_or("all", PairOrigin::name);
            writeln!(
                f,
                "{:<5} {:<16} {:>7} {:>8}",
                row.language.code(),
                origin,
                row.annotation_count,
                rate
            )?;
        }
        if self.rejects > 0 {
            writeln!(f, "rejected rows: {}", self.rejects)?;
        }
        Ok(())
    }
}

pub fn breakdown(log: &AnnotationLog) -> BreakdownReport {
    let mut report = breakdown_records(&log.records);
    report.rejects = log.rejects.len();
    report
}

pub fn breakdown_records(records: &[AnnotationRecord]) -> BreakdownReport {
    let mut report = BreakdownReport::default();
    for r in records {
        for origin in [None, Some(r.pair_origin)] {
            report
                .cells
                .entry((r.language, origin))
                .or_default()
                .add(r.correct);
        }
    }
    report
}

/// 100 × correct / total over all records.
pub fn overall_success(records: &[AnnotationRecord]) -> Result<f64, StatsError> {
    let mut t = Tally::default();
    records.iter().for_each(|r| t.add(r.correct));
    t.percent().ok_or(StatsError::EmptyLog)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairRate {
    pub pair_id: PairId,
    pub language: Language,
    pub pair_origin: PairOrigin,
    pub total: usize,
    pub correct: usize,
}

/// Per-pair success rates over `bins` equal, right-closed bins on `[0, 1]`
/// (the first bin also holds 0).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub min_annotations: usize,
    pub distinct_pairs: usize,
    pub included_count: usize,
    pub excluded_count: usize,
    /// Over all pairs, filtered or not.
    pub mean_annotations_per_pair: Option<f64>,
    /// Over pairs passing the filter.
    pub mean_annotations_per_included_pair: Option<f64>,
    pub pairs: Vec<PairRate>,
}

impl SuccessHistogram {
    /// Included pairs whose rate is at least `num / den`, compared exactly.
    pub fn count_at_least(&self, num: usize, den: usize) -> usize {
        self.included()
            .filter(|p| p.correct * den >= num * p.total)
            .count()
    }

    pub fn included(&self) -> impl Iterator<Item = &PairRate> {
        self.pairs
            .iter()
            .filter(move |p| p.total >= self.min_annotations)
    }
}

impl fmt::Display for SuccessHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, count) in self.counts.iter().enumerate() {
            let open = if i == 0 { '[' } else { '(' };
            writeln!(
                f,
                "{open}{:.2}, {:.2}] {:>6}",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                count
            )?;
        }
        writeln!(
            f,
            "pairs: {} distinct, {} included, {} excluded (< {} annotations)",
            self.distinct_pairs, self.included_count, self.excluded_count, self.min_annotations
        )?;
        let mean = |m: Option<f64>| m.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        writeln!(
            f,
            "mean annotations per pair: {} (all), {} (included)",
            mean(self.mean_annotations_per_pair),
            mean(self.mean_annotations_per_included_pair)
        )
    }
}

pub fn histogram(
    records: &[AnnotationRecord],
    min_annotations: usize,
    bins: usize,
) -> Result<SuccessHistogram, StatsError> {
    if bins < 1 {
        return Err(StatsError::InvalidBins);
    }
    if min_annotations < 1 {
        return Err(StatsError::InvalidMinAnnotations);
    }
    let mut per_pair: HashMap<PairId, PairRate> = HashMap::new();
    for r in records {
        let p = per_pair.entry(r.pair_id).or_insert(PairRate {
            pair_id: r.pair_id,
            language: r.language,
            pair_origin: r.pair_origin,
            total: 0,
            correct: 0,
        });
        p.total += 1;
        p.correct += usize::from(r.correct);
    }
    let mut pairs: Vec<PairRate> = per_pair.into_values().collect();
    pairs.sort_by_key(|p| p.pair_id);

    let mut counts = vec![0usize; bins];
    let mut included_count = 0;
    let mut included_annotations = 0;
    for p in pairs.iter().filter(|p| p.total >= min_annotations) {
        // rate in (i/bins, (i+1)/bins]  <=>  i = ceil(rate * bins) - 1
        let ceil = (p.correct * bins).div_ceil(p.total);
        counts[ceil.saturating_sub(1)] += 1;
        included_count += 1;
        included_annotations += p.total;
    }
    let mean = |sum: usize, n: usize| (n > 0).then(|| sum as f64 / n as f64);
    Ok(SuccessHistogram {
        bin_edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts,
        min_annotations,
        distinct_pairs: pairs.len(),
        included_count,
        excluded_count: pairs.len() - included_count,
        mean_annotations_per_pair: mean(records.len(), pairs.len()),
        mean_annotations_per_included_pair: mean(included_annotations, included_count),
        pairs,
    })
}
