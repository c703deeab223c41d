use std::collections::HashSet;

use tracing::debug;

use super::{check_pair, PairOrigin, PairRejection, PairState, PairgenError, WordPair};
use crate::corpus::{normalize, CorpusIndex};
use crate::ids::{IdSequence, PairId};

/// A named list of words whose members are pairwise confusable
/// (months, weekdays, numbers, colors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub name: String,
    pub words: Vec<String>,
}

/// Parse a series file: `# name` header lines each open a series, followed by
/// one word per line. Blank lines are ignored.
pub fn parse_series(text: &str) -> Result<Vec<Series>, PairgenError> {
    let mut out: Vec<Series> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('#') {
            let name = name.trim();
            if name.is_empty() {
                return Err(PairgenError::Parse {
                    line: line_no,
                    message: "series header without a name".into(),
                });
            }
            out.push(Series {
                name: name.to_string(),
                words: Vec::new(),
            });
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(PairgenError::Parse {
                line: line_no,
                message: format!("word `{line}` appears before any `# series` header"),
            });
        };
        if line.split_whitespace().nth(1).is_some() {
            return Err(PairgenError::Parse {
                line: line_no,
                message: format!("expected one word per line, got `{line}`"),
            });
        }
        let word = normalize(line).to_lowercase();
        if !current.words.contains(&word) {
            current.words.push(word);
        }
    }
    Ok(out)
}

/// All unordered pairs within one series, in file order.
pub fn series_candidates(series: &Series) -> Vec<(String, String)> {
    let words = &series.words;
    let mut out = Vec::with_capacity(words.len() * words.len().saturating_sub(1) / 2);
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct SeriesPairs {
    pub pairs: Vec<WordPair>,
    pub dropped: Vec<(String, String, Vec<PairRejection>)>,
}

/// Emit every within-series pair that passes the [`WordPair`] invariants
/// against `index`. Pairs never cross series; a pair listed in two series is
/// emitted once.
pub fn manual_series_pairs(
    series: &[Series],
    index: &CorpusIndex,
    ids: &IdSequence,
    created_at: i64,
) -> SeriesPairs {
    let mut out = SeriesPairs::default();
    let mut seen = HashSet::new();
    for s in series {
        for (a, b) in series_candidates(s) {
            let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if !seen.insert(key) {
                continue;
            }
            let problems = check_pair(&a, &b, index);
            if !problems.is_empty() {
                debug!(series = %s.name, %a, %b, ?problems, "dropping series pair");
                out.dropped.push((a, b, problems));
                continue;
            }
            out.pairs.push(WordPair {
                id: PairId(ids.next()),
                language: index.language(),
                word_a: a,
                word_b: b,
                origin: PairOrigin::Manual,
                proposer: None,
                state: PairState::Active,
                created_at,
            });
        }
    }
    out
}
