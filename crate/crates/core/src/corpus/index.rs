use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stem::Stemmer;
use super::text::{normalize, tokenize};
use super::CorpusError;
use crate::ids::SentenceId;
use crate::lang::{Genre, Language};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: SentenceId,
    pub language: Language,
    pub genre: Genre,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub stems: Vec<String>,
}

impl Sentence {
    pub fn contains_token(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

/// Single-writer accumulator for one language. Call [`CorpusBuilder::build`]
/// to freeze it into an immutable [`CorpusIndex`].
#[derive(Debug)]
pub struct CorpusBuilder {
    language: Language,
    stemmer: Stemmer,
    sentences: Vec<Sentence>,
    seen: HashSet<String>,
}

impl CorpusBuilder {
    pub fn new(language: Language) -> Self {
        CorpusBuilder {
            language,
            stemmer: Stemmer::new(language),
            sentences: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn for_code(code: &str) -> Result<Self, CorpusError> {
        let language = code
            .parse::<Language>()
            .map_err(|e| CorpusError::Config(e.to_string()))?;
        Ok(Self::new(language))
    }

    /// Continue ingesting into an existing index.
    pub fn from_index(index: CorpusIndex) -> Self {
        let seen = index.sentences.iter().map(|s| s.raw_text.clone()).collect();
        CorpusBuilder {
            language: index.language,
            stemmer: index.stemmer,
            sentences: index.sentences,
            seen,
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Ingest one-sentence-per-line UTF-8 files. Returns the number of new
    /// sentences across all files.
    pub fn ingest_files<P: AsRef<Path>>(
        &mut self,
        paths: &[P],
        genre: Genre,
    ) -> Result<usize, CorpusError> {
        let mut added = 0;
        for path in paths {
            let path = path.as_ref();
            let file = File::open(path).map_err(|source| CorpusError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            added += self.ingest_reader(BufReader::new(file), genre, path)?;
        }
        Ok(added)
    }

    pub fn ingest_reader<R: BufRead>(
        &mut self,
        mut reader: R,
        genre: Genre,
        source_name: &Path,
    ) -> Result<usize, CorpusError> {
        let mut added = 0;
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let read = reader
                .read_until(b'\n', &mut buf)
                .map_err(|source| CorpusError::Io {
                    path: source_name.to_path_buf(),
                    source,
                })?;
            if read == 0 {
                break;
            }
            line_no += 1;
            let line = std::str::from_utf8(&buf).map_err(|_| CorpusError::Encoding {
                path: source_name.to_path_buf(),
                line: line_no,
            })?;
            if self.push_line(line, genre) {
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn ingest_lines<I, S>(&mut self, lines: I, genre: Genre) -> usize
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        lines
            .into_iter()
            .filter(|line| self.push_line(line.as_ref(), genre))
            .count()
    }

    fn push_line(&mut self, line: &str, genre: Genre) -> bool {
        let raw_text = normalize(line.trim_end_matches(['\n', '\r']));
        if raw_text.trim().is_empty() || self.seen.contains(&raw_text) {
            return false;
        }
        let tokens = tokenize(&raw_text, self.language);
        if tokens.is_empty() {
            return false;
        }
        let stems = tokens.iter().map(|t| self.stemmer.stem(t)).collect();
        self.seen.insert(raw_text.clone());
        let id = SentenceId(self.sentences.len() as u32);
        self.sentences.push(Sentence {
            id,
            language: self.language,
            genre,
            raw_text,
            tokens,
            stems,
        });
        true
    }

    /// Push a sentence whose tokens and stems are already known (snapshot load).
    pub(crate) fn push_prepared(&mut self, sentence: Sentence) {
        self.seen.insert(sentence.raw_text.clone());
        self.sentences.push(sentence);
    }

    pub fn build(self) -> CorpusIndex {
        let mut token_index: HashMap<String, Vec<SentenceId>> = HashMap::new();
        let mut stem_index: HashMap<String, Vec<SentenceId>> = HashMap::new();
        let mut vocabulary: HashMap<String, u64> = HashMap::new();
        let mut genre_counts = BTreeMap::new();
        let mut total_tokens = 0u64;

        // ids ascend, so checking the last entry keeps each posting list a set
        fn post(list: &mut Vec<SentenceId>, id: SentenceId) {
            if list.last() != Some(&id) {
                list.push(id);
            }
        }

        for sentence in &self.sentences {
            *genre_counts.entry(sentence.genre).or_insert(0usize) += 1;
            for (token, stem) in sentence.tokens.iter().zip(&sentence.stems) {
                total_tokens += 1;
                *vocabulary.entry(token.clone()).or_insert(0) += 1;
                post(token_index.entry(token.clone()).or_default(), sentence.id);
                post(stem_index.entry(stem.clone()).or_default(), sentence.id);
            }
        }

        CorpusIndex {
            language: self.language,
            stemmer: self.stemmer,
            sentences: self.sentences,
            token_index,
            stem_index,
            vocabulary,
            genre_counts,
            total_tokens,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EligibilityOptions {
    /// Also drop sentences containing a morphological variant of the target
    /// (a different token with the target's stem).
    pub strict_leakage_filter: bool,
}

/// Immutable, read-only corpus for one language.
#[derive(Debug)]
pub struct CorpusIndex {
    language: Language,
    stemmer: Stemmer,
    sentences: Vec<Sentence>,
    token_index: HashMap<String, Vec<SentenceId>>,
    stem_index: HashMap<String, Vec<SentenceId>>,
    vocabulary: HashMap<String, u64>,
    genre_counts: BTreeMap<Genre, usize>,
    total_tokens: u64,
}

impl CorpusIndex {
    /// Convenience for tests and small tools: index in-memory lines.
    pub fn from_lines<I, S>(language: Language, genre: Genre, lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = CorpusBuilder::new(language);
        builder.ingest_lines(lines, genre);
        builder.build()
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn stemmer(&self) -> &Stemmer {
        &self.stemmer
    }

    pub fn stem(&self, token: &str) -> String {
        self.stemmer.stem(token)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, id: SentenceId) -> Option<&Sentence> {
        self.sentences.get(id.0 as usize)
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn sentences_with_token(&self, token: &str) -> &[SentenceId] {
        self.token_index.get(token).map_or(&[], Vec::as_slice)
    }

    pub fn sentences_with_stem(&self, stem: &str) -> &[SentenceId] {
        self.stem_index.get(stem).map_or(&[], Vec::as_slice)
    }

    pub fn vocabulary(&self) -> &HashMap<String, u64> {
        &self.vocabulary
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.vocabulary.contains_key(token)
    }

    pub fn token_count(&self, token: &str) -> u64 {
        self.vocabulary.get(token).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn genre_counts(&self) -> &BTreeMap<Genre, usize> {
        &self.genre_counts
    }

    /// Sentences containing `target` and no token sharing a stem with `foil`.
    pub fn eligible_sentences(&self, target: &str, foil: &str) -> Vec<SentenceId> {
        self.eligible_sentences_with(target, foil, EligibilityOptions::default())
    }

    pub fn eligible_sentences_with(
        &self,
        target: &str,
        foil: &str,
        options: EligibilityOptions,
    ) -> Vec<SentenceId> {
        let with_target = self.sentences_with_token(target);
        let excluded = self.sentences_with_stem(&self.stemmer.stem(foil));
        let mut eligible = sorted_difference(with_target, excluded);
        if options.strict_leakage_filter {
            let target_stem = self.stemmer.stem(target);
            eligible.retain(|id| {
                let s = &self.sentences[id.0 as usize];
                !s.tokens
                    .iter()
                    .zip(&s.stems)
                    .any(|(t, st)| *st == target_stem && t != target)
            });
        }
        eligible
    }
}

/// `a \ b` for ascending id lists.
fn sorted_difference(a: &[SentenceId], b: &[SentenceId]) -> Vec<SentenceId> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &id in a {
        while j < b.len() && b[j] < id {
            j += 1;
        }
        if j >= b.len() || b[j] != id {
            out.push(id);
        }
    }
    out
}

/// Draw `k` distinct ids uniformly without replacement, in sampled order.
pub fn sample_sentences<R: Rng + ?Sized>(
    ids: &[SentenceId],
    k: usize,
    rng: &mut R,
) -> Result<Vec<SentenceId>, CorpusError> {
    if ids.len() < k {
        return Err(CorpusError::InsufficientContext {
            available: ids.len(),
            requested: k,
        });
    }
    Ok(rand::seq::index::sample(rng, ids.len(), k)
        .into_iter()
        .map(|i| ids[i])
        .collect())
}
