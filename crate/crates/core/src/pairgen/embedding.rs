use std::collections::HashMap;
use std::io::BufRead;

use super::PairgenError;
use crate::lang::Language;

/// Pretrained word vectors for one language, loaded from the word2vec text
/// format. Zero-norm vectors are refused at load time.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    language: Language,
    dimension: usize,
    words: Vec<String>,
    data: Vec<f64>,
    norms: Vec<f64>,
    lookup: HashMap<String, usize>,
    skipped_zero_norm: usize,
}

impl EmbeddingTable {
    pub fn new(language: Language, dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        EmbeddingTable {
            language,
            dimension,
            words: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            lookup: HashMap::new(),
            skipped_zero_norm: 0,
        }
    }

    /// Add a vector. Returns `false` (and stores nothing) for a zero-norm
    /// vector or a word already present.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<bool, PairgenError> {
        if vector.len() != self.dimension {
            return Err(PairgenError::NumericDomain(format!(
                "vector for `{word}` has {} components, expected {}",
                vector.len(),
                self.dimension
            )));
        }
        if self.lookup.contains_key(word) {
            return Ok(false);
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            self.skipped_zero_norm += 1;
            return Ok(false);
        }
        self.lookup.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.data.extend_from_slice(vector);
        self.norms.push(norm);
        Ok(true)
    }

    /// Parse `<vocab_count> <dimension>` followed by one `token x1 .. xd`
    /// line per word.
    pub fn read<R: BufRead>(language: Language, input: R) -> Result<Self, PairgenError> {
        let parse_err = |line: usize, message: String| PairgenError::Parse { line, message };
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `<vocab_count> <dimension>` header".into()))??;
        let mut fields = header.split_whitespace();
        let (count, dimension) = match (fields.next(), fields.next(), fields.next()) {
            (Some(c), Some(d), None) => (
                c.parse::<usize>()
                    .map_err(|e| parse_err(1, format!("bad vocab count: {e}")))?,
                d.parse::<usize>()
                    .map_err(|e| parse_err(1, format!("bad dimension: {e}")))?,
            ),
            _ => return Err(parse_err(1, format!("malformed header `{header}`"))),
        };
        if dimension == 0 {
            return Err(parse_err(1, "dimension must be positive".into()));
        }

        let mut table = EmbeddingTable::new(language, dimension);
        let mut rows = 0;
        let mut vector = Vec::with_capacity(dimension);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default();
            vector.clear();
            for part in parts {
                vector.push(
                    part.parse::<f64>()
                        .map_err(|e| parse_err(line_no, format!("bad component `{part}`: {e}")))?,
                );
            }
            if vector.len() != dimension {
                return Err(parse_err(
                    line_no,
                    format!("`{word}` has {} components, expected {dimension}", vector.len()),
                ));
            }
            table.insert(word, &vector)?;
            rows += 1;
        }
        if rows != count {
            return Err(parse_err(
                1,
                format!("header announces {count} vectors, file has {rows}"),
            ));
        }
        Ok(table)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn skipped_zero_norm(&self) -> usize {
        self.skipped_zero_norm
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.lookup.get(word).copied()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    /// Cosine between two stored rows, using cached norms.
    pub(crate) fn cosine_rows(&self, i: usize, j: usize) -> f64 {
        let dot: f64 = self
            .vector(i)
            .iter()
            .zip(self.vector(j))
            .map(|(x, y)| x * y)
            .sum();
        (dot / (self.norms[i] * self.norms[j])).clamp(-1.0, 1.0)
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, PairgenError> {
    if u.len() != v.len() {
        return Err(PairgenError::NumericDomain(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (x, y) in u.iter().zip(v) {
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(PairgenError::NumericDomain("zero-norm vector".into()));
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}
