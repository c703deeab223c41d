use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use blankcrack_core::cstp::DEFAULT_TIE_TOLERANCE;
use blankcrack_core::riddle::{is_valid_k, DEFAULT_K};
use blankcrack_core::scoring::DEFAULT_TIME_THRESHOLD_MS;
use blankcrack_core::stats::{DEFAULT_BINS, DEFAULT_MIN_ANNOTATIONS};
use blankcrack_core::{Genre, Language};
use serde::{Deserialize, Serialize};

use crate::auth::DEFAULT_PASSWORD_ROUNDS;

pub const DEFAULT_RIDDLE_TTL_SECS: u64 = 24 * 60 * 60;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Service configuration, usually read from a TOML file.
///
/// ```toml
/// listen = "127.0.0.1:8080"
/// journal = "var/events.jsonl"
/// default_k = 5
/// time_threshold_secs = 180
///
/// [[languages]]
/// code = "en"
/// series = "data/series/en.txt"
/// corpus = [{ path = "corpora/en/wiki.txt", genre = "wikipedia" }]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Event journal; `None` keeps everything in memory.
    pub journal: Option<PathBuf>,
    /// Flush journal writes to disk before acknowledging them.
    pub fsync: bool,
    pub default_k: usize,
    pub time_threshold_secs: u64,
    pub riddle_ttl_secs: u64,
    pub tie_tolerance: f64,
    pub histogram_bins: usize,
    pub min_annotations: usize,
    pub password_rounds: u32,
    /// Seed for riddle sampling; random when absent.
    pub seed: Option<u64>,
    pub languages: Vec<LanguageConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageConfig {
    pub code: Language,
    /// Plain-text sentence files, one sentence per line.
    #[serde(default)]
    pub corpus: Vec<CorpusFile>,
    /// Prebuilt index written by `blankcrack ingest`.
    pub snapshot: Option<PathBuf>,
    /// Manual series file used to seed pairs on first start.
    pub series: Option<PathBuf>,
    /// Mined pairs (JSON lines) imported on first start.
    pub pairs: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub genre: Genre,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            journal: None,
            fsync: true,
            default_k: DEFAULT_K,
            time_threshold_secs: (DEFAULT_TIME_THRESHOLD_MS / 1000) as u64,
            riddle_ttl_secs: DEFAULT_RIDDLE_TTL_SECS,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            histogram_bins: DEFAULT_BINS,
            min_annotations: DEFAULT_MIN_ANNOTATIONS,
            password_rounds: DEFAULT_PASSWORD_ROUNDS,
            seed: None,
            languages: Vec::new(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ServiceConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Load a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(j) = self.journal.as_mut() {
            fix(j);
        }
        for lang in &mut self.languages {
            lang.corpus.iter_mut().for_each(|c| fix(&mut c.path));
            [&mut lang.snapshot, &mut lang.series, &mut lang.pairs]
                .into_iter()
                .flatten()
                .for_each(fix);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !is_valid_k(self.default_k) {
            return Err(ConfigError::Invalid(format!(
                "default_k must be 1, 3 or 5 (got {})",
                self.default_k
            )));
        }
        if self.histogram_bins == 0 || self.min_annotations == 0 {
            return Err(ConfigError::Invalid(
                "histogram_bins and min_annotations must be positive".into(),
            ));
        }
        if !(self.tie_tolerance.is_finite() && self.tie_tolerance >= 0.0) {
            return Err(ConfigError::Invalid("tie_tolerance must be nonnegative".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for lang in &self.languages {
            if !seen.insert(lang.code) {
                return Err(ConfigError::Invalid(format!("language {} listed twice", lang.code)));
            }
            if lang.snapshot.is_some() && !lang.corpus.is_empty() {
                return Err(ConfigError::Invalid(format!(
                    "language {}: give either a snapshot or corpus files",
                    lang.code
                )));
            }
        }
        Ok(())
    }

    pub fn time_threshold_ms(&self) -> i64 {
        self.time_threshold_secs as i64 * 1000
    }

    pub fn riddle_ttl_ms(&self) -> i64 {
        self.riddle_ttl_secs as i64 * 1000
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let c = ServiceConfig::from_toml(
            r#"
            listen = "0.0.0.0:9000"
            journal = "var/events.jsonl"
            default_k = 3
            time_threshold_secs = 120
            tie_tolerance = 1e-6
            histogram_bins = 20

            [[languages]]
            code = "fr"
            series = "data/series/fr.txt"
            corpus = [{ path = "fr.txt", genre = "books" }]
            "#,
        )
        .unwrap();
        assert_eq!(c.default_k, 3);
        assert_eq!(c.time_threshold_ms(), 120_000);
        assert_eq!(c.languages[0].code, Language::Fr);
        assert_eq!(c.languages[0].corpus[0].genre, Genre::Books);
        assert_eq!(c.riddle_ttl_secs, DEFAULT_RIDDLE_TTL_SECS);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ServiceConfig::from_toml("default_k = 4").is_err());
        assert!(ServiceConfig::from_toml("bogus = 1").is_err());
        assert!(ServiceConfig::from_toml("[[languages]]\ncode = \"de\"").is_err());
    }
}
