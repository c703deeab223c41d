//! Closed enumerations shared by every module: languages and corpus genres.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A supported corpus language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Es,
    Fr,
    It,
    Ru,
}

impl Language {
    pub const ALL: [Language; 5] = [
        Language::En,
        Language::Es,
        Language::Fr,
        Language::It,
        Language::Ru,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
            Language::Fr => "fr",
            Language::It => "it",
            Language::Ru => "ru",
        }
    }

    /// Languages whose orthography elides articles with an apostrophe
    /// (`l'hyène`, `l'amico`).
    pub fn has_elision(self) -> bool {
        matches!(self, Language::Fr | Language::It)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unsupported language code `{0}` (expected one of en, es, fr, it, ru)")]
pub struct UnsupportedLanguage(pub String);

impl FromStr for Language {
    type Err = UnsupportedLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "es" => Ok(Language::Es),
            "fr" => Ok(Language::Fr),
            "it" => Ok(Language::It),
            "ru" => Ok(Language::Ru),
            _ => Err(UnsupportedLanguage(s.to_string())),
        }
    }
}

/// Source genre of a corpus file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Wikipedia,
    Books,
    Parliamentary,
    Subtitles,
}

impl Genre {
    pub const ALL: [Genre; 4] = [
        Genre::Wikipedia,
        Genre::Books,
        Genre::Parliamentary,
        Genre::Subtitles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Genre::Wikipedia => "wikipedia",
            Genre::Books => "books",
            Genre::Parliamentary => "parliamentary",
            Genre::Subtitles => "subtitles",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown genre `{0}` (expected wikipedia, books, parliamentary or subtitles)")]
pub struct UnknownGenre(pub String);

impl FromStr for Genre {
    type Err = UnknownGenre;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Genre::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownGenre(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for lang in Language::ALL {
            assert_eq!(lang.code().parse::<Language>().unwrap(), lang);
        }
        for genre in Genre::ALL {
            assert_eq!(genre.name().parse::<Genre>().unwrap(), genre);
        }
        assert!("de".parse::<Language>().is_err());
        assert!("news".parse::<Genre>().is_err());
    }
}
