use std::fmt;

use rust_stemmers::Algorithm;

use crate::lang::Language;

/// Snowball suffix-stripping stemmer for one language.
///
/// `stem(x) == stem(y)` is the "same word stem" relation used to exclude
/// foil variants from riddle sentences.
pub struct Stemmer {
    language: Language,
    inner: rust_stemmers::Stemmer,
}

impl Stemmer {
    pub fn new(language: Language) -> Self {
        let algorithm = match language {
            Language::En => Algorithm::English,
            Language::Es => Algorithm::Spanish,
            Language::Fr => Algorithm::French,
            Language::It => Algorithm::Italian,
            Language::Ru => Algorithm::Russian,
        };
        Stemmer {
            language,
            inner: rust_stemmers::Stemmer::create(algorithm),
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Stem of a lowercase token. Punctuation and numbers pass through.
    pub fn stem(&self, token: &str) -> String {
        if !token.chars().any(char::is_alphabetic) {
            return token.to_string();
        }
        let stem = self.inner.stem(token);
        if stem.is_empty() {
            token.to_string()
        } else {
            stem.into_owned()
        }
    }

    pub fn same_stem(&self, a: &str, b: &str) -> bool {
        self.stem(a) == self.stem(b)
    }
}

impl fmt::Debug for Stemmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stemmer")
            .field("language", &self.language)
            .finish()
    }
}
