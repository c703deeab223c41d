//! Line-oriented corpus snapshot.
//!
//! The first line is a JSON header carrying a magic string and a format
//! version; every following line is one JSON-encoded [`Sentence`]. Token and
//! stem lists are stored so a snapshot reloads identically even if the
//! stemmer implementation changes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::index::{CorpusBuilder, CorpusIndex, Sentence};
use super::CorpusError;
use crate::lang::Language;

pub const SNAPSHOT_MAGIC: &str = "blankcrack-corpus";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    language: Language,
    sentences: usize,
}

pub fn write_snapshot<W: Write>(index: &CorpusIndex, mut out: W) -> std::io::Result<()> {
    let header = Header {
        format: SNAPSHOT_MAGIC.to_string(),
        version: SNAPSHOT_VERSION,
        language: index.language(),
        sentences: index.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for sentence in index.sentences() {
        serde_json::to_writer(&mut out, sentence)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<CorpusIndex, CorpusError> {
    let bad = |line: usize, message: String| CorpusError::Snapshot { line, message };
    let mut lines = input.lines();

    let first = lines
        .next()
        .ok_or_else(|| bad(1, "empty snapshot".into()))?
        .map_err(|e| bad(1, e.to_string()))?;
    let header: Header =
        serde_json::from_str(&first).map_err(|e| bad(1, format!("bad header: {e}")))?;
    if header.format != SNAPSHOT_MAGIC {
        return Err(bad(1, format!("not a corpus snapshot (`{}`)", header.format)));
    }
    if header.version != SNAPSHOT_VERSION {
        return Err(bad(
            1,
            format!("unsupported snapshot version {}", header.version),
        ));
    }

    let mut builder = CorpusBuilder::new(header.language);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| bad(line_no, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let sentence: Sentence =
            serde_json::from_str(&line).map_err(|e| bad(line_no, e.to_string()))?;
        if sentence.id.0 as usize != builder.len() {
            return Err(bad(line_no, format!("unexpected sentence id {}", sentence.id)));
        }
        if sentence.language != header.language {
            return Err(bad(line_no, "sentence language differs from header".into()));
        }
        if sentence.tokens.is_empty() || sentence.tokens.len() != sentence.stems.len() {
            return Err(bad(line_no, "tokens and stems must be nonempty and aligned".into()));
        }
        builder.push_prepared(sentence);
    }
    if builder.len() != header.sentences {
        return Err(bad(
            builder.len() + 1,
            format!(
                "header announces {} sentences, found {}",
                header.sentences,
                builder.len()
            ),
        ));
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;
    use crate::lang::Genre;

    #[test]
    fn round_trip() {
        let index = CorpusIndex::from_lines(
            Language::Fr,
            Genre::Wikipedia,
            ["L'hyène rit.", "Un chacal court", "Le chat dort."],
        );
        let mut buf = Vec::new();
        write_snapshot(&index, &mut buf).unwrap();
        let back = read_snapshot(Cursor::new(&buf)).unwrap();
        assert_eq!(back.sentences(), index.sentences());
        assert_eq!(back.vocabulary(), index.vocabulary());
        assert_eq!(back.sentences_with_token("hyène"), index.sentences_with_token("hyène"));
    }

    #[test]
    fn rejects_foreign_files() {
        let err = read_snapshot(Cursor::new("{\"format\":\"x\",\"version\":1,\"language\":\"en\",\"sentences\":0}\n"))
            .unwrap_err();
        assert!(err.to_string().contains("not a corpus snapshot"));
        let err = read_snapshot(Cursor::new(format!(
            "{{\"format\":\"{SNAPSHOT_MAGIC}\",\"version\":99,\"language\":\"en\",\"sentences\":0}}\n"
        )))
        .unwrap_err();
        assert!(err.to_string().contains("version 99"));
    }

    #[test]
    fn detects_truncation() {
        let index = CorpusIndex::from_lines(Language::En, Genre::Books, ["a b", "c d"]);
        let mut buf = Vec::new();
        write_snapshot(&index, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(read_snapshot(Cursor::new(truncated)).is_err());
    }
}
