//! Append-only event journal, one JSON event per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use blankcrack_core::scoring::{AnnotationRecord, PairDifficulty};
use blankcrack_core::{Language, PairId, PairState, PlayerId, Riddle, WordPair};
use serde::{Deserialize, Serialize};

use crate::auth::PasswordHash;
use crate::state::{CompetitionSession, SessionId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    PlayerRegistered {
        player_id: PlayerId,
        username: String,
        password: PasswordHash,
        language: Language,
        k_setting: usize,
        created_at: i64,
    },
    SettingsChanged {
        player_id: PlayerId,
        k_setting: Option<usize>,
        language: Option<Language>,
    },
    FriendAdded {
        player_id: PlayerId,
        friend_id: PlayerId,
    },
    PairAdded {
        pair: WordPair,
    },
    PairStateChanged {
        pair_id: PairId,
        state: PairState,
    },
    RiddleServed {
        riddle: Riddle,
        player_id: PlayerId,
        served_at: i64,
        expires_at: i64,
        difficulty: PairDifficulty,
        session_id: Option<SessionId>,
    },
    /// The transaction of one answer: the record carries everything scores
    /// and queues are derived from.
    AnnotationCommitted {
        record: AnnotationRecord,
        session_id: Option<SessionId>,
    },
    SessionCreated {
        session: CompetitionSession,
    },
    SessionClosed {
        session_id: SessionId,
        closed_at: i64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("journal {path}, line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Where committed events go.
#[derive(Debug)]
pub struct Journal {
    file: Option<(PathBuf, File)>,
    fsync: bool,
}

impl Journal {
    pub fn in_memory() -> Self {
        Journal {
            file: None,
            fsync: false,
        }
    }

    /// Open (or create) a journal file and return the events already in it.
    ///
    /// A final line without its newline is a write torn by a crash; it is
    /// dropped and cut from the file. Any other unreadable line is an error.
    pub fn open(path: &Path, fsync: bool) -> Result<(Journal, Vec<Event>), JournalError> {
        let io = |source| JournalError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;

        let (events, good_len, total_len) = read_events(path, &file)?;
        if good_len < total_len {
            tracing::warn!(path = %path.display(), dropped = total_len - good_len, "dropping torn journal tail");
            file.set_len(good_len).map_err(io)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io)?;
        Ok((
            Journal {
                file: Some((path.to_path_buf(), file)),
                fsync,
            },
            events,
        ))
    }

    pub fn append(&mut self, event: &Event) -> Result<(), JournalError> {
        let Some((path, file)) = self.file.as_mut() else {
            return Ok(());
        };
        let mut line = serde_json::to_vec(event).expect("events always serialize");
        line.push(b'\n');
        let io = |source| JournalError::Io {
            path: path.clone(),
            source,
        };
        file.write_all(&line).map_err(io)?;
        if self.fsync {
            file.sync_data().map_err(io)?;
        }
        Ok(())
    }
}

/// Parse every complete line; returns the events, the byte length they
/// occupy and the file length.
fn read_events(path: &Path, file: &File) -> Result<(Vec<Event>, u64, u64), JournalError> {
    let io = |source| JournalError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = BufReader::new(file.try_clone().map_err(io)?);
    reader.seek(SeekFrom::Start(0)).map_err(io)?;
    let mut events = Vec::new();
    let mut good = 0u64;
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(io)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if buf.last() != Some(&b'\n') {
            // torn tail
            break;
        }
        let text = &buf[..buf.len() - 1];
        if text.iter().all(u8::is_ascii_whitespace) {
            good += n as u64;
            continue;
        }
        let event = serde_json::from_slice(text).map_err(|e| JournalError::Corrupt {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        events.push(event);
        good += n as u64;
    }
    let total = file.metadata().map_err(io)?.len();
    Ok((events, good, total))
}

/// Parse journal text held in memory, with the same torn-tail rule.
pub fn parse_events(text: &str) -> Result<Vec<Event>, serde_json::Error> {
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    complete
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
