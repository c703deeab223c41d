//! CSV export of annotation records, the input of the stats and agreement
//! reports.

use std::io::{Read, Write};

use crate::scoring::AnnotationRecord;

pub const LOG_HEADER: [&str; 12] = [
    "id",
    "riddle_id",
    "player_id",
    "pair_id",
    "language",
    "pair_origin",
    "choice",
    "correct",
    "elapsed_ms",
    "k",
    "points",
    "timestamp",
];

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("annotation log header mismatch: expected `{}`, found `{found}`", LOG_HEADER.join(","))]
    Header { found: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A malformed row, kept so reports can say what they skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct AnnotationLog {
    pub records: Vec<AnnotationRecord>,
    pub rejects: Vec<RejectedRow>,
}

impl AnnotationLog {
    pub fn from_records(records: Vec<AnnotationRecord>) -> Self {
        AnnotationLog {
            records,
            rejects: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn write_log<'a, W, I>(records: I, out: W) -> Result<(), LogError>
where
    W: Write,
    I: IntoIterator<Item = &'a AnnotationRecord>,
{
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(LOG_HEADER)?;
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read a log. Rows that fail to parse or violate record invariants are
/// skipped and listed in [`AnnotationLog::rejects`].
pub fn read_log<R: Read>(input: R) -> Result<AnnotationLog, LogError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(LOG_HEADER) {
        return Err(LogError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut log = AnnotationLog::default();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                log.rejects.push(RejectedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match row.deserialize::<AnnotationRecord>(Some(&header)) {
            Ok(record) => match record.validate() {
                Ok(()) => log.records.push(record),
                Err(reason) => log.rejects.push(RejectedRow { line, reason }),
            },
            Err(e) => log.rejects.push(RejectedRow {
                line,
                reason: e.to_string(),
            }),
        }
    }
    Ok(log)
}
