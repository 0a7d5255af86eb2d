//! Reading `id,n,mx,ma,mxa` table files.

use std::io::Read;

use fisher_bounds::{ContingencyTable, Error};

use crate::{CliError, Result};

pub const INPUT_HEADER: [&str; 5] = ["id", "n", "mx", "ma", "mxa"];

/// Reason code for rows that could not be parsed at all.
pub const PARSE_ERROR: &str = "PARSE_ERROR";

/// One input record. `counts` holds the parse failure for malformed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InputRow {
    /// 1-based line number in the input file.
    pub line: u64,
    pub id: String,
    pub counts: std::result::Result<[u64; 4], String>,
}

impl InputRow {
    /// The validated table, or a reason code and message.
    pub fn table(&self, negate: bool) -> std::result::Result<ContingencyTable, RowError> {
        let [n, mx, ma, mxa] = self.counts.clone().map_err(|detail| RowError {
            reason: PARSE_ERROR,
            detail,
        })?;
        let table = ContingencyTable::new(n, mx, ma, mxa).map_err(RowError::from)?;
        Ok(if negate {
            table.negate_consequent()
        } else {
            table
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub reason: &'static str,
    pub detail: String,
}

impl From<Error> for RowError {
    fn from(e: Error) -> Self {
        RowError {
            reason: e.code(),
            detail: e.to_string(),
        }
    }
}

pub fn read_rows<R: Read>(mut input: R) -> Result<Vec<InputRow>> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    // the reader's own line counter is off by one after CRLF terminators, and
    // a record position may point at the `\n` of the previous CRLF
    let line_at = |pos: Option<&csv::Position>, fallback: u64| {
        pos.map_or(fallback, |p| {
            let end = (p.byte() as usize + 1).min(data.len());
            1 + data[..end].iter().filter(|&&b| b == b'\n').count() as u64
        })
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(data.as_slice());
    let header = reader.headers()?.clone();
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != INPUT_HEADER {
        return Err(CliError::Validation(format!(
            "expected header `{}`, found `{}`",
            INPUT_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let start = reader.position().clone();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = line_at(record.position(), start.line());
                rows.push(parse_record(line, &record));
            }
            Err(e) => {
                // invalid UTF-8 and similar record-level failures
                let line = line_at(e.position().or(Some(&start)), start.line());
                rows.push(InputRow {
                    line,
                    id: String::new(),
                    counts: Err(e.to_string()),
                });
            }
        }
    }
    Ok(rows)
}

fn parse_record(line: u64, record: &csv::StringRecord) -> InputRow {
    let id = record.get(0).unwrap_or_default().to_string();
    let counts = if record.len() != INPUT_HEADER.len() {
        Err(format!(
            "expected {} fields, found {}",
            INPUT_HEADER.len(),
            record.len()
        ))
    } else {
        let mut counts = [0u64; 4];
        let mut failure = None;
        for (slot, (name, field)) in counts
            .iter_mut()
            .zip(INPUT_HEADER[1..].iter().zip(record.iter().skip(1)))
        {
            match field.parse::<u64>() {
                Ok(v) => *slot = v,
                Err(_) => {
                    failure = Some(format!(
                        "field `{name}` is not a non-negative integer: `{field}`"
                    ));
                    break;
                }
            }
        }
        failure.map_or(Ok(counts), Err)
    };
    InputRow { line, id, counts }
}
