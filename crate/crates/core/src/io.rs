//! Plain-CSV file formats and run manifests.
//!
//! | file          | header                                              |
//! |---------------|-----------------------------------------------------|
//! | recording     | `t_us,Fz,Cz,Pz,PO7,PO8,Oz`                          |
//! | marker log    | `t_us,code`                                         |
//! | intents       | `epoch_idx,attended_led,command`                    |
//! | decision log  | `epoch_idx,ssvep_winner_hz,p300_winner,agreement,command` |
//!
//! Floats are written in shortest round-trip form, so a value read back is
//! bit-identical to the one written.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::EpochDecision;
use crate::stimulus::Intent;
use crate::types::{Command, MarkerCode, MarkerEvent, SampleFrame, CHANNELS, CHANNEL_COUNT, NO_DECISION};

pub const RECORDING_HEADER: &str = "t_us,Fz,Cz,Pz,PO7,PO8,Oz";
pub const MARKER_HEADER: &str = "t_us,code";
pub const INTENT_HEADER: &str = "epoch_idx,attended_led,command";
pub const DECISION_HEADER: &str = "epoch_idx,ssvep_winner_hz,p300_winner,agreement,command";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: line {line}: {message}")]
    Row { path: String, line: u64, message: String },
    #[error("{path}: expected header '{expected}', found '{found}'")]
    Header { path: String, expected: &'static str, found: String },
}

fn open(path: &Path) -> Result<BufReader<File>, DataError> {
    File::open(path).map(BufReader::new).map_err(|source| DataError::Io { path: path.display().to_string(), source })
}

pub fn create(path: &Path) -> Result<BufWriter<File>, DataError> {
    File::create(path).map(BufWriter::new).map_err(|source| DataError::Io { path: path.display().to_string(), source })
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.display().to_string(), source }
}

/// Streaming CSV reader that checks the header and reports 1-based line
/// numbers on malformed rows.
pub struct CsvRows<R: Read> {
    path: String,
    reader: csv::Reader<R>,
    record: csv::StringRecord,
}

impl<R: Read> CsvRows<R> {
    pub fn new(source: R, path: &str, expected: &'static str) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);
        let found = reader
            .headers()
            .map_err(|e| DataError::Row { path: path.to_string(), line: 1, message: e.to_string() })?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if found != expected {
            return Err(DataError::Header { path: path.to_string(), expected, found });
        }
        Ok(Self { path: path.to_string(), reader, record: csv::StringRecord::new() })
    }

    /// Next row as fields plus its line number.
    fn next_row(&mut self) -> Option<Result<(u64, Vec<String>), DataError>> {
        match self.reader.read_record(&mut self.record) {
            Ok(false) => None,
            Ok(true) => {
                let line = self.record.position().map_or(0, |p| p.line());
                Some(Ok((line, self.record.iter().map(str::to_string).collect())))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Some(Err(DataError::Row { path: self.path.clone(), line, message: e.to_string() }))
            }
        }
    }

    fn row_error(&self, line: u64, message: impl Into<String>) -> DataError {
        DataError::Row { path: self.path.clone(), line, message: message.into() }
    }
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, String> {
    field.parse().map_err(|_| format!("invalid {what} '{field}'"))
}

/// Streams [`SampleFrame`]s from a recording CSV.
pub struct RecordingReader<R: Read> {
    rows: CsvRows<R>,
}

impl RecordingReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, DataError> {
        Self::new(open(path)?, &path.display().to_string())
    }
}

impl<R: Read> RecordingReader<R> {
    pub fn new(source: R, name: &str) -> Result<Self, DataError> {
        Ok(Self { rows: CsvRows::new(source, name, RECORDING_HEADER)? })
    }
}

impl<R: Read> Iterator for RecordingReader<R> {
    type Item = Result<(u64, SampleFrame), DataError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, fields) = match self.rows.next_row()? {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let parsed = (|| {
            if fields.len() != 1 + CHANNEL_COUNT {
                return Err(format!("expected {} fields, found {}", 1 + CHANNEL_COUNT, fields.len()));
            }
            let t_us = parse::<i64>(&fields[0], "timestamp")?;
            let mut channels = [0.0; CHANNEL_COUNT];
            for (c, f) in channels.iter_mut().zip(&fields[1..]) {
                *c = parse::<f64>(f, "channel value")?;
            }
            Ok(SampleFrame::new(t_us, channels))
        })();
        Some(parsed.map(|f| (line, f)).map_err(|m| self.rows.row_error(line, m)))
    }
}

pub fn write_recording(path: &Path, frames: &[SampleFrame]) -> Result<(), DataError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "{RECORDING_HEADER}").map_err(&err)?;
    for f in frames {
        write!(w, "{}", f.t_us).map_err(&err)?;
        for v in f.channels {
            write!(w, ",{v}").map_err(&err)?;
        }
        writeln!(w).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn read_markers(path: &Path) -> Result<Vec<MarkerEvent>, DataError> {
    read_markers_from(open(path)?, &path.display().to_string())
}

pub fn read_markers_from<R: Read>(source: R, name: &str) -> Result<Vec<MarkerEvent>, DataError> {
    let mut rows = CsvRows::new(source, name, MARKER_HEADER)?;
    let mut out: Vec<MarkerEvent> = Vec::new();
    while let Some(row) = rows.next_row() {
        let (line, fields) = row?;
        let parsed = (|| {
            if fields.len() != 2 {
                return Err(format!("expected 2 fields, found {}", fields.len()));
            }
            let t_us = parse::<i64>(&fields[0], "timestamp")?;
            let code = fields[1].parse::<MarkerCode>()?;
            Ok(MarkerEvent::new(code, t_us))
        })()
        .map_err(|m| rows.row_error(line, m))?;
        if out.last().is_some_and(|prev| parsed.t_us < prev.t_us) {
            return Err(rows.row_error(line, "marker timestamps must be non-decreasing"));
        }
        out.push(parsed);
    }
    Ok(out)
}

pub fn write_markers(path: &Path, markers: &[MarkerEvent]) -> Result<(), DataError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "{MARKER_HEADER}").map_err(&err)?;
    for m in markers {
        writeln!(w, "{},{}", m.t_us, m.code).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_intents(path: &Path, intents: &[Intent]) -> Result<(), DataError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "{INTENT_HEADER}").map_err(&err)?;
    for i in intents {
        writeln!(w, "{},{},{}", i.epoch_index, i.led_id, i.command).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// `(epoch_idx, command)` pairs from an intent CSV.
pub fn read_intents(path: &Path) -> Result<Vec<(u64, Command)>, DataError> {
    let mut rows = CsvRows::new(open(path)?, &path.display().to_string(), INTENT_HEADER)?;
    let mut out = Vec::new();
    while let Some(row) = rows.next_row() {
        let (line, fields) = row?;
        let parsed = (|| {
            if fields.len() != 3 {
                return Err(format!("expected 3 fields, found {}", fields.len()));
            }
            let idx = parse::<u64>(&fields[0], "epoch index")?;
            parse::<u8>(&fields[1], "LED id")?;
            Ok((idx, fields[2].parse::<Command>()?))
        })()
        .map_err(|m| rows.row_error(line, m))?;
        out.push(parsed);
    }
    Ok(out)
}

/// Decision log row as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRow {
    pub epoch_index: u64,
    pub ssvep_winner_hz: Option<f64>,
    pub p300_winner: Option<MarkerCode>,
    pub agreement: bool,
    /// `None` for any `NoDecision` variant.
    pub command: Option<Command>,
}

pub fn format_decision_row(d: &EpochDecision) -> String {
    let dec = &d.decision;
    format!(
        "{},{},{},{},{}",
        d.epoch_index,
        dec.ssvep_winner_hz.map(|f| f.to_string()).unwrap_or_default(),
        dec.p300_winner.map(|c| c.to_string()).unwrap_or_default(),
        dec.agreement,
        dec.command_label()
    )
}

pub fn write_decisions(path: &Path, decisions: &[EpochDecision]) -> Result<(), DataError> {
    let mut w = create(path)?;
    let err = write_err(path);
    writeln!(w, "{DECISION_HEADER}").map_err(&err)?;
    for d in decisions {
        writeln!(w, "{}", format_decision_row(d)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn read_decisions(path: &Path) -> Result<Vec<DecisionRow>, DataError> {
    let mut rows = CsvRows::new(open(path)?, &path.display().to_string(), DECISION_HEADER)?;
    let mut out = Vec::new();
    while let Some(row) = rows.next_row() {
        let (line, fields) = row?;
        let parsed = (|| {
            if fields.len() != 5 {
                return Err(format!("expected 5 fields, found {}", fields.len()));
            }
            let opt = |s: &str| if s.is_empty() { None } else { Some(s.to_string()) };
            let command = if fields[4].starts_with(NO_DECISION) { None } else { Some(fields[4].parse::<Command>()?) };
            Ok(DecisionRow {
                epoch_index: parse(&fields[0], "epoch index")?,
                ssvep_winner_hz: opt(&fields[1]).map(|s| parse::<f64>(&s, "frequency")).transpose()?,
                p300_winner: opt(&fields[2]).map(|s| s.parse::<MarkerCode>()).transpose()?,
                agreement: parse(&fields[3], "agreement flag")?,
                command,
            })
        })()
        .map_err(|m| rows.row_error(line, m))?;
        out.push(parsed);
    }
    Ok(out)
}

/// Record of one CLI run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    /// Seconds since the Unix epoch; the only field that varies between reruns.
    pub created_unix_s: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: &[String]) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            args: args.to_vec(),
            config: None,
            seed: None,
            rng: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), DataError> {
        let mut w = create(path)?;
        let err = write_err(path);
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| err(e.into()))?;
        writeln!(w).map_err(&err)?;
        w.flush().map_err(&err)
    }

    pub fn read(path: &Path) -> Result<Self, DataError> {
        serde_json::from_reader(open(path)?)
            .map_err(|e| DataError::Row { path: path.display().to_string(), line: e.line() as u64, message: e.to_string() })
    }
}

/// Names of the recording columns, in file order.
pub fn channel_names() -> [&'static str; CHANNEL_COUNT] {
    CHANNELS.map(|c| c.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_channel_order() {
        assert_eq!(format!("t_us,{}", channel_names().join(",")), RECORDING_HEADER);
    }

    #[test]
    fn recording_reader_reports_line_numbers() {
        let text = "t_us,Fz,Cz,Pz,PO7,PO8,Oz\n0,1,2,3,4,5,6\n4000,1,2,x,4,5,6\n";
        let rows: Vec<_> = RecordingReader::new(text.as_bytes(), "mem").unwrap().collect();
        assert_eq!(rows[0].as_ref().unwrap().1, SampleFrame::new(0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        match &rows[1] {
            Err(DataError::Row { line, .. }) => assert_eq!(*line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(matches!(
            RecordingReader::new("t,a\n".as_bytes(), "mem").err(),
            Some(DataError::Header { .. })
        ));
    }

    #[test]
    fn markers_parse_and_must_be_ordered() {
        let m = read_markers_from("t_us,code\n10,o\n20,r\n".as_bytes(), "mem").unwrap();
        assert_eq!(m, vec![MarkerEvent::new(MarkerCode::O, 10), MarkerEvent::new(MarkerCode::R, 20)]);
        assert!(read_markers_from("t_us,code\n10,x\n".as_bytes(), "mem").is_err());
        assert!(read_markers_from("t_us,code\n10,o\n5,p\n".as_bytes(), "mem").is_err());
    }
}
