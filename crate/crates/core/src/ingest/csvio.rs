use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use super::model::*;
use crate::config::StudyConfig;
use crate::timeline::Epoch;

pub const ACCEL_FILE: &str = "accel.csv";
pub const GPS_FILE: &str = "gps.csv";
pub const CALLS_FILE: &str = "calls.csv";
pub const VOICE_FILE: &str = "voice.csv";
pub const EXAMS_FILE: &str = "exams.csv";

const ACCEL_HEADER: &[&str] = &["t", "x", "y", "z"];
const GPS_HEADER: &[&str] = &["t", "lat", "lon", "accuracy_m"];
const CALLS_HEADER: &[&str] = &["t", "direction", "duration_s", "contact"];
const EXAMS_HEADER: &[&str] = &["date", "score"];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: required file is missing")]
    MissingExams { path: PathBuf },

    #[error("{file}:{line}: header mismatch, expected `{expected}`, found `{found}`")]
    Header { file: PathBuf, line: u64, expected: String, found: String },

    #[error("{file}:{line}: column `{column}`: {message}")]
    Parse { file: PathBuf, line: u64, column: String, message: String },

    #[error("{file}:{line}: exam score {score} outside -3..=3")]
    ScoreRange { file: PathBuf, line: u64, score: i64 },

    #[error("{file}:{line}: exam date {date} does not follow the previous exam")]
    ExamOrder { file: PathBuf, line: u64, date: String },
}

impl LoadError {
    /// Stable code shared with [`super::ViolationCode`].
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "IO_ERROR",
            LoadError::MissingExams { .. } => "EXAMS_MISSING",
            LoadError::Header { .. } => "HEADER_MISMATCH",
            LoadError::Parse { .. } => "PARSE_ERROR",
            LoadError::ScoreRange { .. } => "EXAM_SCORE_RANGE",
            LoadError::ExamOrder { .. } => "EXAMS_UNSORTED",
        }
    }
}

/// Parses an RFC 3339 timestamp into UTC milliseconds.
pub fn parse_timestamp(s: &str) -> Option<TimestampMs> {
    DateTime::parse_from_rfc3339(s).ok().map(|dt| dt.timestamp_millis())
}

/// Formats UTC milliseconds as RFC 3339 with millisecond precision and a `Z` suffix.
pub fn format_timestamp(t: TimestampMs) -> String {
    DateTime::<Utc>::from_timestamp_millis(t)
        .expect("timestamp within chrono's range")
        .to_rfc3339_opts(SecondsFormat::Millis, true)
}

struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table(path: &Path) -> Result<Option<Table>, LoadError> {
    let text = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(LoadError::Io { path: path.to_path_buf(), source }),
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_slice());
    let mut header = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            LoadError::Parse { file: path.to_path_buf(), line, column: String::new(), message: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if header.is_none() {
            header = Some(rec.iter().map(str::to_owned).collect::<Vec<_>>());
        } else {
            rows.push((line, rec));
        }
    }
    let header = header.unwrap_or_default();
    Ok(Some(Table { path: path.to_path_buf(), header, rows }))
}

impl Table {
    fn expect_header(&self, expected: &[&str]) -> Result<(), LoadError> {
        if self.header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(LoadError::Header {
                file: self.path.clone(),
                line: 1,
                expected: expected.join(","),
                found: self.header.join(","),
            });
        }
        Ok(())
    }

    fn parse_err(&self, line: u64, column: &str, message: impl Into<String>) -> LoadError {
        LoadError::Parse { file: self.path.clone(), line, column: column.to_owned(), message: message.into() }
    }

    fn check_width(&self, line: u64, rec: &csv::StringRecord) -> Result<(), LoadError> {
        if rec.len() != self.header.len() {
            return Err(self.parse_err(
                line,
                "",
                format!("expected {} fields, found {}", self.header.len(), rec.len()),
            ));
        }
        Ok(())
    }

    fn timestamp(&self, line: u64, rec: &csv::StringRecord, idx: usize) -> Result<TimestampMs, LoadError> {
        parse_timestamp(&rec[idx]).ok_or_else(|| {
            self.parse_err(line, &self.header[idx], format!("invalid RFC 3339 timestamp {:?}", &rec[idx]))
        })
    }

    fn real(&self, line: u64, rec: &csv::StringRecord, idx: usize) -> Result<f64, LoadError> {
        rec[idx]
            .parse::<f64>()
            .map_err(|_| self.parse_err(line, &self.header[idx], format!("invalid number {:?}", &rec[idx])))
    }
}

fn parse_accel(table: &Table) -> Result<Vec<AccelSample>, LoadError> {
    table.expect_header(ACCEL_HEADER)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        table.check_width(*line, rec)?;
        out.push(AccelSample {
            t: table.timestamp(*line, rec, 0)?,
            x: table.real(*line, rec, 1)?,
            y: table.real(*line, rec, 2)?,
            z: table.real(*line, rec, 3)?,
        });
    }
    Ok(out)
}

fn parse_gps(table: &Table) -> Result<Vec<GpsFix>, LoadError> {
    table.expect_header(GPS_HEADER)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        table.check_width(*line, rec)?;
        out.push(GpsFix {
            t: table.timestamp(*line, rec, 0)?,
            lat: table.real(*line, rec, 1)?,
            lon: table.real(*line, rec, 2)?,
            accuracy_m: table.real(*line, rec, 3)?,
        });
    }
    Ok(out)
}

fn parse_calls(table: &Table) -> Result<Vec<CallRecord>, LoadError> {
    table.expect_header(CALLS_HEADER)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        table.check_width(*line, rec)?;
        let direction = match &rec[1] {
            "in" => CallDirection::In,
            "out" => CallDirection::Out,
            other => {
                return Err(table.parse_err(*line, "direction", format!("expected `in` or `out`, found {other:?}")))
            }
        };
        out.push(CallRecord {
            t: table.timestamp(*line, rec, 0)?,
            direction,
            duration_s: table.real(*line, rec, 2)?,
            contact: rec[3].to_owned(),
        });
    }
    Ok(out)
}

fn parse_voice(table: &Table) -> Result<(Vec<String>, Vec<VoiceFeatureRow>), LoadError> {
    if table.header.len() < 2 || table.header[0] != "call_id" || table.header[1] != "t" {
        return Err(LoadError::Header {
            file: table.path.clone(),
            line: 1,
            expected: "call_id,t,<feature columns...>".into(),
            found: table.header.join(","),
        });
    }
    let schema = table.header[2..].to_vec();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        table.check_width(*line, rec)?;
        let values = (2..rec.len()).map(|i| table.real(*line, rec, i)).collect::<Result<Vec<_>, _>>()?;
        out.push(VoiceFeatureRow { call_id: rec[0].to_owned(), t: table.timestamp(*line, rec, 1)?, values });
    }
    Ok((schema, out))
}

fn parse_exams(table: &Table) -> Result<Vec<ExamRecord>, LoadError> {
    table.expect_header(EXAMS_HEADER)?;
    let mut out: Vec<ExamRecord> = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        table.check_width(*line, rec)?;
        let date = Epoch::parse(&rec[0])
            .ok_or_else(|| table.parse_err(*line, "date", format!("invalid date {:?}", &rec[0])))?;
        let score: i64 =
            rec[1].parse().map_err(|_| table.parse_err(*line, "score", format!("invalid integer {:?}", &rec[1])))?;
        if !(-3..=3).contains(&score) {
            return Err(LoadError::ScoreRange { file: table.path.clone(), line: *line, score });
        }
        if out.last().is_some_and(|prev| prev.date >= date) {
            return Err(LoadError::ExamOrder { file: table.path.clone(), line: *line, date: rec[0].to_owned() });
        }
        out.push(ExamRecord { date, score: score as i32 });
    }
    Ok(out)
}

/// Loads `dir` as a patient directory. Missing stream files yield empty
/// streams; `exams.csv` is required. Out-of-order rows are stably sorted.
pub fn load_patient(dir: &Path, cfg: &StudyConfig) -> Result<PatientDataset, LoadError> {
    let patient_id = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let exams_path = dir.join(EXAMS_FILE);
    let exams = match read_table(&exams_path)? {
        Some(t) => parse_exams(&t)?,
        None => return Err(LoadError::MissingExams { path: exams_path }),
    };
    let mut accel = read_table(&dir.join(ACCEL_FILE))?.map(|t| parse_accel(&t)).transpose()?.unwrap_or_default();
    let mut gps = read_table(&dir.join(GPS_FILE))?.map(|t| parse_gps(&t)).transpose()?.unwrap_or_default();
    let mut calls = read_table(&dir.join(CALLS_FILE))?.map(|t| parse_calls(&t)).transpose()?.unwrap_or_default();
    let (voice_schema, mut voice) =
        read_table(&dir.join(VOICE_FILE))?.map(|t| parse_voice(&t)).transpose()?.unwrap_or_default();
    accel.sort_by_key(|s| s.t);
    gps.sort_by_key(|f| f.t);
    calls.sort_by_key(|c| c.t);
    voice.sort_by_key(|v| v.t);
    Ok(PatientDataset {
        utc_offset_minutes: cfg.offset_for(&patient_id),
        patient_id,
        accel,
        gps,
        calls,
        voice_schema,
        voice,
        exams,
    })
}

fn write_file(path: &Path, body: &str) -> io::Result<()> {
    fs::write(path, body.as_bytes())
}

/// Writes every stream of `ds` into `dir` in the canonical file format.
pub fn write_patient(ds: &PatientDataset, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut s = String::with_capacity(ds.accel.len() * 48 + 16);
    s.push_str("t,x,y,z\n");
    for a in &ds.accel {
        let _ = writeln!(s, "{},{},{},{}", format_timestamp(a.t), a.x, a.y, a.z);
    }
    write_file(&dir.join(ACCEL_FILE), &s)?;

    s.clear();
    s.push_str("t,lat,lon,accuracy_m\n");
    for g in &ds.gps {
        let _ = writeln!(s, "{},{},{},{}", format_timestamp(g.t), g.lat, g.lon, g.accuracy_m);
    }
    write_file(&dir.join(GPS_FILE), &s)?;

    s.clear();
    s.push_str("t,direction,duration_s,contact\n");
    for c in &ds.calls {
        let _ = writeln!(s, "{},{},{},{}", format_timestamp(c.t), c.direction.token(), c.duration_s, c.contact);
    }
    write_file(&dir.join(CALLS_FILE), &s)?;

    s.clear();
    s.push_str("call_id,t");
    for name in &ds.voice_schema {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for v in &ds.voice {
        let _ = write!(s, "{},{}", v.call_id, format_timestamp(v.t));
        for x in &v.values {
            let _ = write!(s, ",{x}");
        }
        s.push('\n');
    }
    write_file(&dir.join(VOICE_FILE), &s)?;

    s.clear();
    s.push_str("date,score\n");
    for e in &ds.exams {
        let _ = writeln!(s, "{},{}", e.date, e.score);
    }
    write_file(&dir.join(EXAMS_FILE), &s)
}
