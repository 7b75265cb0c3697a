use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::model::PatientDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    OffsetRange,
    AccelNonfinite,
    AccelMagnitude,
    GpsRange,
    GpsAccuracy,
    CallDuration,
    VoiceSchema,
    VoiceNonfinite,
    ExamScoreRange,
    ExamsUnsorted,
    ExamsTooFew,
    StreamUnsorted,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::OffsetRange => "OFFSET_RANGE",
            ViolationCode::AccelNonfinite => "ACCEL_NONFINITE",
            ViolationCode::AccelMagnitude => "ACCEL_MAGNITUDE",
            ViolationCode::GpsRange => "GPS_RANGE",
            ViolationCode::GpsAccuracy => "GPS_ACCURACY",
            ViolationCode::CallDuration => "CALL_DURATION",
            ViolationCode::VoiceSchema => "VOICE_SCHEMA",
            ViolationCode::VoiceNonfinite => "VOICE_NONFINITE",
            ViolationCode::ExamScoreRange => "EXAM_SCORE_RANGE",
            ViolationCode::ExamsUnsorted => "EXAMS_UNSORTED",
            ViolationCode::ExamsTooFew => "EXAMS_TOO_FEW",
            ViolationCode::StreamUnsorted => "STREAM_UNSORTED",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// `stream[index]` or `dataset`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.location, self.message)
    }
}

/// Maximum plausible accelerometer magnitude, m/s².
pub const MAX_ACCEL_MAGNITUDE: f64 = 160.0;

/// Lists every invariant violation of `ds`. Violations are ordered by stream,
/// then by record index.
pub fn validate(ds: &PatientDataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, location: String, message: String| out.push(Violation { code, location, message });

    if !(-720..=840).contains(&ds.utc_offset_minutes) {
        push(
            ViolationCode::OffsetRange,
            "dataset".into(),
            format!("UTC offset {} min outside [-720, 840]", ds.utc_offset_minutes),
        );
    }

    for (i, a) in ds.accel.iter().enumerate() {
        if ![a.x, a.y, a.z].iter().all(|v| v.is_finite()) {
            push(ViolationCode::AccelNonfinite, format!("accel[{i}]"), "non-finite component".into());
        } else if a.magnitude() > MAX_ACCEL_MAGNITUDE {
            push(
                ViolationCode::AccelMagnitude,
                format!("accel[{i}]"),
                format!("magnitude {:.3} exceeds {MAX_ACCEL_MAGNITUDE}", a.magnitude()),
            );
        }
    }
    if ds.accel.windows(2).any(|w| w[0].t > w[1].t) {
        push(ViolationCode::StreamUnsorted, "accel".into(), "samples not sorted by time".into());
    }

    for (i, g) in ds.gps.iter().enumerate() {
        if !(g.lat.is_finite()
            && (-90.0..=90.0).contains(&g.lat)
            && g.lon.is_finite()
            && (-180.0..=180.0).contains(&g.lon))
        {
            push(
                ViolationCode::GpsRange,
                format!("gps[{i}]"),
                format!("coordinate ({}, {}) out of range", g.lat, g.lon),
            );
        }
        if !(g.accuracy_m.is_finite() && g.accuracy_m >= 0.0) {
            push(
                ViolationCode::GpsAccuracy,
                format!("gps[{i}]"),
                format!("accuracy {} must be finite and >= 0", g.accuracy_m),
            );
        }
    }
    if ds.gps.windows(2).any(|w| w[0].t > w[1].t) {
        push(ViolationCode::StreamUnsorted, "gps".into(), "fixes not sorted by time".into());
    }

    for (i, c) in ds.calls.iter().enumerate() {
        if !(c.duration_s.is_finite() && c.duration_s >= 0.0) {
            push(
                ViolationCode::CallDuration,
                format!("calls[{i}]"),
                format!("duration {} must be finite and >= 0", c.duration_s),
            );
        }
    }
    if ds.calls.windows(2).any(|w| w[0].t > w[1].t) {
        push(ViolationCode::StreamUnsorted, "calls".into(), "calls not sorted by time".into());
    }

    let mut names = BTreeSet::new();
    for name in &ds.voice_schema {
        if !names.insert(name.as_str()) {
            push(ViolationCode::VoiceSchema, "voice".into(), format!("duplicate feature column {name:?}"));
        }
    }
    for (i, v) in ds.voice.iter().enumerate() {
        if v.values.len() != ds.voice_schema.len() {
            push(
                ViolationCode::VoiceSchema,
                format!("voice[{i}]"),
                format!("{} values for {} columns", v.values.len(), ds.voice_schema.len()),
            );
        }
        if v.values.iter().any(|x| !x.is_finite()) {
            push(ViolationCode::VoiceNonfinite, format!("voice[{i}]"), "non-finite feature value".into());
        }
    }
    if ds.voice.windows(2).any(|w| w[0].t > w[1].t) {
        push(ViolationCode::StreamUnsorted, "voice".into(), "rows not sorted by time".into());
    }

    for (i, e) in ds.exams.iter().enumerate() {
        if !(-3..=3).contains(&e.score) {
            push(ViolationCode::ExamScoreRange, format!("exams[{i}]"), format!("score {} outside -3..=3", e.score));
        }
    }
    if ds.exams.windows(2).any(|w| w[0].date >= w[1].date) {
        push(ViolationCode::ExamsUnsorted, "exams".into(), "exam dates not strictly increasing".into());
    }
    if ds.exams.len() < 2 {
        push(
            ViolationCode::ExamsTooFew,
            "exams".into(),
            format!("{} exam(s); supervised analysis needs at least 2", ds.exams.len()),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ExamRecord, GpsFix};
    use crate::timeline::Epoch;

    fn base() -> PatientDataset {
        PatientDataset {
            patient_id: "p1".into(),
            exams: vec![ExamRecord { date: Epoch(10), score: 0 }, ExamRecord { date: Epoch(31), score: 1 }],
            gps: vec![GpsFix { t: 0, lat: 47.0, lon: 11.0, accuracy_m: 10.0 }],
            ..Default::default()
        }
    }

    #[test]
    fn well_formed_has_no_violations() {
        assert!(validate(&base()).is_empty());
    }

    #[test]
    fn latitude_95_flags_gps_range() {
        let mut ds = base();
        ds.gps[0].lat = 95.0;
        let v = validate(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::GpsRange);
        assert_eq!(v[0].location, "gps[0]");
    }

    #[test]
    fn single_exam_flags_too_few() {
        let mut ds = base();
        ds.exams.truncate(1);
        let codes: Vec<_> = validate(&ds).iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::ExamsTooFew]);
    }

    #[test]
    fn validate_is_pure() {
        let mut ds = base();
        ds.exams[1].score = 5;
        ds.utc_offset_minutes = 900;
        let before = ds.clone();
        let a = validate(&ds);
        let b = validate(&ds);
        assert_eq!(a, b);
        assert_eq!(ds, before);
        assert_eq!(a.len(), 2);
    }
}
