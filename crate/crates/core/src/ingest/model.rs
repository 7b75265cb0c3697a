use serde::{Deserialize, Serialize};

use crate::features::Modality;
use crate::timeline::Epoch;

/// Milliseconds since the Unix epoch, UTC.
pub type TimestampMs = i64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    pub t: TimestampMs,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AccelSample {
    pub fn magnitude(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub t: TimestampMs,
    pub lat: f64,
    pub lon: f64,
    pub accuracy_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CallDirection {
    In,
    Out,
}

impl CallDirection {
    pub fn token(self) -> &'static str {
        match self {
            CallDirection::In => "in",
            CallDirection::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallRecord {
    pub t: TimestampMs,
    pub direction: CallDirection,
    pub duration_s: f64,
    /// Opaque contact hash.
    pub contact: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoiceFeatureRow {
    pub call_id: String,
    pub t: TimestampMs,
    /// One value per column of the patient's voice schema.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamRecord {
    pub date: Epoch,
    /// Mental-state score in `-3..=3`.
    pub score: i32,
}

/// All streams and exam records of one patient. Streams are sorted by time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatientDataset {
    pub patient_id: String,
    pub utc_offset_minutes: i32,
    pub accel: Vec<AccelSample>,
    pub gps: Vec<GpsFix>,
    pub calls: Vec<CallRecord>,
    /// Voice feature column names, in file order.
    pub voice_schema: Vec<String>,
    pub voice: Vec<VoiceFeatureRow>,
    pub exams: Vec<ExamRecord>,
}

impl PatientDataset {
    /// Modalities with at least one record.
    pub fn available_modalities(&self) -> Vec<Modality> {
        let mut out = Vec::new();
        if !self.accel.is_empty() {
            out.push(Modality::Accel);
        }
        if !self.gps.is_empty() {
            out.push(Modality::Gps);
        }
        if !self.calls.is_empty() {
            out.push(Modality::Phone);
        }
        if !self.voice.is_empty() && !self.voice_schema.is_empty() {
            out.push(Modality::Sound);
        }
        out
    }

    /// Local days covered by any stream, ascending.
    pub fn data_days(&self) -> Vec<Epoch> {
        let off = self.utc_offset_minutes;
        let mut days: Vec<Epoch> = self
            .accel
            .iter()
            .map(|s| s.t)
            .chain(self.gps.iter().map(|f| f.t))
            .chain(self.calls.iter().map(|c| c.t))
            .chain(self.voice.iter().map(|v| v.t))
            .map(|t| Epoch::of_instant(t, off))
            .collect();
        days.sort_unstable();
        days.dedup();
        days
    }
}
