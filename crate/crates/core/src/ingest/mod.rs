//! On-disk patient datasets: one directory per patient holding
//! `accel.csv`, `gps.csv`, `calls.csv`, `voice.csv` and `exams.csv`.

mod csvio;
mod model;
mod validate;

pub use csvio::{
    format_timestamp, load_patient, parse_timestamp, write_patient, LoadError, ACCEL_FILE, CALLS_FILE, EXAMS_FILE,
    GPS_FILE, VOICE_FILE,
};
pub use model::{
    AccelSample, CallDirection, CallRecord, ExamRecord, GpsFix, PatientDataset, TimestampMs, VoiceFeatureRow,
};
pub use validate::{validate, Violation, ViolationCode};
