//! Per-day feature vectors built from four modality blocks:
//! accelerometer (A), location (G), phone calls (P) and sound (S).
//!
//! Column order is fixed: A (5) then G (5) then P (6) then S (2 per voice
//! column). Missing cells are `None`; no block is ever zero-filled.

mod activity;
mod calls;
mod mobility;
mod sound;
mod standardize;

use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use activity::{activity_features, activity_score, valid_bins, ActivityFeatures, BinScore, Span};
pub use calls::{call_features, CallFeatures};
pub use mobility::{
    filter_fixes, haversine_m, mobility_features, radius_of_gyration, stay_points, MobilityFeatures, StayPoint,
    EARTH_RADIUS_M,
};
pub use sound::sound_features;
pub use standardize::{standardize, StandardizeParams};

use crate::config::StudyConfig;
use crate::ingest::PatientDataset;
use crate::timeline::{Epoch, MS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "A")]
    Accel,
    #[serde(rename = "G")]
    Gps,
    #[serde(rename = "P")]
    Phone,
    #[serde(rename = "S")]
    Sound,
}

impl Modality {
    pub const ALL: [Modality; 4] = [Modality::Accel, Modality::Gps, Modality::Phone, Modality::Sound];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> &'static str {
        match self {
            Modality::Accel => "A",
            Modality::Gps => "G",
            Modality::Phone => "P",
            Modality::Sound => "S",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Joins modalities as `A+G`.
pub fn modality_label(set: &[Modality]) -> String {
    let mut sorted = set.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted.iter().map(|m| m.letter()).collect::<Vec<_>>().join("+")
}

pub const ACTIVITY_DIMS: usize = 5;
pub const MOBILITY_DIMS: usize = 5;
pub const CALL_DIMS: usize = 6;

/// Column layout of one patient's day vectors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureSchema {
    pub voice_columns: Vec<String>,
}

impl FeatureSchema {
    pub fn dim(&self) -> usize {
        ACTIVITY_DIMS + MOBILITY_DIMS + CALL_DIMS + 2 * self.voice_columns.len()
    }

    pub fn block(&self, m: Modality) -> Range<usize> {
        let g = ACTIVITY_DIMS;
        let p = g + MOBILITY_DIMS;
        let s = p + CALL_DIMS;
        match m {
            Modality::Accel => 0..g,
            Modality::Gps => g..p,
            Modality::Phone => p..s,
            Modality::Sound => s..self.dim(),
        }
    }

    /// Column indices of the given blocks, in schema order.
    pub fn columns(&self, set: &[Modality]) -> Vec<usize> {
        let mut sorted = set.to_vec();
        sorted.sort();
        sorted.dedup();
        sorted.into_iter().flat_map(|m| self.block(m)).collect()
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = [
            "activity_daily",
            "activity_morning",
            "activity_afternoon",
            "activity_evening",
            "activity_night",
            "gps_total_distance_m",
            "gps_radius_of_gyration_m",
            "gps_place_count",
            "gps_top_place_fraction",
            "gps_fix_count",
            "call_count",
            "call_total_duration_s",
            "call_mean_duration_s",
            "call_outgoing_fraction",
            "call_unique_contacts",
            "call_night_count",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for c in &self.voice_columns {
            names.push(format!("voice_{c}_mean"));
            names.push(format!("voice_{c}_std"));
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayFeatureVector {
    pub epoch: Epoch,
    pub values: Vec<Option<f64>>,
    /// Block presence, indexed by [`Modality::index`].
    pub present: [bool; 4],
}

impl DayFeatureVector {
    pub fn is_present(&self, m: Modality) -> bool {
        self.present[m.index()]
    }

    pub fn select(&self, cols: &[usize]) -> Vec<Option<f64>> {
        cols.iter().map(|&c| self.values[c]).collect()
    }

    pub fn missing_fraction(&self, cols: &[usize]) -> f64 {
        if cols.is_empty() {
            return 1.0;
        }
        cols.iter().filter(|&&c| self.values[c].is_none()).count() as f64 / cols.len() as f64
    }

    /// More than `threshold` of the selected cells are missing.
    pub fn is_sparse(&self, cols: &[usize], threshold: f64) -> bool {
        self.missing_fraction(cols) > threshold
    }
}

/// All day vectors of one patient, ordered by epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub patient_id: String,
    pub schema: FeatureSchema,
    pub rows: Vec<DayFeatureVector>,
}

impl FeatureMatrix {
    pub fn row_for(&self, epoch: Epoch) -> Option<&DayFeatureVector> {
        self.rows.binary_search_by_key(&epoch, |r| r.epoch).ok().map(|i| &self.rows[i])
    }

    /// CSV with a `date` column followed by the schema names; empty cell = missing.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("date");
        for n in self.schema.names() {
            s.push(',');
            s.push_str(&n);
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{}", r.epoch);
            for v in &r.values {
                s.push(',');
                if let Some(v) = v {
                    let _ = write!(s, "{v}");
                }
            }
            s.push('\n');
        }
        s
    }
}

fn slice_by_time<T>(items: &[T], start: i64, end: i64, t: impl Fn(&T) -> i64) -> &[T] {
    let lo = items.partition_point(|x| t(x) < start);
    let hi = items.partition_point(|x| t(x) < end);
    &items[lo..hi]
}

/// Assembles the feature vector of one local day.
///
/// The P block is present on every day between the first and last call day
/// of a patient with call data; a day without calls then has zero counts and
/// missing duration fields.
pub fn day_feature_vector(ds: &PatientDataset, epoch: Epoch, cfg: &StudyConfig) -> DayFeatureVector {
    let schema = FeatureSchema { voice_columns: ds.voice_schema.clone() };
    let off = ds.utc_offset_minutes;
    let start = epoch.start_utc_ms(off);
    let end = start + MS_PER_DAY;
    let mut values: Vec<Option<f64>> = Vec::with_capacity(schema.dim());
    let mut present = [false; 4];

    let accel = slice_by_time(&ds.accel, start, end, |s| s.t);
    let act = activity_features(accel, epoch, off, &cfg.interval_bounds, &cfg.activity);
    values.push(act.daily_score);
    values.extend(act.interval_scores);
    present[Modality::Accel.index()] = act.daily_score.is_some();

    let gps = slice_by_time(&ds.gps, start, end, |f| f.t);
    let mob = mobility_features(gps, &cfg.mobility);
    if mob.fix_count > 0 {
        present[Modality::Gps.index()] = true;
        values.extend([
            Some(mob.total_distance_m),
            Some(mob.radius_of_gyration_m),
            Some(mob.place_count as f64),
            mob.top_place_fraction,
            Some(mob.fix_count as f64),
        ]);
    } else {
        values.extend([None; MOBILITY_DIMS]);
    }

    let in_call_range = match (ds.calls.first(), ds.calls.last()) {
        (Some(a), Some(b)) => (Epoch::of_instant(a.t, off)..=Epoch::of_instant(b.t, off)).contains(&epoch),
        _ => false,
    };
    if in_call_range {
        present[Modality::Phone.index()] = true;
        let c = call_features(slice_by_time(&ds.calls, start, end, |c| c.t), off, &cfg.interval_bounds);
        values.extend([
            Some(c.call_count as f64),
            c.total_duration_s,
            c.mean_duration_s,
            c.outgoing_fraction,
            Some(c.unique_contacts as f64),
            Some(c.night_call_count as f64),
        ]);
    } else {
        values.extend([None; CALL_DIMS]);
    }

    let width = schema.voice_columns.len();
    match sound_features(slice_by_time(&ds.voice, start, end, |v| v.t), width) {
        Some(s) if width > 0 => {
            present[Modality::Sound.index()] = true;
            values.extend(s.into_iter().map(Some));
        }
        _ => values.extend(std::iter::repeat_n(None, 2 * width)),
    }

    DayFeatureVector { epoch, values, present }
}

/// Day vectors for every local day with at least one present block.
pub fn feature_matrix(ds: &PatientDataset, cfg: &StudyConfig) -> FeatureMatrix {
    let rows = ds
        .data_days()
        .into_iter()
        .map(|d| day_feature_vector(ds, d, cfg))
        .filter(|r| r.present.iter().any(|&p| p))
        .collect();
    FeatureMatrix {
        patient_id: ds.patient_id.clone(),
        schema: FeatureSchema { voice_columns: ds.voice_schema.clone() },
        rows,
    }
}
