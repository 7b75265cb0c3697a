//! Generator parameters. Every per-state quantity is `base + score · per_point`.

use serde::{Deserialize, Serialize};

use crate::timeline::Epoch;

/// A state segment starting `day` days after the first data day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentStart {
    pub day: u32,
    pub score: i32,
}

/// A state segment of a concrete patient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Epoch,
    pub score: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityModel {
    /// Magnitude standard deviation per day interval (morning, afternoon,
    /// evening, night), m/s².
    pub level: [f64; 4],
    pub per_point: [f64; 4],
    /// Day-to-day standard deviation of the level.
    pub day_sd: [f64; 4],
    pub burst_every_minutes: u32,
    pub samples_per_burst: u32,
    pub sample_spacing_s: u32,
}

impl Default for ActivityModel {
    fn default() -> Self {
        Self {
            level: [1.2, 1.4, 1.0, 0.25],
            per_point: [0.25, 0.28, 0.2, 0.05],
            day_sd: [0.12, 0.14, 0.1, 0.025],
            burst_every_minutes: 15,
            samples_per_burst: 12,
            sample_spacing_s: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityModel {
    pub home_lat: f64,
    pub home_lon: f64,
    /// Home is placed uniformly within this distance of (`home_lat`, `home_lon`).
    pub home_jitter_m: f64,
    pub places: usize,
    pub radius_m: f64,
    /// Relative radius change per score point.
    pub radius_per_point: f64,
    pub trips: f64,
    pub trips_per_point: f64,
    pub trips_sd: f64,
    pub fix_every_minutes: u32,
    pub noise_m: f64,
    pub bad_fix_fraction: f64,
    pub bad_fix_accuracy_m: f64,
}

impl Default for MobilityModel {
    fn default() -> Self {
        Self {
            home_lat: 47.2692,
            home_lon: 11.4041,
            home_jitter_m: 2000.0,
            places: 8,
            radius_m: 3000.0,
            radius_per_point: 0.25,
            trips: 2.0,
            trips_per_point: 0.6,
            trips_sd: 0.8,
            fix_every_minutes: 5,
            noise_m: 4.0,
            bad_fix_fraction: 0.02,
            bad_fix_accuracy_m: 150.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CallModel {
    /// Calls per day.
    pub rate: f64,
    pub rate_per_point: f64,
    pub mean_duration_s: f64,
    /// Relative mean-duration change per score point.
    pub duration_per_point: f64,
    pub outgoing_fraction: f64,
    pub outgoing_per_point: f64,
    pub night_fraction: f64,
    pub night_per_point: f64,
    pub contacts: usize,
}

impl Default for CallModel {
    fn default() -> Self {
        Self {
            rate: 5.0,
            rate_per_point: 1.2,
            mean_duration_s: 120.0,
            duration_per_point: 0.15,
            outgoing_fraction: 0.5,
            outgoing_per_point: 0.08,
            night_fraction: 0.05,
            night_per_point: 0.03,
            contacts: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoiceColumn {
    pub name: String,
    pub mean: f64,
    pub per_point: f64,
    pub sd: f64,
}

fn default_voice() -> Vec<VoiceColumn> {
    vec![
        VoiceColumn { name: "pitch_variability".into(), mean: 1.0, per_point: 0.25, sd: 0.2 },
        VoiceColumn { name: "speech_rate".into(), mean: 3.5, per_point: 0.35, sd: 0.3 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerativeModel {
    pub activity: ActivityModel,
    pub mobility: MobilityModel,
    pub calls: CallModel,
    /// One voice row per call; empty disables the sound stream.
    pub voice: Vec<VoiceColumn>,
}

impl Default for GenerativeModel {
    fn default() -> Self {
        Self {
            activity: ActivityModel::default(),
            mobility: MobilityModel::default(),
            calls: CallModel::default(),
            voice: default_voice(),
        }
    }
}

/// Everything needed to generate one patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPatientSpec {
    pub patient_id: String,
    pub utc_offset_minutes: i32,
    pub start_date: Epoch,
    pub days: u32,
    /// Contiguous segments; the first starts on `start_date`.
    pub timeline: Vec<Segment>,
    pub exam_every_days: u32,
    pub first_exam_day: u32,
    pub seed: u64,
    pub model: GenerativeModel,
}

impl SyntheticPatientSpec {
    /// Score in effect on `day`.
    pub fn score_on(&self, day: Epoch) -> i32 {
        self.timeline.iter().take_while(|s| s.start <= day).last().map_or(0, |s| s.score)
    }

    pub fn exam_days(&self) -> Vec<Epoch> {
        let every = self.exam_every_days.max(1);
        (self.first_exam_day..self.days).step_by(every as usize).map(|d| self.start_date.offset(d as i32)).collect()
    }

    pub fn end_date(&self) -> Epoch {
        self.start_date.offset(self.days as i32)
    }
}

/// Cohort-level template; patient `i` uses timeline pattern `i mod len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortTemplate {
    pub start_date: Epoch,
    pub days: u32,
    pub utc_offset_minutes: i32,
    pub exam_every_days: u32,
    pub first_exam_day: u32,
    pub timelines: Vec<Vec<SegmentStart>>,
    pub model: GenerativeModel,
}

impl Default for CohortTemplate {
    fn default() -> Self {
        let seg = |day, score| SegmentStart { day, score };
        Self {
            start_date: Epoch::parse("2013-01-07").expect("valid literal date"),
            days: 84,
            utc_offset_minutes: 60,
            exam_every_days: 21,
            first_exam_day: 7,
            timelines: vec![
                vec![seg(0, 0), seg(38, -2)],
                vec![seg(0, 0), seg(38, 2)],
                vec![seg(0, -1), seg(38, 1)],
                vec![seg(0, 0)],
                vec![seg(0, -2), seg(38, 0)],
            ],
            model: GenerativeModel::default(),
        }
    }
}

impl CohortTemplate {
    pub fn from_json_file(path: &std::path::Path) -> crate::error::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::error::Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| crate::error::Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Spec of patient `index` (zero-based), ids `p0001`, `p0002`, ...
    pub fn patient_spec(&self, index: usize, seed: u64) -> SyntheticPatientSpec {
        let pattern = if self.timelines.is_empty() { &[][..] } else { &self.timelines[index % self.timelines.len()] };
        let mut timeline: Vec<Segment> = pattern
            .iter()
            .filter(|s| s.day < self.days)
            .map(|s| Segment { start: self.start_date.offset(s.day as i32), score: s.score })
            .collect();
        if timeline.first().is_none_or(|s| s.start != self.start_date) {
            timeline.insert(0, Segment { start: self.start_date, score: 0 });
        }
        SyntheticPatientSpec {
            patient_id: format!("p{:04}", index + 1),
            utc_offset_minutes: self.utc_offset_minutes,
            start_date: self.start_date,
            days: self.days,
            timeline,
            exam_every_days: self.exam_every_days,
            first_exam_day: self.first_exam_day,
            seed,
            model: self.model.clone(),
        }
    }
}

impl SyntheticPatientSpec {
    /// Segments must start on `start_date`, strictly increase, lie inside the
    /// data range and carry scores in `-3..=3`.
    pub fn validate(&self) -> crate::error::Result<()> {
        let bad = |m: String| Err(crate::error::Error::InvalidConfig(m));
        if self.days == 0 {
            return bad("synthetic patient needs at least one day".into());
        }
        match self.timeline.first() {
            Some(s) if s.start == self.start_date => {}
            _ => return bad("first segment must start on the first data day".into()),
        }
        if self.timeline.windows(2).any(|w| w[0].start >= w[1].start) {
            return bad("segments must have strictly increasing start dates".into());
        }
        if self.timeline.iter().any(|s| s.start >= self.end_date()) {
            return bad("segment starts after the last data day".into());
        }
        if let Some(s) = self.timeline.iter().find(|s| !(-3..=3).contains(&s.score)) {
            return bad(format!("segment score {} outside -3..=3", s.score));
        }
        Ok(())
    }
}
