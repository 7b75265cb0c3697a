//! Local-day bookkeeping: epochs, day intervals, labeled exam windows.
//!
//! All boundaries are computed from UTC milliseconds plus one fixed per-patient
//! offset. There is no daylight-saving handling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::ingest::{ExamRecord, PatientDataset};

pub const MS_PER_MINUTE: i64 = 60_000;
pub const MS_PER_HOUR: i64 = 3_600_000;
pub const MS_PER_DAY: i64 = 86_400_000;

/// One local calendar day, stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Epoch(pub i32);

impl Epoch {
    pub fn from_date(date: NaiveDate) -> Self {
        Epoch(date.num_days_from_ce() - UNIX_EPOCH_DAYS_FROM_CE)
    }

    pub fn date(self) -> NaiveDate {
        NaiveDate::from_num_days_from_ce_opt(self.0 + UNIX_EPOCH_DAYS_FROM_CE)
            .expect("epoch within chrono's date range")
    }

    /// The local day containing UTC instant `t_ms`.
    pub fn of_instant(t_ms: i64, offset_minutes: i32) -> Self {
        let local = t_ms + i64::from(offset_minutes) * MS_PER_MINUTE;
        Epoch(local.div_euclid(MS_PER_DAY) as i32)
    }

    /// UTC instant of local midnight opening this day.
    pub fn start_utc_ms(self, offset_minutes: i32) -> i64 {
        i64::from(self.0) * MS_PER_DAY - i64::from(offset_minutes) * MS_PER_MINUTE
    }

    pub fn offset(self, days: i32) -> Self {
        Epoch(self.0 + days)
    }

    pub fn parse(s: &str) -> Option<Self> {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(Self::from_date)
    }
}

const UNIX_EPOCH_DAYS_FROM_CE: i32 = 719_163;

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.date().format("%Y-%m-%d"))
    }
}

impl Serialize for Epoch {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Epoch {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Epoch::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid date {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayInterval {
    Morning,
    Afternoon,
    Evening,
    Night,
}

impl DayInterval {
    pub const ALL: [DayInterval; 4] =
        [DayInterval::Morning, DayInterval::Afternoon, DayInterval::Evening, DayInterval::Night];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DayInterval::Morning => "morning",
            DayInterval::Afternoon => "afternoon",
            DayInterval::Evening => "evening",
            DayInterval::Night => "night",
        }
    }
}

/// Local start hour of each interval. The four starts must appear in the
/// cyclic order morning, afternoon, evening, night.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntervalBounds {
    pub morning: u32,
    pub afternoon: u32,
    pub evening: u32,
    pub night: u32,
}

impl Default for IntervalBounds {
    fn default() -> Self {
        Self { morning: 6, afternoon: 12, evening: 18, night: 0 }
    }
}

impl IntervalBounds {
    fn relative_starts(&self) -> [u32; 3] {
        let rel = |h: u32| (h + 24 - self.morning % 24) % 24;
        [rel(self.afternoon), rel(self.evening), rel(self.night)]
    }

    pub fn validate(&self) -> Result<()> {
        let hours = [self.morning, self.afternoon, self.evening, self.night];
        if hours.iter().any(|&h| h >= 24) {
            return Err(Error::InvalidConfig("interval start hours must lie in 0..24".into()));
        }
        let [a, e, n] = self.relative_starts();
        if !(0 < a && a < e && e < n) {
            return Err(Error::InvalidConfig(
                "interval starts must be distinct and ordered morning < afternoon < evening < night (cyclically)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Maps a UTC instant to its local day interval.
pub fn interval_of(t_ms: i64, offset_minutes: i32, bounds: &IntervalBounds) -> DayInterval {
    let local = t_ms + i64::from(offset_minutes) * MS_PER_MINUTE;
    let of_day = local.rem_euclid(MS_PER_DAY);
    let rel = (of_day - i64::from(bounds.morning) * MS_PER_HOUR).rem_euclid(MS_PER_DAY);
    let [a, e, n] = bounds.relative_starts().map(|h| i64::from(h) * MS_PER_HOUR);
    if rel < a {
        DayInterval::Morning
    } else if rel < e {
        DayInterval::Afternoon
    } else if rel < n {
        DayInterval::Evening
    } else {
        DayInterval::Night
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledWindow {
    pub exam_date: Epoch,
    pub label: i32,
    pub days: Vec<Epoch>,
}

/// One window per exam spanning `[exam − pre_days, exam + post_days]`.
///
/// Where windows overlap, a day goes to the nearest exam; ties go to the
/// later exam.
pub fn build_windows(exams: &[ExamRecord], cfg: &StudyConfig) -> Result<Vec<LabeledWindow>> {
    if exams.is_empty() {
        return Err(Error::Empty("exam list"));
    }
    let pre = cfg.pre_days as i32;
    let post = cfg.post_days as i32;
    let mut owner: BTreeMap<Epoch, usize> = BTreeMap::new();
    for (i, exam) in exams.iter().enumerate() {
        for k in -pre..=post {
            if k == 0 && !cfg.include_exam_day {
                continue;
            }
            let day = exam.date.offset(k);
            owner
                .entry(day)
                .and_modify(|cur| {
                    let d_cur = (day.0 - exams[*cur].date.0).abs();
                    let d_new = k.abs();
                    if d_new < d_cur || (d_new == d_cur && exam.date > exams[*cur].date) {
                        *cur = i;
                    }
                })
                .or_insert(i);
        }
    }
    let mut windows: Vec<LabeledWindow> =
        exams.iter().map(|e| LabeledWindow { exam_date: e.date, label: e.score, days: Vec::new() }).collect();
    for (day, i) in owner {
        windows[i].days.push(day);
    }
    Ok(windows)
}

/// Day → (window index, label) for every labeled day.
pub fn label_map(windows: &[LabeledWindow]) -> BTreeMap<Epoch, (usize, i32)> {
    windows.iter().enumerate().flat_map(|(i, w)| w.days.iter().map(move |&d| (d, (i, w.label)))).collect()
}

/// Days with accelerometer data, minus exam days.
pub fn correlation_days(ds: &PatientDataset) -> Vec<Epoch> {
    let exams: BTreeSet<Epoch> = ds.exams.iter().map(|e| e.date).collect();
    let days: BTreeSet<Epoch> =
        ds.accel.iter().map(|s| Epoch::of_instant(s.t, ds.utc_offset_minutes)).filter(|d| !exams.contains(d)).collect();
    days.into_iter().collect()
}
