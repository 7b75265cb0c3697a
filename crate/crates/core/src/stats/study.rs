//! Activity/state correlation study: per patient and pooled over a cohort,
//! using either one daily score or one score per day interval.

use std::collections::BTreeMap;

use serde::Serialize;

use super::correlation::{pearson, CorrelationResult};
use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::features::activity_features;
use crate::ingest::PatientDataset;
use crate::timeline::{build_windows, correlation_days, label_map, DayInterval, Epoch, MS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    Daily,
    Interval,
}

/// One (activity score, state label) observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActivityPair {
    pub epoch: Epoch,
    /// `None` in daily mode.
    pub interval: Option<DayInterval>,
    pub score: f64,
    pub label: i32,
}

/// Pairs every correlation day's activity score with its window label.
/// Days outside every labeled window carry no label and are skipped.
pub fn activity_pairs(ds: &PatientDataset, cfg: &StudyConfig, mode: CorrelationMode) -> Result<Vec<ActivityPair>> {
    let windows = build_windows(&ds.exams, cfg)?;
    let labels = label_map(&windows);
    let off = ds.utc_offset_minutes;
    let mut out = Vec::new();
    for day in correlation_days(ds) {
        let Some(&(_, label)) = labels.get(&day) else { continue };
        let start = day.start_utc_ms(off);
        let lo = ds.accel.partition_point(|s| s.t < start);
        let hi = ds.accel.partition_point(|s| s.t < start + MS_PER_DAY);
        let act = activity_features(&ds.accel[lo..hi], day, off, &cfg.interval_bounds, &cfg.activity);
        match mode {
            CorrelationMode::Daily => {
                if let Some(score) = act.daily_score {
                    out.push(ActivityPair { epoch: day, interval: None, score, label });
                }
            }
            CorrelationMode::Interval => {
                for interval in DayInterval::ALL {
                    if let Some(score) = act.interval_scores[interval.index()] {
                        out.push(ActivityPair { epoch: day, interval: Some(interval), score, label });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A correlation, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationOutcome {
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    pub result: Option<CorrelationResult<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CorrelationOutcome {
    fn of(pairs: &[(f64, f64)]) -> Self {
        let r = if pairs.len() < 3 {
            Err(Error::InsufficientSamples { needed: 3, got: pairs.len() })
        } else {
            let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            pearson(&xs, &ys)
        };
        match r {
            Ok(result) => Self { result: Some(result), error: None },
            Err(e) => Self { result: None, error: Some(e.to_string()) },
        }
    }

    pub fn r(&self) -> Option<f64> {
        self.result.map(|c| c.r)
    }

    pub fn p(&self) -> Option<f64> {
        self.result.and_then(|c| c.p_two_tailed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub mode: CorrelationMode,
    pub overall: CorrelationOutcome,
    /// Interval mode only.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_interval: BTreeMap<DayInterval, CorrelationOutcome>,
}

fn zscore(xs: &mut [f64]) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return;
    }
    let m = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    for x in xs.iter_mut() {
        *x = if sd > 0.0 { (*x - m) / sd } else { 0.0 };
    }
}

/// Standardizes scores within each interval group (one group in daily mode).
fn standardized(pairs: &[ActivityPair]) -> Vec<ActivityPair> {
    let mut groups: BTreeMap<Option<DayInterval>, Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        groups.entry(p.interval).or_default().push(i);
    }
    let mut out = pairs.to_vec();
    for idx in groups.values() {
        let mut scores: Vec<f64> = idx.iter().map(|&i| pairs[i].score).collect();
        zscore(&mut scores);
        for (&i, s) in idx.iter().zip(scores) {
            out[i].score = s;
        }
    }
    out
}

fn summarize(mode: CorrelationMode, pairs: &[ActivityPair]) -> StudyResult {
    let xy = |p: &ActivityPair| (p.score, f64::from(p.label));
    let overall = CorrelationOutcome::of(&pairs.iter().map(xy).collect::<Vec<_>>());
    let mut per_interval = BTreeMap::new();
    if mode == CorrelationMode::Interval {
        for interval in DayInterval::ALL {
            let sub: Vec<_> = pairs.iter().filter(|p| p.interval == Some(interval)).map(xy).collect();
            per_interval.insert(interval, CorrelationOutcome::of(&sub));
        }
    }
    StudyResult { mode, overall, per_interval }
}

/// Single-patient study. In interval mode the combined correlation uses
/// scores standardized within each interval, removing circadian level
/// differences; the per-interval breakdown is unaffected by this.
pub fn correlation_study(ds: &PatientDataset, cfg: &StudyConfig, mode: CorrelationMode) -> Result<StudyResult> {
    let pairs = activity_pairs(ds, cfg, mode)?;
    if pairs.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: pairs.len() });
    }
    Ok(summarize(mode, &standardized(&pairs)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientStudy {
    pub patient_id: String,
    #[serde(flatten)]
    pub result: Option<StudyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortStudy {
    pub mode: CorrelationMode,
    pub patients: Vec<PatientStudy>,
    /// Pairs of all patients concatenated after within-patient standardization.
    pub pooled: StudyResult,
    /// Mean of the per-patient overall r values that are defined.
    pub mean_patient_r: Option<f64>,
}

impl CohortStudy {
    /// Largest |r| of the pooled per-interval breakdown.
    pub fn best_interval_abs_r(&self) -> Option<f64> {
        self.pooled.per_interval.values().filter_map(|o| o.r()).map(f64::abs).reduce(f64::max)
    }
}

pub fn cohort_correlation(patients: &[PatientDataset], cfg: &StudyConfig, mode: CorrelationMode) -> CohortStudy {
    let mut pooled_pairs = Vec::new();
    let mut studies = Vec::new();
    for ds in patients {
        let pairs = match activity_pairs(ds, cfg, mode) {
            Ok(p) => p,
            Err(e) => {
                studies.push(PatientStudy {
                    patient_id: ds.patient_id.clone(),
                    result: None,
                    skipped: Some(e.to_string()),
                });
                continue;
            }
        };
        let std_pairs = standardized(&pairs);
        pooled_pairs.extend_from_slice(&std_pairs);
        let study = if pairs.len() < 3 {
            PatientStudy {
                patient_id: ds.patient_id.clone(),
                result: None,
                skipped: Some(Error::InsufficientSamples { needed: 3, got: pairs.len() }.to_string()),
            }
        } else {
            PatientStudy { patient_id: ds.patient_id.clone(), result: Some(summarize(mode, &std_pairs)), skipped: None }
        };
        studies.push(study);
    }
    let rs: Vec<f64> = studies.iter().filter_map(|s| s.result.as_ref()?.overall.r()).collect();
    let mean_patient_r = (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64);
    CohortStudy { mode, patients: studies, pooled: summarize(mode, &pooled_pairs), mean_patient_r }
}
