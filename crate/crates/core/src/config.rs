//! Study configuration. Every field is optional in the JSON file and falls
//! back to the defaults below.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Modality;
use crate::timeline::IntervalBounds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Days before each exam that inherit its label.
    pub pre_days: u32,
    /// Days after each exam that inherit its label.
    pub post_days: u32,
    /// Whether the exam day itself belongs to its labeled window.
    pub include_exam_day: bool,
    pub interval_bounds: IntervalBounds,
    pub chi2_confidence: f64,
    pub seed: u64,
    /// Collapse raw scores to {-1, 0, +1} before classification.
    pub collapse_to_sign: bool,
    /// Naive Bayes variance floor as a fraction of the largest feature variance.
    pub nb_floor_ratio: f64,
    /// Fallback UTC offset for patients without an entry in `patient_offsets`.
    pub utc_offset_minutes: i32,
    pub patient_offsets: BTreeMap<String, i32>,
    /// Feature blocks used by the per-day change detector.
    pub change_modalities: Vec<Modality>,
    /// A day is sparse when more than this fraction of its cells is missing.
    pub sparse_threshold: f64,
    pub activity: ActivityParams,
    pub mobility: MobilityParams,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            pre_days: 7,
            post_days: 2,
            include_exam_day: true,
            interval_bounds: IntervalBounds::default(),
            chi2_confidence: 0.975,
            seed: 0,
            collapse_to_sign: false,
            nb_floor_ratio: 1e-9,
            utc_offset_minutes: 0,
            patient_offsets: BTreeMap::new(),
            change_modalities: vec![Modality::Accel, Modality::Gps],
            sparse_threshold: 0.5,
            activity: ActivityParams::default(),
            mobility: MobilityParams::default(),
        }
    }
}

impl StudyConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.interval_bounds.validate()?;
        if !(self.chi2_confidence > 0.0 && self.chi2_confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "chi2_confidence must lie in (0, 1), got {}",
                self.chi2_confidence
            )));
        }
        if !(self.nb_floor_ratio > 0.0) {
            return Err(Error::InvalidConfig("nb_floor_ratio must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.sparse_threshold) {
            return Err(Error::InvalidConfig("sparse_threshold must lie in [0, 1)".into()));
        }
        if self.activity.bin_seconds == 0 || 86_400 % self.activity.bin_seconds != 0 {
            return Err(Error::InvalidConfig("activity.bin_seconds must divide one day".into()));
        }
        Ok(())
    }

    pub fn offset_for(&self, patient_id: &str) -> i32 {
        self.patient_offsets.get(patient_id).copied().unwrap_or(self.utc_offset_minutes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityParams {
    pub bin_seconds: u32,
    pub min_samples_per_bin: usize,
}

impl Default for ActivityParams {
    fn default() -> Self {
        Self { bin_seconds: 60, min_samples_per_bin: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityParams {
    pub max_accuracy_m: f64,
    pub max_speed_kmh: f64,
    pub stay_radius_m: f64,
    pub stay_min_minutes: f64,
    pub place_merge_m: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            max_accuracy_m: 100.0,
            max_speed_kmh: 200.0,
            stay_radius_m: 150.0,
            stay_min_minutes: 10.0,
            place_merge_m: 300.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_yields_defaults() {
        let cfg: StudyConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, StudyConfig::default());
        assert_eq!(cfg.pre_days, 7);
        assert_eq!(cfg.post_days, 2);
        assert_eq!(cfg.chi2_confidence, 0.975);
    }

    #[test]
    fn partial_json_overrides_only_given_fields() {
        let cfg: StudyConfig = serde_json::from_str(r#"{"post_days": 3, "interval_bounds": {"morning": 5}}"#).unwrap();
        assert_eq!(cfg.post_days, 3);
        assert_eq!(cfg.pre_days, 7);
        assert_eq!(cfg.interval_bounds.morning, 5);
        assert_eq!(cfg.interval_bounds.afternoon, 12);
    }

    #[test]
    fn rejects_bad_confidence() {
        let cfg = StudyConfig { chi2_confidence: 1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
