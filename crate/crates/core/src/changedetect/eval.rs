//! Per-patient evaluation of day-level change detection.

use serde::Serialize;

use super::model::{ChangeDecision, StateDetector};
use crate::config::StudyConfig;
use crate::features::{feature_matrix, FeatureMatrix};
use crate::ingest::PatientDataset;
use crate::timeline::{build_windows, label_map, LabeledWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledDay {
    /// Index into the feature matrix rows.
    pub row: usize,
    pub window: usize,
    pub label: i32,
    /// Ground truth: the window label differs from the default label.
    pub change: bool,
}

/// Feature matrix, ground truth and default-state training days of one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeSetup {
    pub matrix: FeatureMatrix,
    pub windows: Vec<LabeledWindow>,
    pub default_label: i32,
    pub labeled: Vec<LabeledDay>,
    /// Leading windows carrying the default label.
    pub training_windows: usize,
    /// Matrix rows of the training windows.
    pub train: Vec<usize>,
}

/// The default state is the label of the first window. The model trains on
/// the leading run of windows with that label. Returns the skip reason when
/// the patient has no window with another label.
pub fn change_setup(ds: &PatientDataset, cfg: &StudyConfig) -> Result<ChangeSetup, String> {
    let windows = build_windows(&ds.exams, cfg).map_err(|e| e.to_string())?;
    let default_label = windows[0].label;
    if windows.iter().all(|w| w.label == default_label) {
        return Err("no window with a label different from the default state".into());
    }
    let training_windows = windows.iter().take_while(|w| w.label == default_label).count();
    let matrix = feature_matrix(ds, cfg);
    let days = label_map(&windows);
    let labeled: Vec<LabeledDay> = matrix
        .rows
        .iter()
        .enumerate()
        .filter_map(|(row, r)| {
            days.get(&r.epoch).map(|&(window, label)| LabeledDay { row, window, label, change: label != default_label })
        })
        .collect();
    let train = labeled.iter().filter(|d| d.window < training_windows).map(|d| d.row).collect();
    Ok(ChangeSetup { matrix, windows, default_label, labeled, training_windows, train })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DetectionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl DetectionCounts {
    pub fn add(&mut self, change: bool, fired: bool) {
        match (change, fired) {
            (true, true) => self.true_positives += 1,
            (false, true) => self.false_positives += 1,
            (true, false) => self.false_negatives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    /// `None` without change days.
    pub fn recall(&self) -> Option<f64> {
        let pos = self.true_positives + self.false_negatives;
        (pos > 0).then(|| self.true_positives as f64 / pos as f64)
    }

    /// `None` when nothing fired.
    pub fn precision(&self) -> Option<f64> {
        let fired = self.true_positives + self.false_positives;
        (fired > 0).then(|| self.true_positives as f64 / fired as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientChangeEval {
    pub patient_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub modality: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default_label: Option<i32>,
    pub training_days: usize,
    pub evaluated_days: usize,
    pub change_days: usize,
    #[serde(flatten)]
    pub counts: DetectionCounts,
    #[serde(serialize_with = "crate::na::serialize")]
    pub recall: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub precision: Option<f64>,
    /// Maximal runs of consecutive non-default windows.
    pub episodes: usize,
    /// Episodes with at least one fired day.
    pub episodes_detected: usize,
    #[serde(serialize_with = "crate::na::serialize")]
    pub episode_recall: Option<f64>,
    /// Default-label days outside the training windows.
    pub held_out_default_days: usize,
    pub held_out_false_alarms: usize,
    /// Decisions for every non-sparse day with features, labeled or not.
    #[serde(skip)]
    pub decisions: Vec<ChangeDecision>,
}

impl PatientChangeEval {
    fn skipped(ds: &PatientDataset, modality: String, reason: String) -> Self {
        Self {
            patient_id: ds.patient_id.clone(),
            skipped: Some(reason),
            modality,
            default_label: None,
            training_days: 0,
            evaluated_days: 0,
            change_days: 0,
            counts: DetectionCounts::default(),
            recall: None,
            precision: None,
            episodes: 0,
            episodes_detected: 0,
            episode_recall: None,
            held_out_default_days: 0,
            held_out_false_alarms: 0,
            decisions: Vec::new(),
        }
    }
}

/// Fits the default-state detector over `cfg.change_modalities` and scores
/// every labeled, non-sparse day.
pub fn evaluate_change_detection(ds: &PatientDataset, cfg: &StudyConfig) -> PatientChangeEval {
    let modality = super::model::detector_label(&cfg.change_modalities);
    let setup = match change_setup(ds, cfg) {
        Ok(s) => s,
        Err(reason) => return PatientChangeEval::skipped(ds, modality, reason),
    };
    let rows = &setup.matrix.rows;
    let detector = match StateDetector::fit(
        rows,
        &setup.train,
        &setup.matrix.schema,
        &cfg.change_modalities,
        cfg,
        setup.default_label,
    ) {
        Ok(d) => d,
        Err(e) => return PatientChangeEval::skipped(ds, modality, e.to_string()),
    };
    let decisions = detector.detect(rows);

    let mut counts = DetectionCounts::default();
    let mut held_out_default_days = 0;
    let mut held_out_false_alarms = 0;
    let mut window_fired: Vec<Option<bool>> = vec![None; setup.windows.len()];
    for day in &setup.labeled {
        let Some(d) = detector.decide(&rows[day.row]) else { continue };
        counts.add(day.change, d.fired);
        if day.change {
            let w = &mut window_fired[day.window];
            *w = Some(w.unwrap_or(false) || d.fired);
        } else if day.window >= setup.training_windows {
            held_out_default_days += 1;
            held_out_false_alarms += usize::from(d.fired);
        }
    }

    let mut episodes = 0;
    let mut episodes_detected = 0;
    let mut current: Option<bool> = None;
    for (w, window) in setup.windows.iter().enumerate() {
        let change = window.label != setup.default_label;
        match (change, window_fired[w]) {
            (true, Some(f)) => current = Some(current.unwrap_or(false) || f),
            (true, None) => {}
            (false, _) => {
                if let Some(f) = current.take() {
                    episodes += 1;
                    episodes_detected += usize::from(f);
                }
            }
        }
    }
    if let Some(f) = current {
        episodes += 1;
        episodes_detected += usize::from(f);
    }

    PatientChangeEval {
        patient_id: ds.patient_id.clone(),
        skipped: None,
        modality,
        default_label: Some(setup.default_label),
        training_days: setup.train.iter().filter(|&&r| detector.decide(&rows[r]).is_some()).count(),
        evaluated_days: counts.total(),
        change_days: counts.true_positives + counts.false_negatives,
        recall: counts.recall(),
        precision: counts.precision(),
        counts,
        episodes,
        episodes_detected,
        episode_recall: (episodes > 0).then(|| episodes_detected as f64 / episodes as f64),
        held_out_default_days,
        held_out_false_alarms,
        decisions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeEvalReport {
    pub modality: String,
    pub chi2_confidence: f64,
    pub patients: Vec<PatientChangeEval>,
    /// Means over patients with a defined value.
    #[serde(serialize_with = "crate::na::serialize")]
    pub mean_recall: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub mean_precision: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub mean_episode_recall: Option<f64>,
}

fn mean_defined(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = vals.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn change_eval_report(patients: Vec<PatientChangeEval>, cfg: &StudyConfig) -> ChangeEvalReport {
    ChangeEvalReport {
        modality: super::model::detector_label(&cfg.change_modalities),
        chi2_confidence: cfg.chi2_confidence,
        mean_recall: mean_defined(patients.iter().map(|p| p.recall)),
        mean_precision: mean_defined(patients.iter().map(|p| p.precision)),
        mean_episode_recall: mean_defined(patients.iter().map(|p| p.episode_recall)),
        patients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AccelSample, ExamRecord, GpsFix};
    use crate::synth::SplitMix64;
    use crate::timeline::{Epoch, MS_PER_HOUR};

    /// A+G patient whose activity spread and travel radius depend on the
    /// score of the nearest exam.
    fn patient(scores: &[i32], seed: u64) -> PatientDataset {
        let mut rng = SplitMix64::new(seed);
        let exams: Vec<ExamRecord> =
            scores.iter().enumerate().map(|(i, &s)| ExamRecord { date: Epoch(7 + 21 * i as i32), score: s }).collect();
        let mut accel = Vec::new();
        let mut gps = Vec::new();
        for day in 0..(21 * scores.len() as i32) {
            let score = exams.iter().min_by_key(|e| (e.date.0 - day).abs()).unwrap().score;
            let level = 1.0 + 0.3 * f64::from(score) + 0.05 * rng.next_normal();
            let base = Epoch(day).start_utc_ms(0);
            for h in 0..24 {
                for i in 0..12 {
                    let z = 9.81 + level * rng.next_normal();
                    accel.push(AccelSample { t: base + h * MS_PER_HOUR + i * 5000, x: 0.0, y: 0.0, z });
                }
                let r = 0.01 * (1.0 + 0.25 * f64::from(score)) * (1.0 + 0.1 * rng.next_normal());
                let a = std::f64::consts::TAU * h as f64 / 24.0;
                gps.push(GpsFix {
                    t: base + h * MS_PER_HOUR,
                    lat: 47.0 + r * a.sin(),
                    lon: 11.0 + r * a.cos(),
                    accuracy_m: 5.0,
                });
            }
        }
        PatientDataset { patient_id: "p".into(), accel, gps, exams, ..Default::default() }
    }

    #[test]
    fn separated_states_are_detected() {
        let ds = patient(&[0, 0, 2, 2], 1);
        let e = evaluate_change_detection(&ds, &StudyConfig::default());
        assert!(e.skipped.is_none(), "{:?}", e.skipped);
        assert_eq!(e.default_label, Some(0));
        assert_eq!(e.training_days, 20);
        assert_eq!(e.change_days, 20);
        assert!(e.recall.unwrap() >= 0.9, "{e:?}");
        assert!(e.precision.unwrap() >= 0.9);
        assert_eq!((e.episodes, e.episodes_detected), (1, 1));
        assert_eq!(e.decisions.len(), 84);
    }

    #[test]
    fn episodes_split_by_default_windows() {
        let ds = patient(&[0, 0, 2, 0, -2], 2);
        let e = evaluate_change_detection(&ds, &StudyConfig::default());
        assert_eq!(e.episodes, 2);
        assert!(e.held_out_default_days > 0);
    }

    #[test]
    fn default_only_patient_is_skipped() {
        let ds = patient(&[1, 1, 1], 3);
        let e = evaluate_change_detection(&ds, &StudyConfig::default());
        assert!(e.skipped.is_some());
        assert_eq!(e.recall, None);
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["recall"], "N/A");
    }

    #[test]
    fn counts_metrics() {
        let mut c = DetectionCounts::default();
        for (change, fired) in [(true, true), (true, false), (false, true), (false, false), (true, true)] {
            c.add(change, fired);
        }
        assert_eq!(c.recall(), Some(2.0 / 3.0));
        assert_eq!(c.precision(), Some(2.0 / 3.0));
        assert_eq!(DetectionCounts::default().recall(), None);
    }
}
