//! Leave-one-window-out cross-validation of the naive Bayes classifier.

use std::collections::BTreeMap;

use serde::Serialize;

use super::nb::{fit_nb, predict_nb, GaussianNbModel};
use crate::config::StudyConfig;
use crate::error::Result;
use crate::features::{feature_matrix, modality_label, Modality, StandardizeParams};
use crate::ingest::PatientDataset;
use crate::stats::{evaluate, ConfusionSummary};
use crate::timeline::{build_windows, label_map};

pub const FUSION_LABEL: &str = "fusion";

/// Feature blocks fed to one classifier run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModalitySet {
    pub name: String,
    pub modalities: Vec<Modality>,
}

impl ModalitySet {
    pub fn single(m: Modality) -> Self {
        Self { name: m.letter().to_string(), modalities: vec![m] }
    }

    pub fn of(modalities: &[Modality]) -> Self {
        Self { name: modality_label(modalities), modalities: modalities.to_vec() }
    }

    /// Feature-level fusion of all four blocks.
    pub fn fusion() -> Self {
        Self { name: FUSION_LABEL.to_string(), modalities: Modality::ALL.to_vec() }
    }
}

/// A, G, P, S and their feature-level fusion.
pub fn default_modality_sets() -> Vec<ModalitySet> {
    let mut sets: Vec<ModalitySet> = Modality::ALL.iter().map(|&m| ModalitySet::single(m)).collect();
    sets.push(ModalitySet::fusion());
    sets
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalityCv {
    pub modality: String,
    pub available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionSummary<i32>>,
}

impl ModalityCv {
    fn unavailable(modality: &str, reason: impl Into<String>) -> Self {
        Self { modality: modality.to_string(), available: false, reason: Some(reason.into()), confusion: None }
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.confusion.as_ref().map(|c| c.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientCv {
    pub patient_id: String,
    /// Set when the patient was excluded from the study.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub windows: usize,
    pub labels: Vec<i32>,
    pub entries: Vec<ModalityCv>,
}

impl PatientCv {
    fn skipped(ds: &PatientDataset, windows: usize, labels: Vec<i32>, reason: impl Into<String>) -> Self {
        Self { patient_id: ds.patient_id.clone(), skipped: Some(reason.into()), windows, labels, entries: Vec::new() }
    }

    pub fn entry(&self, modality: &str) -> Option<&ModalityCv> {
        self.entries.iter().find(|e| e.modality == modality)
    }
}

/// Standardization and classifier fitted on one training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldModel {
    pub standardize: StandardizeParams,
    pub model: Option<GaussianNbModel<f64>>,
    /// Set when the training fold holds a single class.
    pub constant: Option<i32>,
}

impl FoldModel {
    pub fn predict(&self, row: &[Option<f64>]) -> Result<i32> {
        if let Some(label) = self.constant {
            return Ok(label);
        }
        let model = self.model.as_ref().expect("fold model without classifier");
        Ok(predict_nb(model, &self.standardize.apply(row))?.label)
    }
}

/// Fits standardization and naive Bayes on the rows listed in `train` only.
pub fn fold_model(x: &[Vec<Option<f64>>], y: &[i32], train: &[usize], floor_ratio: f64) -> Result<FoldModel> {
    let standardize = StandardizeParams::fit(x, train)?;
    let tx: Vec<Vec<Option<f64>>> = train.iter().map(|&i| standardize.apply(&x[i])).collect();
    let ty: Vec<i32> = train.iter().map(|&i| y[i]).collect();
    let first = ty[0];
    if ty.iter().all(|&l| l == first) {
        return Ok(FoldModel { standardize, model: None, constant: Some(first) });
    }
    let model = fit_nb(&tx, &ty, floor_ratio)?;
    Ok(FoldModel { standardize, model: Some(model), constant: None })
}

/// Leave-one-window-out evaluation of every modality set.
///
/// Each fold trains on the days of all other windows and tests on the held-out
/// window's days. A day enters a run when at least one of the run's blocks is
/// present on that day.
pub fn within_patient_cv(ds: &PatientDataset, cfg: &StudyConfig, sets: &[ModalitySet]) -> PatientCv {
    let windows = match build_windows(&ds.exams, cfg) {
        Ok(w) => w,
        Err(e) => return PatientCv::skipped(ds, 0, Vec::new(), e.to_string()),
    };
    let relabel = |l: i32| if cfg.collapse_to_sign { l.signum() } else { l };
    let mut labels: Vec<i32> = windows.iter().map(|w| relabel(w.label)).collect();
    labels.sort_unstable();
    labels.dedup();
    if windows.len() < 2 {
        return PatientCv::skipped(ds, windows.len(), labels, "fewer than two labeled windows");
    }
    if labels.len() < 2 {
        return PatientCv::skipped(ds, windows.len(), labels, "no change of state: a single label across all windows");
    }

    let fm = feature_matrix(ds, cfg);
    let days = label_map(&windows);
    let labeled: Vec<(usize, usize, i32)> = fm
        .rows
        .iter()
        .enumerate()
        .filter_map(|(r, row)| days.get(&row.epoch).map(|&(w, l)| (r, w, relabel(l))))
        .collect();

    let entries = sets
        .iter()
        .map(|set| {
            let cols = fm.schema.columns(&set.modalities);
            let rows: Vec<&(usize, usize, i32)> =
                labeled.iter().filter(|(r, _, _)| set.modalities.iter().any(|&m| fm.rows[*r].is_present(m))).collect();
            if cols.is_empty() || rows.is_empty() {
                return ModalityCv::unavailable(&set.name, "no data for this modality");
            }
            let x: Vec<Vec<Option<f64>>> = rows.iter().map(|(r, _, _)| fm.rows[*r].select(&cols)).collect();
            let y: Vec<i32> = rows.iter().map(|&&(_, _, l)| l).collect();
            let mut distinct = y.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 2 {
                return ModalityCv::unavailable(&set.name, "labeled days cover a single label");
            }
            let mut truth = Vec::new();
            let mut preds = Vec::new();
            for w in 0..windows.len() {
                let (test, train): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| rows[i].1 == w);
                if test.is_empty() || train.is_empty() {
                    continue;
                }
                let fold = match fold_model(&x, &y, &train, cfg.nb_floor_ratio) {
                    Ok(f) => f,
                    Err(e) => return ModalityCv::unavailable(&set.name, e.to_string()),
                };
                for &i in &test {
                    match fold.predict(&x[i]) {
                        Ok(p) => {
                            truth.push(y[i]);
                            preds.push(p);
                        }
                        Err(e) => return ModalityCv::unavailable(&set.name, e.to_string()),
                    }
                }
            }
            match evaluate(&truth, &preds) {
                Ok(cm) => ModalityCv {
                    modality: set.name.clone(),
                    available: true,
                    reason: None,
                    confusion: Some(cm.summary()),
                },
                Err(e) => ModalityCv::unavailable(&set.name, e.to_string()),
            }
        })
        .collect();

    PatientCv { patient_id: ds.patient_id.clone(), skipped: None, windows: windows.len(), labels, entries }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortCvReport {
    pub modalities: Vec<String>,
    pub patients: Vec<PatientCv>,
    /// Mean accuracy over patients with an available entry; `None` if there is none.
    pub mean_accuracy: BTreeMap<String, Option<f64>>,
}

/// Collects per-patient results and averages accuracy per modality set.
pub fn cohort_cv(patients: &[PatientCv], sets: &[ModalitySet]) -> CohortCvReport {
    let mean_accuracy = sets
        .iter()
        .map(|s| {
            let acc: Vec<f64> =
                patients.iter().filter_map(|p| p.entry(&s.name)).filter_map(ModalityCv::accuracy).collect();
            let mean = (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64);
            (s.name.clone(), mean)
        })
        .collect();
    CohortCvReport {
        modalities: sets.iter().map(|s| s.name.clone()).collect(),
        patients: patients.to_vec(),
        mean_accuracy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AccelSample, ExamRecord};
    use crate::synth::SplitMix64;
    use crate::timeline::{Epoch, MS_PER_HOUR};

    /// Accelerometer-only patient: four exams, two per label, with the daily
    /// magnitude spread `sd_of(label)` plus day noise.
    fn patient(scores: [i32; 4], sd_of: impl Fn(i32) -> f64, seed: u64) -> PatientDataset {
        let mut rng = SplitMix64::new(seed);
        let exam_days = [7, 28, 49, 70];
        let exams: Vec<ExamRecord> =
            exam_days.iter().zip(scores).map(|(&d, s)| ExamRecord { date: Epoch(d), score: s }).collect();
        let mut accel = Vec::new();
        for day in 0..80 {
            let score = exams.iter().min_by_key(|e| (e.date.0 - day).abs()).unwrap().score;
            let sd = sd_of(score) * (1.0 + 0.05 * rng.next_normal());
            let base = Epoch(day).start_utc_ms(0);
            for h in 0..24 {
                for i in 0..12 {
                    let z = 9.81 + sd * rng.next_normal();
                    accel.push(AccelSample { t: base + h * MS_PER_HOUR + i * 5000, x: 0.0, y: 0.0, z });
                }
            }
        }
        PatientDataset { patient_id: "p".into(), accel, exams, ..Default::default() }
    }

    #[test]
    fn separable_classes_are_recognized() {
        let ds = patient([0, 0, -2, -2], |s| 1.0 + 0.5 * f64::from(s).abs(), 3);
        let cv = within_patient_cv(&ds, &StudyConfig::default(), &default_modality_sets());
        assert!(cv.skipped.is_none());
        let a = cv.entry("A").unwrap();
        assert!(a.accuracy().unwrap() >= 0.9, "{a:?}");
        assert_eq!(a.confusion.as_ref().unwrap().instances, 40);
        assert!(!cv.entry("G").unwrap().available);
        assert!(!cv.entry("P").unwrap().available);
        assert!(cv.entry(FUSION_LABEL).unwrap().available);
    }

    #[test]
    fn single_label_patient_is_skipped() {
        let ds = patient([1, 1, 1, 1], |_| 1.0, 4);
        let cv = within_patient_cv(&ds, &StudyConfig::default(), &default_modality_sets());
        assert!(cv.skipped.as_deref().unwrap().contains("single label"));
        assert!(cv.entries.is_empty());
    }

    #[test]
    fn collapse_to_sign_merges_scores() {
        let ds = patient([1, 2, -1, -3], |s| 1.0 + 0.3 * f64::from(s), 5);
        let cfg = StudyConfig { collapse_to_sign: true, ..StudyConfig::default() };
        let cv = within_patient_cv(&ds, &cfg, &[ModalitySet::single(Modality::Accel)]);
        assert_eq!(cv.labels, vec![-1, 1]);
    }

    #[test]
    fn held_out_rows_do_not_influence_the_fold() {
        let mut rng = SplitMix64::new(11);
        let x: Vec<Vec<Option<f64>>> = (0..30)
            .map(|i| vec![Some(rng.normal(f64::from(i % 3), 1.0)), (i % 4 != 0).then(|| rng.next_normal())])
            .collect();
        let y: Vec<i32> = (0..30).map(|i| i % 3).collect();
        let test: Vec<usize> = (10..20).collect();
        let train: Vec<usize> = (0..30).filter(|i| !test.contains(i)).collect();
        let with_test = fold_model(&x, &y, &train, 1e-9).unwrap();

        let kept_x: Vec<Vec<Option<f64>>> = train.iter().map(|&i| x[i].clone()).collect();
        let kept_y: Vec<i32> = train.iter().map(|&i| y[i]).collect();
        let all: Vec<usize> = (0..kept_x.len()).collect();
        let without_test = fold_model(&kept_x, &kept_y, &all, 1e-9).unwrap();
        assert_eq!(with_test, without_test);
    }

    #[test]
    fn single_class_fold_predicts_that_class() {
        let x = vec![vec![Some(1.0)], vec![Some(2.0)], vec![Some(9.0)]];
        let f = fold_model(&x, &[4, 4, 7], &[0, 1], 1e-9).unwrap();
        assert_eq!(f.predict(&x[2]).unwrap(), 4);
    }

    #[test]
    fn cohort_mean_skips_unavailable_entries() {
        let a = patient([0, 0, -2, -2], |s| 1.0 + 0.5 * f64::from(s).abs(), 6);
        let b = patient([1, 1, 1, 1], |_| 1.0, 7);
        let sets = default_modality_sets();
        let cvs: Vec<PatientCv> = [a, b].iter().map(|d| within_patient_cv(d, &StudyConfig::default(), &sets)).collect();
        let report = cohort_cv(&cvs, &sets);
        assert_eq!(report.mean_accuracy["A"], cvs[0].entry("A").unwrap().accuracy());
        assert_eq!(report.mean_accuracy["G"], None);
    }
}
