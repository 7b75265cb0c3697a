//! Per-patient comparison of fusion strategies on held-out days.

use std::collections::BTreeMap;

use serde::Serialize;

use super::strategy::{calibrate_weights, fuse, FusionStrategy, FusionVariant};
use crate::changedetect::{change_setup, ChangeDecision, DetectionCounts, StateDetector};
use crate::config::StudyConfig;
use crate::features::Modality;
use crate::ingest::PatientDataset;

pub const WEIGHTED_NOTE: &str =
    "weighted fusion is a precision-weighted mean of threshold-normalized Mahalanobis scores that fires at 1; \
     the weighting scheme is a reconstruction";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionRow {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<FusionVariant>,
    pub modalities: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<String, f64>,
    #[serde(flatten)]
    pub counts: DetectionCounts,
    #[serde(serialize_with = "crate::na::serialize")]
    pub recall: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub precision: Option<f64>,
}

impl FusionRow {
    fn new(
        name: String,
        variant: Option<FusionVariant>,
        modalities: Vec<String>,
        weights: BTreeMap<String, f64>,
        counts: DetectionCounts,
    ) -> Self {
        Self { name, variant, modalities, weights, recall: counts.recall(), precision: counts.precision(), counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientFusionEval {
    pub patient_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
    /// Modalities with a fitted default-state model.
    pub fitted: Vec<String>,
    /// Modalities without a model, with the reason.
    pub unfitted: BTreeMap<String, String>,
    pub calibration_days: usize,
    pub test_days: usize,
    pub calibration_precision: BTreeMap<String, Option<f64>>,
    /// Single-modality rows on the test days.
    pub single_modality: Vec<FusionRow>,
    /// Fusion rows on the same test days.
    pub rows: Vec<FusionRow>,
}

impl PatientFusionEval {
    fn empty(ds: &PatientDataset) -> Self {
        Self {
            patient_id: ds.patient_id.clone(),
            skipped: None,
            notice: None,
            fitted: Vec::new(),
            unfitted: BTreeMap::new(),
            calibration_days: 0,
            test_days: 0,
            calibration_precision: BTreeMap::new(),
            single_modality: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn row(&self, name: &str) -> Option<&FusionRow> {
        self.rows.iter().chain(&self.single_modality).find(|r| r.name == name)
    }
}

pub const ROW_AL_WEIGHTED: &str = "A+L weighted fusion";

fn all_in_name(v: FusionVariant) -> &'static str {
    match v {
        FusionVariant::And => "All-in AND fusion",
        FusionVariant::Or => "All-in OR fusion",
        FusionVariant::Weighted => "All-in weighted fusion",
    }
}

fn single_name(m: &str) -> String {
    format!("{m} only")
}

/// Fits one default-state detector per modality and compares the requested
/// all-in strategies, plus A+L (accelerometer and location) weighted fusion,
/// against the single modalities.
///
/// Days enter the evaluation when every fitted modality has a decision. Default
/// and change days are each split chronologically in half: the first halves
/// calibrate the weights, the second halves are the test days.
pub fn evaluate_fusion(ds: &PatientDataset, cfg: &StudyConfig, variants: &[FusionVariant]) -> PatientFusionEval {
    let mut out = PatientFusionEval::empty(ds);
    let setup = match change_setup(ds, cfg) {
        Ok(s) => s,
        Err(reason) => {
            out.skipped = Some(reason);
            return out;
        }
    };
    let rows = &setup.matrix.rows;
    let mut detectors: Vec<StateDetector> = Vec::new();
    for m in Modality::ALL {
        match StateDetector::fit(rows, &setup.train, &setup.matrix.schema, &[m], cfg, setup.default_label) {
            Ok(d) => detectors.push(d),
            Err(e) => {
                out.unfitted.insert(m.letter().to_string(), e.to_string());
            }
        }
    }
    out.fitted = detectors.iter().map(|d| d.modality.clone()).collect();
    if detectors.is_empty() {
        out.skipped = Some("no modality has enough default-state days".into());
        return out;
    }
    if detectors.len() < 2 {
        out.notice = Some("fewer than two modalities fitted; only single-modality rows are reported".into());
    }

    // (epoch order, change, per-detector decisions)
    let days: Vec<(bool, Vec<ChangeDecision>)> = setup
        .labeled
        .iter()
        .filter_map(|d| {
            let decisions: Option<Vec<ChangeDecision>> = detectors.iter().map(|det| det.decide(&rows[d.row])).collect();
            decisions.map(|v| (d.change, v))
        })
        .collect();
    let split = |change: bool| -> (Vec<usize>, Vec<usize>) {
        let idx: Vec<usize> = (0..days.len()).filter(|&i| days[i].0 == change).collect();
        let half = idx.len() / 2;
        (idx[..half].to_vec(), idx[half..].to_vec())
    };
    let (cal_default, test_default) = split(false);
    let (cal_change, test_change) = split(true);
    let calibration: Vec<usize> = cal_default.into_iter().chain(cal_change).collect();
    let mut test: Vec<usize> = test_default.into_iter().chain(test_change).collect();
    test.sort_unstable();
    out.calibration_days = calibration.len();
    out.test_days = test.len();

    let counts_of = |idx: &[usize], fired: &dyn Fn(&[ChangeDecision]) -> bool| {
        let mut c = DetectionCounts::default();
        for &i in idx {
            c.add(days[i].0, fired(&days[i].1));
        }
        c
    };

    for (k, det) in detectors.iter().enumerate() {
        let cal = counts_of(&calibration, &|d| d[k].fired);
        out.calibration_precision.insert(det.modality.clone(), cal.precision());
        let c = counts_of(&test, &|d| d[k].fired);
        out.single_modality.push(FusionRow::new(
            single_name(&det.modality),
            None,
            vec![det.modality.clone()],
            BTreeMap::new(),
            c,
        ));
    }
    if detectors.len() < 2 {
        return out;
    }

    let fused_counts = |strategy: &FusionStrategy, keep: &[usize]| {
        counts_of(&test, &|d| {
            let inputs: Vec<ChangeDecision> = keep.iter().map(|&k| d[k].clone()).collect();
            fuse(strategy, &inputs).expect("non-empty inputs").fired
        })
    };

    let position = |m: Modality| detectors.iter().position(|d| d.modality == m.letter());
    if let (Some(a), Some(g)) = (position(Modality::Accel), position(Modality::Gps)) {
        let precisions: BTreeMap<String, Option<f64>> = [a, g]
            .iter()
            .map(|&k| (detectors[k].modality.clone(), out.calibration_precision[&detectors[k].modality]))
            .collect();
        let strategy = FusionStrategy::weighted(calibrate_weights(&precisions)).expect("positive calibrated weights");
        let c = fused_counts(&strategy, &[a, g]);
        out.rows.push(FusionRow::new(
            ROW_AL_WEIGHTED.into(),
            Some(FusionVariant::Weighted),
            vec![detectors[a].modality.clone(), detectors[g].modality.clone()],
            strategy.weights,
            c,
        ));
    }

    let all: Vec<usize> = (0..detectors.len()).collect();
    for &v in variants {
        let strategy = match v {
            FusionVariant::And => FusionStrategy::and(),
            FusionVariant::Or => FusionStrategy::or(),
            FusionVariant::Weighted => FusionStrategy::weighted(calibrate_weights(&out.calibration_precision))
                .expect("positive calibrated weights"),
        };
        let c = fused_counts(&strategy, &all);
        out.rows.push(FusionRow::new(all_in_name(v).into(), Some(v), out.fitted.clone(), strategy.weights, c));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionSummaryRow {
    pub name: String,
    /// Patients contributing a row.
    pub patients: usize,
    #[serde(serialize_with = "crate::na::serialize")]
    pub mean_recall: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub mean_precision: Option<f64>,
    /// Counts summed over patients.
    #[serde(flatten)]
    pub pooled: DetectionCounts,
    #[serde(serialize_with = "crate::na::serialize")]
    pub pooled_recall: Option<f64>,
    #[serde(serialize_with = "crate::na::serialize")]
    pub pooled_precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionEvalReport {
    pub note: &'static str,
    pub rows: Vec<FusionSummaryRow>,
    pub single_modality: Vec<FusionSummaryRow>,
    pub patients: Vec<PatientFusionEval>,
}

impl FusionEvalReport {
    pub fn row(&self, name: &str) -> Option<&FusionSummaryRow> {
        self.rows.iter().chain(&self.single_modality).find(|r| r.name == name)
    }
}

fn summarize(name: &str, rows: &[&FusionRow]) -> FusionSummaryRow {
    let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    let mut pooled = DetectionCounts::default();
    for r in rows {
        pooled.true_positives += r.counts.true_positives;
        pooled.false_positives += r.counts.false_positives;
        pooled.false_negatives += r.counts.false_negatives;
        pooled.true_negatives += r.counts.true_negatives;
    }
    FusionSummaryRow {
        name: name.to_string(),
        patients: rows.len(),
        mean_recall: mean(rows.iter().filter_map(|r| r.recall).collect()),
        mean_precision: mean(rows.iter().filter_map(|r| r.precision).collect()),
        pooled_recall: pooled.recall(),
        pooled_precision: pooled.precision(),
        pooled,
    }
}

/// Cohort table: the fusion rows in the order A+L weighted, then the all-in
/// strategies in `variants` order, followed by one row per modality.
pub fn fusion_report(patients: Vec<PatientFusionEval>, variants: &[FusionVariant]) -> FusionEvalReport {
    let collect = |name: &str, single: bool| -> Vec<&FusionRow> {
        patients
            .iter()
            .filter_map(|p| if single { &p.single_modality } else { &p.rows }.iter().find(|r| r.name == name))
            .collect()
    };
    let mut names: Vec<&str> = vec![ROW_AL_WEIGHTED];
    names.extend(variants.iter().map(|&v| all_in_name(v)));
    let rows = names.iter().map(|n| summarize(n, &collect(n, false))).collect();
    let single_modality = Modality::ALL
        .iter()
        .map(|m| single_name(m.letter()))
        .filter(|n| !collect(n, true).is_empty())
        .map(|n| summarize(&n, &collect(&n, true)))
        .collect();
    FusionEvalReport { note: WEIGHTED_NOTE, rows, single_modality, patients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AccelSample, ExamRecord, GpsFix};
    use crate::synth::SplitMix64;
    use crate::timeline::{Epoch, MS_PER_HOUR};

    const VARIANTS: [FusionVariant; 3] = [FusionVariant::And, FusionVariant::Or, FusionVariant::Weighted];

    fn patient(scores: &[i32], gps: bool, seed: u64) -> PatientDataset {
        let mut rng = SplitMix64::new(seed);
        let exams: Vec<ExamRecord> =
            scores.iter().enumerate().map(|(i, &s)| ExamRecord { date: Epoch(7 + 21 * i as i32), score: s }).collect();
        let mut accel = Vec::new();
        let mut fixes = Vec::new();
        for day in 0..(21 * scores.len() as i32) {
            let score = exams.iter().min_by_key(|e| (e.date.0 - day).abs()).unwrap().score;
            let level = 1.0 + 0.3 * f64::from(score) + 0.05 * rng.next_normal();
            let base = Epoch(day).start_utc_ms(0);
            for h in 0..24 {
                for i in 0..12 {
                    let z = 9.81 + level * rng.next_normal();
                    accel.push(AccelSample { t: base + h * MS_PER_HOUR + i * 5000, x: 0.0, y: 0.0, z });
                }
                if gps {
                    let r = 0.01 * (1.0 + 0.1 * rng.next_normal());
                    let a = std::f64::consts::TAU * h as f64 / 24.0;
                    fixes.push(GpsFix {
                        t: base + h * MS_PER_HOUR,
                        lat: 47.0 + r * a.sin(),
                        lon: 11.0 + r * a.cos(),
                        accuracy_m: 5.0,
                    });
                }
            }
        }
        PatientDataset { patient_id: "p".into(), accel, gps: fixes, exams, ..Default::default() }
    }

    #[test]
    fn table_rows_and_ordering() {
        let e = evaluate_fusion(&patient(&[0, 0, 2, 2], true, 4), &StudyConfig::default(), &VARIANTS);
        assert!(e.skipped.is_none());
        assert_eq!(e.fitted, vec!["A", "G"]);
        let names: Vec<&str> = e.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec![ROW_AL_WEIGHTED, "All-in AND fusion", "All-in OR fusion", "All-in weighted fusion"]);
        let and = e.row("All-in AND fusion").unwrap().counts.true_positives;
        let or = e.row("All-in OR fusion").unwrap().counts.true_positives;
        for s in &e.single_modality {
            assert!(and <= s.counts.true_positives && s.counts.true_positives <= or);
        }
        assert!(e.row("A only").unwrap().recall.unwrap() >= 0.9);
        assert_eq!(e.calibration_days + e.test_days, 40);
    }

    #[test]
    fn single_modality_gives_notice() {
        let e = evaluate_fusion(&patient(&[0, 0, 2, 2], false, 5), &StudyConfig::default(), &VARIANTS);
        assert!(e.notice.is_some());
        assert!(e.rows.is_empty());
        assert_eq!(e.single_modality.len(), 1);
    }

    #[test]
    fn report_keeps_table_order() {
        let pats: Vec<PatientFusionEval> = (0..3)
            .map(|i| evaluate_fusion(&patient(&[0, 0, 2, 2], true, 10 + i), &StudyConfig::default(), &VARIANTS))
            .collect();
        let r = fusion_report(pats, &VARIANTS);
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.rows[0].patients, 3);
        assert_eq!(r.single_modality.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), vec!["A only", "G only"]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("reconstruction"));
    }
}
