use moodsense_core::changedetect::evaluate_change_detection;
use moodsense_core::classifier::{default_modality_sets, within_patient_cv};
use moodsense_core::features::feature_matrix;
use moodsense_core::fusion::{evaluate_fusion, FusionVariant};
use moodsense_core::ingest::{load_patient, validate};
use moodsense_core::synth::{cohort_manifest, cohort_specs, generate_patient, CohortTemplate};
use moodsense_core::StudyConfig;

fn cfg(template: &CohortTemplate) -> StudyConfig {
    StudyConfig { utc_offset_minutes: template.utc_offset_minutes, ..StudyConfig::default() }
}

#[test]
fn written_patient_reloads_identically() {
    let template = CohortTemplate::default();
    let cfg = cfg(&template);
    let spec = &cohort_specs(1, &template, 9)[0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(&spec.patient_id);
    let written = generate_patient(spec, &cfg.interval_bounds, &path).unwrap();
    let loaded = load_patient(&path, &cfg).unwrap();
    assert!(validate(&loaded).is_empty());
    assert_eq!(written.exams, loaded.exams);
    assert_eq!(written.accel.len(), loaded.accel.len());
    assert_eq!(feature_matrix(&written, &cfg), feature_matrix(&loaded, &cfg));
}

#[test]
fn manifest_agrees_with_exam_labels() {
    let template = CohortTemplate::default();
    let specs = cohort_specs(5, &template, 42);
    let manifest = cohort_manifest(&specs, &template, 42);
    assert_eq!(manifest.patients.len(), 5);
    for (spec, entry) in specs.iter().zip(&manifest.patients) {
        assert_eq!(entry.patient_id, spec.patient_id);
        for exam in &entry.exams {
            assert_eq!(exam.score, spec.score_on(exam.date));
        }
    }
}

#[test]
fn separable_patient_runs_through_every_stage() {
    let template = CohortTemplate::default();
    let cfg = cfg(&template);
    let spec = &cohort_specs(1, &template, 42)[0];
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_patient(spec, &cfg.interval_bounds, dir.path()).unwrap();

    let cv = within_patient_cv(&ds, &cfg, &default_modality_sets());
    assert!(cv.skipped.is_none());
    assert!(cv.entry("fusion").and_then(|e| e.accuracy()).unwrap() >= 0.9);

    let change = evaluate_change_detection(&ds, &cfg);
    assert!(change.skipped.is_none());
    assert!(change.recall.unwrap() >= 0.9);
    assert!(change.episodes >= 1);

    let fusion = evaluate_fusion(&ds, &cfg, &[FusionVariant::And, FusionVariant::Or, FusionVariant::Weighted]);
    let and = fusion.row("All-in AND fusion").unwrap();
    let or = fusion.row("All-in OR fusion").unwrap();
    assert!(and.counts.true_positives <= or.counts.true_positives);
}

#[test]
fn single_state_patient_is_skipped_with_reason() {
    let template = CohortTemplate::default();
    let cfg = cfg(&template);
    let spec = &cohort_specs(4, &template, 42)[3];
    assert!(spec.timeline.iter().all(|s| s.score == 0));
    let dir = tempfile::tempdir().unwrap();
    let ds = generate_patient(spec, &cfg.interval_bounds, dir.path()).unwrap();
    assert!(within_patient_cv(&ds, &cfg, &default_modality_sets()).skipped.is_some());
    assert!(evaluate_change_detection(&ds, &cfg).skipped.is_some());
}
