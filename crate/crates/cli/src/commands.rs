//! Subcommand implementations. Each writes its outputs into the output
//! directory and returns the paths it wrote.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use moodsense_core::changedetect::{change_eval_report, evaluate_change_detection, PatientChangeEval};
use moodsense_core::classifier::{cohort_cv, default_modality_sets, within_patient_cv};
use moodsense_core::features::{feature_matrix, FeatureMatrix};
use moodsense_core::fusion::{evaluate_fusion, fusion_report, FusionVariant};
use moodsense_core::ingest::{load_patient, validate, PatientDataset, Violation};
use moodsense_core::stats::{cohort_correlation, CorrelationMode};
use moodsense_core::synth::{generate_cohort, CohortTemplate};
use moodsense_core::StudyConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{load_cohort, patient_dirs};
use crate::error::{CliError, CliResult};
use crate::render::{render_timeline, TimelinePanel};

/// Version of every JSON report layout written here.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(out: &Path, name: &str, body: &T) -> CliResult<PathBuf> {
    let path = out.join(name);
    let mut text = serde_json::to_string_pretty(&Versioned { schema_version: SCHEMA_VERSION, body })?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn write_text(out: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    let path = out.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

pub fn synth(
    out: &Path,
    cohort_size: usize,
    template: &CohortTemplate,
    seed: u64,
    cfg: &StudyConfig,
) -> CliResult<Vec<PathBuf>> {
    if cohort_size == 0 {
        return Err(CliError::Usage("--cohort-size must be at least 1".into()));
    }
    for (i, t) in template.timelines.iter().enumerate() {
        let spec = template.patient_spec(i, 0);
        spec.validate().map_err(|e| CliError::data(format!("template timeline {i}: {e}")))?;
        if t.is_empty() {
            return Err(CliError::data(format!("template timeline {i} is empty")));
        }
    }
    fs::create_dir_all(out)?;
    let manifest = generate_cohort(cohort_size, template, seed, &cfg.interval_bounds, out)?;
    eprintln!("generated {} patients in {}", manifest.cohort_size, out.display());
    crate::data::files_below(out).map_err(Into::into).map(|files| {
        files.into_iter().filter(|p| p.file_name().is_some_and(|n| n != crate::manifest::RUN_MANIFEST_FILE)).collect()
    })
}

#[derive(Serialize)]
struct PatientValidation {
    patient_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    load_error: Option<LoadFailure>,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct LoadFailure {
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ValidationReport {
    patients: Vec<PatientValidation>,
    total_violations: usize,
}

/// Prints one line per problem to standard output. Fails with a data error
/// when any patient has a problem.
pub fn validate_cmd(data: &Path, out: Option<&Path>, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let dirs = patient_dirs(data)?;
    let patients: Vec<PatientValidation> = dirs
        .par_iter()
        .map(|d| {
            let patient_id = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            match load_patient(d, cfg) {
                Ok(ds) => PatientValidation { patient_id, load_error: None, violations: validate(&ds) },
                Err(e) => PatientValidation {
                    patient_id,
                    load_error: Some(LoadFailure { code: e.code(), message: e.to_string() }),
                    violations: Vec::new(),
                },
            }
        })
        .collect();
    let mut total = 0;
    for p in &patients {
        if let Some(e) = &p.load_error {
            println!("{} {} {}", p.patient_id, e.code, e.message);
            total += 1;
        }
        for v in &p.violations {
            println!("{} {} {}: {}", p.patient_id, v.code.as_str(), v.location, v.message);
            total += 1;
        }
    }
    let mut written = Vec::new();
    if let Some(out) = out {
        fs::create_dir_all(out)?;
        written.push(write_json(out, "validation.json", &ValidationReport { patients, total_violations: total })?);
    }
    if total > 0 {
        return Err(CliError::data(format!("{total} violation(s) in {}", data.display())));
    }
    eprintln!("{} patient(s) valid", dirs.len());
    Ok(written)
}

fn load(data: &Path, cfg: &StudyConfig) -> CliResult<Vec<PatientDataset>> {
    let patients = load_cohort(data, cfg)?;
    for ds in &patients {
        if let Some(v) = validate(ds).first() {
            return Err(CliError::data(format!("{}: {v}", ds.patient_id)));
        }
    }
    Ok(patients)
}

/// Writes `<out>/<patient_id>/features.csv` for every patient.
pub fn features(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let matrices: Vec<FeatureMatrix> = patients.par_iter().map(|ds| feature_matrix(ds, cfg)).collect();
    let mut written = Vec::new();
    for m in &matrices {
        let dir = out.join(&m.patient_id);
        fs::create_dir_all(&dir)?;
        written.push(write_text(&dir, "features.csv", &m.to_csv())?);
    }
    Ok(written)
}

#[derive(Serialize)]
struct CorrelationReport<'a> {
    daily: &'a moodsense_core::stats::CohortStudy,
    interval: &'a moodsense_core::stats::CohortStudy,
    daily_abs_r: Option<f64>,
    best_interval_abs_r: Option<f64>,
}

pub fn correlate(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let daily = cohort_correlation(&patients, cfg, CorrelationMode::Daily);
    let interval = cohort_correlation(&patients, cfg, CorrelationMode::Interval);
    let report = CorrelationReport {
        daily_abs_r: daily.pooled.overall.r().map(f64::abs),
        best_interval_abs_r: interval.best_interval_abs_r(),
        daily: &daily,
        interval: &interval,
    };
    fs::create_dir_all(out)?;
    Ok(vec![write_json(out, "correlation.json", &report)?])
}

pub fn classify(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let sets = default_modality_sets();
    let cvs: Vec<_> = patients.par_iter().map(|ds| within_patient_cv(ds, cfg, &sets)).collect();
    for cv in &cvs {
        if let Some(reason) = &cv.skipped {
            eprintln!("{} skipped: {reason}", cv.patient_id);
        }
    }
    fs::create_dir_all(out)?;
    Ok(vec![write_json(out, "classification.json", &cohort_cv(&cvs, &sets))?])
}

fn change_evals(patients: &[PatientDataset], cfg: &StudyConfig) -> Vec<PatientChangeEval> {
    patients.par_iter().map(|ds| evaluate_change_detection(ds, cfg)).collect()
}

pub fn detect(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let evals = change_evals(&patients, cfg);
    let mut csv = String::from("patient,epoch,modality,distance,normalized_score,fired\n");
    for e in &evals {
        if let Some(reason) = &e.skipped {
            eprintln!("{} skipped: {reason}", e.patient_id);
        }
        for d in &e.decisions {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                e.patient_id, d.epoch, d.modality, d.distance, d.normalized_score, d.fired
            );
        }
    }
    fs::create_dir_all(out)?;
    let a = write_text(out, "changes.csv", &csv)?;
    let b = write_json(out, "change_eval.json", &change_eval_report(evals, cfg))?;
    Ok(vec![a, b])
}

pub const FUSION_VARIANTS: [FusionVariant; 3] = [FusionVariant::And, FusionVariant::Or, FusionVariant::Weighted];

pub fn fuse(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let evals: Vec<_> = patients.par_iter().map(|ds| evaluate_fusion(ds, cfg, &FUSION_VARIANTS)).collect();
    for e in &evals {
        if let Some(n) = e.skipped.as_ref().or(e.notice.as_ref()) {
            eprintln!("{}: {n}", e.patient_id);
        }
    }
    fs::create_dir_all(out)?;
    Ok(vec![write_json(out, "fusion_eval.json", &fusion_report(evals, &FUSION_VARIANTS))?])
}

#[derive(Serialize)]
struct PatientSummary {
    patient_id: String,
    days: usize,
    exams: usize,
    fired_days: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
    recall: Option<f64>,
    precision: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    patients: Vec<PatientSummary>,
    /// Headline numbers of reports found in the output directory.
    reports: BTreeMap<String, serde_json::Value>,
}

fn headline(out: &Path) -> BTreeMap<String, serde_json::Value> {
    let keys: [(&str, &[&str]); 4] = [
        ("correlation.json", &["daily_abs_r", "best_interval_abs_r"]),
        ("classification.json", &["mean_accuracy"]),
        ("change_eval.json", &["mean_recall", "mean_precision", "mean_episode_recall"]),
        ("fusion_eval.json", &["rows"]),
    ];
    let mut map = BTreeMap::new();
    for (file, fields) in keys {
        let Ok(text) = fs::read_to_string(out.join(file)) else { continue };
        let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else { continue };
        let mut picked = serde_json::Map::new();
        for f in fields {
            let mut v = value.get(*f).cloned().unwrap_or(serde_json::Value::Null);
            if *f == "rows" {
                if let serde_json::Value::Array(rows) = &mut v {
                    for r in rows.iter_mut() {
                        if let serde_json::Value::Object(o) = r {
                            o.retain(|k, _| matches!(k.as_str(), "name" | "mean_recall" | "mean_precision"));
                        }
                    }
                }
            }
            picked.insert(f.to_string(), v);
        }
        map.insert(file.to_string(), serde_json::Value::Object(picked));
    }
    map
}

pub fn report(data: &Path, out: &Path, cfg: &StudyConfig) -> CliResult<Vec<PathBuf>> {
    let patients = load(data, cfg)?;
    let evals = change_evals(&patients, cfg);
    let mut panels = Vec::new();
    let mut rows = Vec::new();
    for (ds, e) in patients.iter().zip(evals) {
        let days = ds.data_days();
        let first = days.first().copied().or(ds.exams.first().map(|x| x.date)).expect("exams present");
        let last = days.last().copied().unwrap_or(first);
        rows.push(PatientSummary {
            patient_id: ds.patient_id.clone(),
            days: days.len(),
            exams: ds.exams.len(),
            fired_days: e.decisions.iter().filter(|d| d.fired).count(),
            skipped: e.skipped.clone(),
            recall: e.recall,
            precision: e.precision,
        });
        panels.push(TimelinePanel {
            patient_id: ds.patient_id.clone(),
            exams: ds.exams.clone(),
            decisions: e.decisions,
            first_day: first,
            last_day: last,
        });
    }
    fs::create_dir_all(out)?;
    let svg = write_text(out, "timeline.svg", &render_timeline(&panels))?;
    let summary = write_json(out, "summary.json", &Summary { patients: rows, reports: headline(out) })?;
    Ok(vec![svg, summary])
}
