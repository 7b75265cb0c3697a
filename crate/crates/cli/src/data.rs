//! Locating and loading patient directories.

use std::fs;
use std::path::{Path, PathBuf};

use moodsense_core::ingest::{load_patient, PatientDataset, EXAMS_FILE};
use moodsense_core::synth::{CohortManifest, MANIFEST_FILE};
use moodsense_core::StudyConfig;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// `dir` itself when it holds `exams.csv`, otherwise its subdirectories that
/// do, sorted by name.
pub fn patient_dirs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::data(format!("{} is not a directory", dir.display())));
    }
    if dir.join(EXAMS_FILE).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        if path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::data(format!("no patient directories under {}", dir.display())));
    }
    Ok(out)
}

/// Adds the UTC offsets listed in `<dir>/manifest.json` for patients the
/// configuration does not already cover.
pub fn apply_manifest_offsets(dir: &Path, cfg: &mut StudyConfig) -> CliResult<()> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Ok(());
    }
    let text = fs::read_to_string(&path)?;
    let manifest: CohortManifest =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    for p in manifest.patients {
        cfg.patient_offsets.entry(p.patient_id).or_insert(p.utc_offset_minutes);
    }
    Ok(())
}

/// Loads every patient, in directory-name order.
pub fn load_cohort(dir: &Path, cfg: &StudyConfig) -> CliResult<Vec<PatientDataset>> {
    let dirs = patient_dirs(dir)?;
    dirs.par_iter()
        .map(|d| load_patient(d, cfg).map_err(|e| CliError::data(format!("{}: {} {e}", d.display(), e.code()))))
        .collect()
}

/// Every regular file below `dir`, sorted.
pub fn files_below(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.is_file() {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}
