use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn moodsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moodsense")).args(args).output().expect("binary runs")
}

fn synth(dir: &Path, n: &str, seed: &str) {
    let out = moodsense(&["--seed", seed, "--out", dir.to_str().unwrap(), "synth", "--cohort-size", n]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_then_validate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    synth(&d, "2", "7");
    assert!(d.join("manifest.json").is_file());
    assert!(d.join("p0001/exams.csv").is_file());
    let out = moodsense(&["validate", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn score_four_exits_two_with_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    synth(&d, "1", "7");
    let exams = d.join("p0001/exams.csv");
    let text = fs::read_to_string(&exams).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let date = lines[1].split(',').next().unwrap().to_string();
    lines[1] = format!("{date},4");
    fs::write(&exams, lines.join("\n") + "\n").unwrap();

    let report = tmp.path().join("report");
    let out = moodsense(&["--out", report.to_str().unwrap(), "validate", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("EXAM_SCORE_RANGE"));
    let json = fs::read_to_string(report.join("validation.json")).unwrap();
    assert!(json.contains("EXAM_SCORE_RANGE"));
}

#[test]
fn analysis_refuses_invalid_data() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    synth(&d, "1", "3");
    let gps = d.join("p0001/gps.csv");
    let text = fs::read_to_string(&gps).unwrap();
    let fixed: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 1 {
                let mut f: Vec<&str> = l.split(',').collect();
                f[1] = "95";
                f.join(",") + "\n"
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    fs::write(&gps, fixed).unwrap();
    let out = moodsense(&["--data", d.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap(), "features"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_writes_timeline_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let o = tmp.path().join("o");
    synth(&d, "3", "11");
    for cmd in ["detect", "report"] {
        let out = moodsense(&["--data", d.to_str().unwrap(), "--out", o.to_str().unwrap(), cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let svg = fs::read_to_string(o.join("timeline.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("p0001") && svg.contains("p0003"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["patients"].as_array().unwrap().len(), 3);
    assert!(summary["reports"]["change_eval.json"]["mean_recall"].is_number());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(o.join("run_manifest.json")).unwrap()).unwrap();
    let outputs = manifest["steps"]["report"]["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    assert!(outputs.iter().all(|f| f["sha256"].as_str().unwrap().len() == 64));
    assert!(manifest["steps"]["detect"].is_object());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = moodsense(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_data_flag_is_usage_error() {
    let out = moodsense(&["classify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(moodsense(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"chi2_confidence": 1.5}"#).unwrap();
    let out = moodsense(&["--config", cfg.to_str().unwrap(), "--out", tmp.path().join("d").to_str().unwrap(), "synth"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn commands_do_not_touch_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    let o = tmp.path().join("o");
    synth(&d, "2", "5");
    let snapshot = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<(String, Vec<u8>)> = Vec::new();
        for p in fs::read_dir(dir).unwrap() {
            let p = p.unwrap().path();
            if p.is_dir() {
                for f in fs::read_dir(&p).unwrap() {
                    let f = f.unwrap().path();
                    v.push((f.display().to_string(), fs::read(&f).unwrap()));
                }
            } else {
                v.push((p.display().to_string(), fs::read(&p).unwrap()));
            }
        }
        v.sort();
        v
    };
    let before = snapshot(&d);
    for cmd in ["features", "correlate", "classify", "fuse"] {
        let out = moodsense(&["--data", d.to_str().unwrap(), "--out", o.to_str().unwrap(), cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
    }
    assert_eq!(before, snapshot(&d));
    let features = fs::read_to_string(o.join("p0002/features.csv")).unwrap();
    assert!(features.starts_with("date,"));
    assert_eq!(features.lines().count(), 85);
}
