mod commands;
mod data;
mod error;
mod manifest;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use moodsense_core::synth::CohortTemplate;
use moodsense_core::StudyConfig;

use crate::error::{CliError, CliResult};
use crate::manifest::{digests, record_step, StepRecord};

/// Mood-state analytics over smartphone sensor data.
#[derive(Parser)]
#[command(name = "moodsense", version, about)]
struct Cli {
    /// Study configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Cohort directory (one subdirectory per patient) or a single patient directory.
    #[arg(long, global = true, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Directory for generated data and reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort plus manifest.json.
    Synth {
        #[arg(long, default_value_t = 12)]
        cohort_size: usize,
        /// Cohort template (JSON).
        #[arg(long, value_name = "FILE")]
        template: Option<PathBuf>,
    },
    /// Check patient directories; exits 2 when anything is wrong.
    Validate {
        /// Data directory; same as --data.
        dir: Option<PathBuf>,
    },
    /// Per-day feature vectors -> features.csv.
    Features,
    /// Activity/state correlation -> correlation.json.
    Correlate,
    /// Leave-one-window-out naive Bayes -> classification.json.
    Classify,
    /// Default-state change detection -> changes.csv, change_eval.json.
    Detect,
    /// Decision-level fusion -> fusion_eval.json.
    Fuse,
    /// State timeline and summary -> timeline.svg, summary.json.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Validate { .. } => "validate",
            Command::Features => "features",
            Command::Correlate => "correlate",
            Command::Classify => "classify",
            Command::Detect => "detect",
            Command::Fuse => "fuse",
            Command::Report => "report",
        }
    }
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str, cmd: &str) -> CliResult<&'a Path> {
    value.as_deref().ok_or_else(|| CliError::Usage(format!("{cmd} needs {flag}")))
}

fn run(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    let mut cfg = match &cli.config {
        Some(path) => StudyConfig::from_json_file(path).map_err(|e| CliError::data(e.to_string()))?,
        None => StudyConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let name = cli.command.name();
    let mut inputs: Vec<PathBuf> = cli.config.iter().cloned().collect();

    let data_dir = match &cli.command {
        Command::Validate { dir: Some(d) } => Some(d.clone()),
        Command::Synth { .. } => None,
        _ => Some(required(&cli.data, "--data", name)?.to_path_buf()),
    };
    if let Some(dir) = &data_dir {
        if cli.data.is_none() && matches!(cli.command, Command::Validate { dir: None }) {
            return Err(CliError::Usage("validate needs a directory".into()));
        }
        data::apply_manifest_offsets(dir, &mut cfg)?;
        if dir.is_dir() {
            inputs.extend(
                data::files_below(dir)?
                    .into_iter()
                    .filter(|p| p.file_name().is_some_and(|n| n != manifest::RUN_MANIFEST_FILE)),
            );
        }
    }
    let data_dir = data_dir.or_else(|| cli.data.clone());

    let outputs = match &cli.command {
        Command::Synth { cohort_size, template } => {
            let out = required(&cli.out, "--out", name)?;
            let template = match template {
                Some(path) => {
                    inputs.push(path.clone());
                    CohortTemplate::from_json_file(path).map_err(|e| CliError::data(e.to_string()))?
                }
                None => CohortTemplate::default(),
            };
            commands::synth(out, *cohort_size, &template, cfg.seed, &cfg)?
        }
        Command::Validate { .. } => {
            let dir = data_dir.as_deref().ok_or_else(|| CliError::Usage("validate needs a directory".into()))?;
            commands::validate_cmd(dir, cli.out.as_deref(), &cfg)?
        }
        cmd => {
            let data = data_dir.as_deref().expect("checked above");
            let out = required(&cli.out, "--out", name)?;
            match cmd {
                Command::Features => commands::features(data, out, &cfg)?,
                Command::Correlate => commands::correlate(data, out, &cfg)?,
                Command::Classify => commands::classify(data, out, &cfg)?,
                Command::Detect => commands::detect(data, out, &cfg)?,
                Command::Fuse => commands::fuse(data, out, &cfg)?,
                Command::Report => commands::report(data, out, &cfg)?,
                Command::Synth { .. } | Command::Validate { .. } => unreachable!(),
            }
        }
    };

    if let Some(out) = &cli.out {
        let step = StepRecord {
            config: serde_json::to_value(&cfg)?,
            inputs: digests(&inputs)?,
            outputs: digests(&outputs)?,
            wall_clock_ms: started.elapsed().as_millis(),
        };
        record_step(out, name, step)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("internal error: unexpected panic");
            ExitCode::from(3)
        }
    }
}
