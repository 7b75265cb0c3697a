//! Synthetic patients: per-day state from the timeline drives every stream.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use super::template::{CohortTemplate, Segment, SyntheticPatientSpec};
use crate::features::EARTH_RADIUS_M;
use crate::ingest::{
    write_patient, AccelSample, CallDirection, CallRecord, ExamRecord, GpsFix, PatientDataset, VoiceFeatureRow,
};
use crate::timeline::{interval_of, Epoch, IntervalBounds, MS_PER_HOUR, MS_PER_MINUTE};

const GRAVITY: f64 = 9.81;

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

/// Metres per degree of latitude.
fn metres_per_degree() -> f64 {
    EARTH_RADIUS_M * std::f64::consts::PI / 180.0
}

fn offset_deg(lat: f64, lon: f64, north_m: f64, east_m: f64) -> (f64, f64) {
    let m = metres_per_degree();
    (lat + north_m / m, lon + east_m / (m * lat.to_radians().cos()))
}

/// Independent streams, forked in a fixed order from the patient seed.
struct Streams {
    state: SplitMix64,
    accel: SplitMix64,
    gps: SplitMix64,
    calls: SplitMix64,
    voice: SplitMix64,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let mut root = SplitMix64::new(seed);
        Self { state: root.fork(), accel: root.fork(), gps: root.fork(), calls: root.fork(), voice: root.fork() }
    }
}

fn accel_day(
    spec: &SyntheticPatientSpec,
    day: Epoch,
    score: f64,
    bounds: &IntervalBounds,
    s: &mut Streams,
    out: &mut Vec<AccelSample>,
) {
    let a = &spec.model.activity;
    let off = spec.utc_offset_minutes;
    let level: Vec<f64> =
        (0..4).map(|i| (a.level[i] + a.per_point[i] * score + a.day_sd[i] * s.state.next_normal()).max(0.02)).collect();
    let start = day.start_utc_ms(off);
    let every = i64::from(a.burst_every_minutes.max(1)) * MS_PER_MINUTE;
    let mut t0 = start;
    while t0 < start + 24 * MS_PER_HOUR {
        let sd = level[interval_of(t0, off, bounds).index()];
        let (mut ux, mut uy, mut uz) = (s.accel.next_normal(), s.accel.next_normal(), s.accel.next_normal());
        let norm = (ux * ux + uy * uy + uz * uz).sqrt().max(1e-12);
        ux /= norm;
        uy /= norm;
        uz /= norm;
        for k in 0..a.samples_per_burst {
            let m = (GRAVITY + sd * s.accel.next_normal()).abs();
            out.push(AccelSample {
                t: t0 + i64::from(k * a.sample_spacing_s) * 1000,
                x: round_to(m * ux, 3),
                y: round_to(m * uy, 3),
                z: round_to(m * uz, 3),
            });
        }
        t0 += every;
    }
}

/// Place offsets (north, east) as fractions of the day's radius.
fn place_pool(spec: &SyntheticPatientSpec, rng: &mut SplitMix64) -> Vec<(f64, f64)> {
    (0..spec.model.mobility.places.max(1))
        .map(|_| {
            let bearing = rng.uniform(0.0, std::f64::consts::TAU);
            let frac = rng.uniform(0.3, 1.0);
            (frac * bearing.cos(), frac * bearing.sin())
        })
        .collect()
}

fn gps_day(
    spec: &SyntheticPatientSpec,
    day: Epoch,
    score: f64,
    home: (f64, f64),
    pool: &[(f64, f64)],
    s: &mut Streams,
    out: &mut Vec<GpsFix>,
) {
    let m = &spec.model.mobility;
    let radius = (m.radius_m * (1.0 + m.radius_per_point * score)).max(200.0);
    let trips =
        (m.trips + m.trips_per_point * score + m.trips_sd * s.state.next_normal()).round().clamp(0.0, 8.0) as usize;
    let mut stops: Vec<(f64, f64)> = vec![home];
    for _ in 0..trips {
        let (n, e) = pool[s.gps.below(pool.len() as u64) as usize];
        stops.push(offset_deg(home.0, home.1, n * radius, e * radius));
    }
    stops.push(home);

    // stop 0 until 08:00, then equal slots until 20:00; each slot opens with
    // a 20-minute transfer from the previous stop
    let day_start = day.start_utc_ms(spec.utc_offset_minutes);
    let active_from = 8 * MS_PER_HOUR;
    let slot = 12 * MS_PER_HOUR / (trips as i64 + 1);
    let transfer = 20 * MS_PER_MINUTE;
    let position = |rel: i64| -> (f64, f64) {
        if rel < active_from {
            return stops[0];
        }
        let k = (((rel - active_from) / slot) as usize + 1).min(stops.len() - 1);
        let into = rel - active_from - (k as i64 - 1) * slot;
        if k == stops.len() - 1 && into >= slot {
            return stops[k];
        }
        if into < transfer {
            let f = into as f64 / transfer as f64;
            let (a, b) = (stops[k - 1], stops[k]);
            (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
        } else {
            stops[k]
        }
    };
    let every = i64::from(m.fix_every_minutes.max(1)) * MS_PER_MINUTE;
    let mut rel = 0;
    while rel < 24 * MS_PER_HOUR {
        let (lat, lon) = position(rel);
        let bad = s.gps.chance(m.bad_fix_fraction);
        let (noise, accuracy) = if bad {
            (m.bad_fix_accuracy_m * 2.0, m.bad_fix_accuracy_m)
        } else {
            (m.noise_m, round_to(s.gps.uniform(3.0, 15.0), 1))
        };
        let (lat, lon) = offset_deg(lat, lon, noise * s.gps.next_normal(), noise * s.gps.next_normal());
        out.push(GpsFix { t: day_start + rel, lat: round_to(lat, 6), lon: round_to(lon, 6), accuracy_m: accuracy });
        rel += every;
    }
}

fn calls_day(
    spec: &SyntheticPatientSpec,
    day: Epoch,
    score: f64,
    contacts: &[String],
    s: &mut Streams,
    calls: &mut Vec<CallRecord>,
    voice: &mut Vec<VoiceFeatureRow>,
) {
    let c = &spec.model.calls;
    let n = s.calls.poisson((c.rate + c.rate_per_point * score).max(0.2));
    let mean = (c.mean_duration_s * (1.0 + c.duration_per_point * score)).max(5.0);
    let out_p = (c.outgoing_fraction + c.outgoing_per_point * score).clamp(0.05, 0.95);
    let night_p = (c.night_fraction + c.night_per_point * score).clamp(0.0, 0.9);
    let start = day.start_utc_ms(spec.utc_offset_minutes);
    let mut day_calls: Vec<CallRecord> = (0..n)
        .map(|_| {
            let secs = if s.calls.chance(night_p) {
                s.calls.uniform(0.0, 6.0 * 3600.0)
            } else {
                s.calls.uniform(6.0 * 3600.0, 86_400.0)
            };
            let duration_s = round_to(-mean * (1.0 - s.calls.next_f64()).ln(), 1);
            let direction = if s.calls.chance(out_p) { CallDirection::Out } else { CallDirection::In };
            let contact = contacts[s.calls.below(contacts.len() as u64) as usize].clone();
            CallRecord { t: start + secs.floor() as i64 * 1000, direction, duration_s, contact }
        })
        .collect();
    day_calls.sort_by_key(|c| c.t);
    for call in day_calls {
        if !spec.model.voice.is_empty() {
            voice.push(VoiceFeatureRow {
                call_id: format!("{}-c{:05}", spec.patient_id, calls.len() + 1),
                t: call.t,
                values: spec
                    .model
                    .voice
                    .iter()
                    .map(|v| round_to(v.mean + v.per_point * score + v.sd * s.voice.next_normal(), 4))
                    .collect(),
            });
        }
        calls.push(call);
    }
}

/// Builds the dataset of `spec` in memory.
pub fn generate_patient_dataset(spec: &SyntheticPatientSpec, bounds: &IntervalBounds) -> PatientDataset {
    let mut s = Streams::new(spec.seed);
    let m = &spec.model.mobility;
    let jitter = m.home_jitter_m * s.gps.next_f64().sqrt();
    let bearing = s.gps.uniform(0.0, std::f64::consts::TAU);
    let home = offset_deg(m.home_lat, m.home_lon, jitter * bearing.cos(), jitter * bearing.sin());
    let home = (round_to(home.0, 6), round_to(home.1, 6));
    let pool = place_pool(spec, &mut s.gps);
    let contacts: Vec<String> =
        (0..spec.model.calls.contacts.max(1)).map(|_| format!("{:016x}", s.calls.next_u64())).collect();

    let mut ds = PatientDataset {
        patient_id: spec.patient_id.clone(),
        utc_offset_minutes: spec.utc_offset_minutes,
        voice_schema: spec.model.voice.iter().map(|v| v.name.clone()).collect(),
        ..Default::default()
    };
    for d in 0..spec.days {
        let day = spec.start_date.offset(d as i32);
        let score = f64::from(spec.score_on(day));
        accel_day(spec, day, score, bounds, &mut s, &mut ds.accel);
        gps_day(spec, day, score, home, &pool, &mut s, &mut ds.gps);
        calls_day(spec, day, score, &contacts, &mut s, &mut ds.calls, &mut ds.voice);
    }
    ds.exams = spec.exam_days().into_iter().map(|date| ExamRecord { date, score: spec.score_on(date) }).collect();
    ds
}

/// Generates `spec` into `dir` in the ingest file format.
pub fn generate_patient(
    spec: &SyntheticPatientSpec,
    bounds: &IntervalBounds,
    dir: &Path,
) -> io::Result<PatientDataset> {
    spec.validate().map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    let ds = generate_patient_dataset(spec, bounds);
    write_patient(&ds, dir)?;
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestPatient {
    pub patient_id: String,
    pub seed: u64,
    pub utc_offset_minutes: i32,
    pub timeline: Vec<Segment>,
    pub exams: Vec<ExamRecord>,
    /// Days whose state differs from the initial state.
    pub change_days: Vec<Epoch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub master_seed: u64,
    pub cohort_size: usize,
    pub start_date: Epoch,
    pub days: u32,
    pub patients: Vec<ManifestPatient>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn manifest_entry(spec: &SyntheticPatientSpec) -> ManifestPatient {
    let initial = spec.timeline.first().map_or(0, |s| s.score);
    ManifestPatient {
        patient_id: spec.patient_id.clone(),
        seed: spec.seed,
        utc_offset_minutes: spec.utc_offset_minutes,
        timeline: spec.timeline.clone(),
        exams: spec.exam_days().into_iter().map(|date| ExamRecord { date, score: spec.score_on(date) }).collect(),
        change_days: (0..spec.days)
            .map(|d| spec.start_date.offset(d as i32))
            .filter(|&day| spec.score_on(day) != initial)
            .collect(),
    }
}

/// Patient specs of a cohort; patient seeds are consecutive outputs of the
/// master stream.
pub fn cohort_specs(n: usize, template: &CohortTemplate, master_seed: u64) -> Vec<SyntheticPatientSpec> {
    let mut master = SplitMix64::new(master_seed);
    (0..n).map(|i| template.patient_spec(i, master.next_u64())).collect()
}

pub fn cohort_manifest(specs: &[SyntheticPatientSpec], template: &CohortTemplate, master_seed: u64) -> CohortManifest {
    CohortManifest {
        master_seed,
        cohort_size: specs.len(),
        start_date: template.start_date,
        days: template.days,
        patients: specs.iter().map(manifest_entry).collect(),
    }
}

/// Writes `n` patient directories under `out` plus `manifest.json`.
pub fn generate_cohort(
    n: usize,
    template: &CohortTemplate,
    master_seed: u64,
    bounds: &IntervalBounds,
    out: &Path,
) -> io::Result<CohortManifest> {
    let specs = cohort_specs(n, template, master_seed);
    for spec in &specs {
        generate_patient(spec, bounds, &out.join(&spec.patient_id))?;
    }
    let manifest = cohort_manifest(&specs, template, master_seed);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}
