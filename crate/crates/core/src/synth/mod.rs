//! Deterministic synthetic cohorts in the ingest file format.

mod generate;
mod rng;
mod template;

pub use generate::{
    cohort_manifest, cohort_specs, generate_cohort, generate_patient, generate_patient_dataset, CohortManifest,
    ManifestPatient, MANIFEST_FILE,
};
pub use rng::{SplitMix64, GOLDEN_GAMMA};
pub use template::{
    ActivityModel, CallModel, CohortTemplate, GenerativeModel, MobilityModel, Segment, SegmentStart,
    SyntheticPatientSpec, VoiceColumn,
};
