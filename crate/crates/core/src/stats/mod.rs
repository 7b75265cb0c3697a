//! Correlation analysis and evaluation metrics.

mod confusion;
mod correlation;
mod study;

pub use confusion::{evaluate, ConfusionMatrix, ConfusionSummary};
pub use correlation::{pearson, CorrelationResult};
pub use study::{
    activity_pairs, cohort_correlation, correlation_study, ActivityPair, CohortStudy, CorrelationMode,
    CorrelationOutcome, PatientStudy, StudyResult,
};
