//! Default-state change detection with Mahalanobis thresholds.

mod chi2;
mod eval;
mod model;

pub use chi2::chi2_quantile;
pub use eval::{
    change_eval_report, change_setup, evaluate_change_detection, ChangeEvalReport, ChangeSetup, DetectionCounts,
    LabeledDay, PatientChangeEval,
};
pub use model::{decide, detect, detector_label, ChangeDecision, GaussianStateModel, StateDetector, ALL_MODALITIES};
