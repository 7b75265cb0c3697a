//! Within-patient state recognition.

mod cv;
mod nb;

pub use cv::{
    cohort_cv, default_modality_sets, fold_model, within_patient_cv, CohortCvReport, FoldModel, ModalityCv,
    ModalitySet, PatientCv, FUSION_LABEL,
};
pub use nb::{fit_nb, predict_nb, GaussianNbModel, Prediction};
