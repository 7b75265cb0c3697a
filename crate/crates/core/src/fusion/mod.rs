//! Decision-level fusion of per-modality change decisions.

mod eval;
mod strategy;

pub use eval::{evaluate_fusion, fusion_report, FusionEvalReport, FusionRow, FusionSummaryRow, PatientFusionEval};
pub use strategy::{calibrate_weights, fuse, FusedDecision, FusionStrategy, FusionVariant, MIN_WEIGHT};
