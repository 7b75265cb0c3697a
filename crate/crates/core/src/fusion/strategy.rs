use std::collections::BTreeMap;

use serde::Serialize;

use crate::changedetect::ChangeDecision;
use crate::error::{Error, Result};
use crate::timeline::Epoch;

/// Weight given to a modality with precision at or below 0.51, or without
/// calibration data.
pub const MIN_WEIGHT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FusionVariant {
    And,
    Or,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionStrategy {
    pub variant: FusionVariant,
    /// Modality → weight, summing to one. Empty unless weighted.
    pub weights: BTreeMap<String, f64>,
}

impl FusionStrategy {
    pub fn and() -> Self {
        Self { variant: FusionVariant::And, weights: BTreeMap::new() }
    }

    pub fn or() -> Self {
        Self { variant: FusionVariant::Or, weights: BTreeMap::new() }
    }

    /// Normalizes `weights` to sum to one.
    pub fn weighted(weights: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((m, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidConfig(format!("weight of {m} must be finite and nonnegative, got {w}")));
        }
        let total: f64 = weights.values().sum();
        if !(total > 0.0) {
            return Err(Error::NoPositiveWeight);
        }
        let weights = weights.into_iter().map(|(m, w)| (m, w / total)).collect();
        Ok(Self { variant: FusionVariant::Weighted, weights })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusedDecision {
    pub epoch: Epoch,
    pub inputs: Vec<ChangeDecision>,
    /// AND: smallest input score. OR: largest. WEIGHTED: weighted mean.
    pub fused_score: f64,
    pub fired: bool,
}

/// Fuses the decisions of the modalities present on one day.
///
/// Weighted fusion renormalizes the weights over the present modalities; when
/// every present modality has weight zero the plain mean is used.
pub fn fuse(strategy: &FusionStrategy, inputs: &[ChangeDecision]) -> Result<FusedDecision> {
    let first = inputs.first().ok_or(Error::Empty("fusion inputs"))?;
    let scores = inputs.iter().map(|d| d.normalized_score);
    let (fused_score, fired) = match strategy.variant {
        FusionVariant::And => (scores.fold(f64::INFINITY, f64::min), inputs.iter().all(|d| d.fired)),
        FusionVariant::Or => (scores.fold(f64::NEG_INFINITY, f64::max), inputs.iter().any(|d| d.fired)),
        FusionVariant::Weighted => {
            let w: Vec<f64> =
                inputs.iter().map(|d| strategy.weights.get(&d.modality).copied().unwrap_or(0.0)).collect();
            let total: f64 = w.iter().sum();
            let score = if total > 0.0 {
                inputs.iter().zip(&w).map(|(d, w)| w / total * d.normalized_score).sum()
            } else {
                inputs.iter().map(|d| d.normalized_score).sum::<f64>() / inputs.len() as f64
            };
            (score, score >= 1.0)
        }
    };
    Ok(FusedDecision { epoch: first.epoch, inputs: inputs.to_vec(), fused_score, fired })
}

/// `wₘ ∝ max(precisionₘ − 0.5, 0.01)`; modalities without a precision get the
/// minimum.
pub fn calibrate_weights(precisions: &BTreeMap<String, Option<f64>>) -> BTreeMap<String, f64> {
    let raw: BTreeMap<String, f64> =
        precisions.iter().map(|(m, p)| (m.clone(), p.map_or(MIN_WEIGHT, |p| (p - 0.5).max(MIN_WEIGHT)))).collect();
    let total: f64 = raw.values().sum();
    raw.into_iter().map(|(m, w)| (m, w / total)).collect()
}
