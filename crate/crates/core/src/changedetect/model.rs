//! Default-state Gaussian model and per-day change decisions.

use serde::Serialize;

use super::chi2::chi2_quantile;
use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::features::{modality_label, DayFeatureVector, FeatureSchema, Modality, StandardizeParams};
use crate::linalg::{mean_and_covariance, Cholesky};
use crate::scalar::Scalar;
use crate::timeline::Epoch;

/// Label used for a detector over all four blocks.
pub const ALL_MODALITIES: &str = "all";

/// Multivariate Gaussian fitted to the days of one patient state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStateModel<T> {
    pub mean: Vec<T>,
    /// Row-major `dim × dim`, regularized.
    pub covariance: Vec<T>,
    pub dim: usize,
    /// Squared distance at which a day counts as a change.
    pub threshold_sq: T,
    pub default_label: i32,
    /// Ridge added to the covariance diagonal.
    pub epsilon: T,
    chol: Cholesky<T>,
}

impl<T: Scalar> GaussianStateModel<T> {
    /// Sample mean and covariance of `rows` plus `ε·I`, `ε = 1e-6 · trace / d`
    /// (or `1e-6` when the trace is zero).
    pub fn fit_default_state(rows: &[Vec<T>], confidence: T, default_label: i32) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
        }
        if rows.len() < dim + 2 {
            return Err(Error::TooFewRows { needed: dim + 2, got: rows.len() });
        }
        let (mean, mut covariance) = mean_and_covariance(rows);
        let trace = (0..dim).fold(T::zero(), |acc, i| acc + covariance[i * dim + i]);
        let ridge = T::lit(1e-6);
        let epsilon = if trace > T::zero() { ridge * trace / T::from_count(dim) } else { ridge };
        for i in 0..dim {
            covariance[i * dim + i] = covariance[i * dim + i] + epsilon;
        }
        Self::build(mean, covariance, confidence, default_label, epsilon)
    }

    /// Model with the given moments, without regularization.
    pub fn from_moments(mean: Vec<T>, covariance: Vec<T>, confidence: T, default_label: i32) -> Result<Self> {
        Self::build(mean, covariance, confidence, default_label, T::zero())
    }

    fn build(mean: Vec<T>, covariance: Vec<T>, confidence: T, default_label: i32, epsilon: T) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let chol = Cholesky::factor(&covariance, dim)?;
        let threshold_sq = chi2_quantile(dim, confidence)?;
        Ok(Self { mean, covariance, dim, threshold_sq, default_label, epsilon, chol })
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis_sq(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let diff: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        Ok(self.chol.inverse_quadratic_form(&diff))
    }

    pub fn mahalanobis(&self, x: &[T]) -> Result<T> {
        Ok(self.mahalanobis_sq(x)?.sqrt())
    }

    /// Distance with missing cells replaced by the model mean.
    pub fn mahalanobis_masked(&self, x: &[Option<T>]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let filled: Vec<T> = x.iter().zip(&self.mean).map(|(c, &m)| c.unwrap_or(m)).collect();
        self.mahalanobis(&filled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeDecision {
    pub epoch: Epoch,
    pub distance: f64,
    /// `distance² / threshold²`.
    pub normalized_score: f64,
    pub fired: bool,
    pub modality: String,
}

/// Decision for one (already transformed) feature row.
pub fn decide(m: &GaussianStateModel<f64>, epoch: Epoch, x: &[Option<f64>], modality: &str) -> Result<ChangeDecision> {
    let distance = m.mahalanobis_masked(x)?;
    let normalized_score = distance * distance / m.threshold_sq;
    Ok(ChangeDecision {
        epoch,
        distance,
        normalized_score,
        fired: normalized_score >= 1.0,
        modality: modality.to_string(),
    })
}

/// One decision per non-sparse day, ordered by epoch.
pub fn detect(
    m: &GaussianStateModel<f64>,
    days: &[DayFeatureVector],
    cols: &[usize],
    modality: &str,
    sparse_threshold: f64,
) -> Result<Vec<ChangeDecision>> {
    if cols.len() != m.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, got: cols.len() });
    }
    let mut out = days
        .iter()
        .filter(|d| !d.is_sparse(cols, sparse_threshold))
        .map(|d| decide(m, d.epoch, &d.select(cols), modality))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|d| d.epoch);
    Ok(out)
}

/// Name of a detector over `set`: block letters, or `all` for every block.
pub fn detector_label(set: &[Modality]) -> String {
    if Modality::ALL.iter().all(|m| set.contains(m)) {
        ALL_MODALITIES.to_string()
    } else {
        modality_label(set)
    }
}

/// Change detector for a set of feature blocks: column selection, z-scoring
/// fitted on the training days, and the Gaussian state model.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDetector {
    pub modality: String,
    pub modalities: Vec<Modality>,
    pub columns: Vec<usize>,
    pub standardize: StandardizeParams,
    pub model: GaussianStateModel<f64>,
    pub sparse_threshold: f64,
}

impl StateDetector {
    /// Fits on the non-sparse days among `train`. Missing cells are imputed
    /// with the training mean, which is zero after z-scoring.
    pub fn fit(
        days: &[DayFeatureVector],
        train: &[usize],
        schema: &FeatureSchema,
        modalities: &[Modality],
        cfg: &StudyConfig,
        default_label: i32,
    ) -> Result<Self> {
        let columns = schema.columns(modalities);
        if columns.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let cells: Vec<Vec<Option<f64>>> = train
            .iter()
            .map(|&i| &days[i])
            .filter(|d| !d.is_sparse(&columns, cfg.sparse_threshold))
            .map(|d| d.select(&columns))
            .collect();
        if cells.len() < columns.len() + 2 {
            return Err(Error::TooFewRows { needed: columns.len() + 2, got: cells.len() });
        }
        let all: Vec<usize> = (0..cells.len()).collect();
        let standardize = StandardizeParams::fit(&cells, &all)?;
        let rows: Vec<Vec<f64>> =
            cells.iter().map(|c| standardize.apply(c).into_iter().map(|v| v.unwrap_or(0.0)).collect()).collect();
        let model = GaussianStateModel::fit_default_state(&rows, cfg.chi2_confidence, default_label)?;
        Ok(Self {
            modality: detector_label(modalities),
            modalities: modalities.to_vec(),
            columns,
            standardize,
            model,
            sparse_threshold: cfg.sparse_threshold,
        })
    }

    /// `None` for a sparse day.
    pub fn decide(&self, day: &DayFeatureVector) -> Option<ChangeDecision> {
        if day.is_sparse(&self.columns, self.sparse_threshold) {
            return None;
        }
        let x = self.standardize.apply(&day.select(&self.columns));
        Some(decide(&self.model, day.epoch, &x, &self.modality).expect("detector columns match model"))
    }

    pub fn detect(&self, days: &[DayFeatureVector]) -> Vec<ChangeDecision> {
        let mut out: Vec<ChangeDecision> = days.iter().filter_map(|d| self.decide(d)).collect();
        out.sort_by_key(|d| d.epoch);
        out
    }
}
