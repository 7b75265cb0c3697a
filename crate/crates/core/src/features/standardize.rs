//! Within-patient z-scoring with parameters fitted on a row subset.

use super::DayFeatureVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StandardizeParams {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant (or unseen) column.
    pub std: Vec<f64>,
}

impl StandardizeParams {
    /// Fits per-column mean and population std over the present cells of
    /// `fit_rows`.
    pub fn fit(rows: &[Vec<Option<f64>>], fit_rows: &[usize]) -> Result<Self> {
        if fit_rows.is_empty() {
            return Err(Error::Empty("standardization fit set"));
        }
        let width = rows.get(fit_rows[0]).map_or(0, Vec::len);
        let mut mean = vec![0.0; width];
        let mut std = vec![0.0; width];
        for col in 0..width {
            let vals: Vec<f64> = fit_rows.iter().filter_map(|&r| rows[r][col]).collect();
            if vals.is_empty() {
                continue;
            }
            let n = vals.len() as f64;
            let m = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[col] = m;
            std[col] = var.sqrt();
        }
        Ok(Self { mean, std })
    }

    /// Z-scores one row. Missing cells stay missing; zero-std columns map to 0.
    pub fn apply(&self, row: &[Option<f64>]) -> Vec<Option<f64>> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(cell, (&m, &s))| cell.map(|v| if s > 0.0 { (v - m) / s } else { 0.0 }))
            .collect()
    }
}

/// Standardizes every day vector with parameters fitted on `fit_rows` only.
pub fn standardize(
    matrix: &[DayFeatureVector],
    fit_rows: &[usize],
) -> Result<(Vec<DayFeatureVector>, StandardizeParams)> {
    let cells: Vec<Vec<Option<f64>>> = matrix.iter().map(|d| d.values.clone()).collect();
    let params = StandardizeParams::fit(&cells, fit_rows)?;
    let out = matrix.iter().map(|d| DayFeatureVector { values: params.apply(&d.values), ..d.clone() }).collect();
    Ok((out, params))
}
