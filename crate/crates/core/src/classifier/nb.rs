//! Gaussian naive Bayes over rows with missing cells.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNbModel<T> {
    /// Sorted ascending.
    pub labels: Vec<i32>,
    pub priors: Vec<T>,
    pub log_priors: Vec<T>,
    /// `means[class][dim]`.
    pub means: Vec<Vec<T>>,
    /// `variances[class][dim]`, never below `variance_floor`.
    pub variances: Vec<Vec<T>>,
    pub variance_floor: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub label: i32,
    /// `(label, posterior)` in label order; sums to one.
    pub posteriors: Vec<(i32, T)>,
}

fn moments<T: Scalar>(vals: &[T]) -> Option<(T, T)> {
    if vals.is_empty() {
        return None;
    }
    let n = T::from_count(vals.len());
    let mean = vals.iter().fold(T::zero(), |a, &v| a + v) / n;
    let var = vals.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
    Some((mean, var))
}

/// Fits per-class means and population variances. Missing cells are left out
/// of the statistics of their dimension; a class without any value in a
/// dimension inherits the global moments of that dimension.
pub fn fit_nb<T: Scalar>(x: &[Vec<Option<T>>], y: &[i32], floor_ratio: T) -> Result<GaussianNbModel<T>> {
    if x.is_empty() {
        return Err(Error::Empty("training matrix"));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let dim = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
    }
    let mut labels = y.to_vec();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }

    let global: Vec<Option<(T, T)>> =
        (0..dim).map(|d| moments(&x.iter().filter_map(|r| r[d]).collect::<Vec<_>>())).collect();
    let max_var = global.iter().flatten().map(|&(_, v)| v).fold(T::zero(), T::max);
    let variance_floor = if max_var > T::zero() { floor_ratio * max_var } else { floor_ratio };

    let n = T::from_count(y.len());
    let mut priors = Vec::with_capacity(labels.len());
    let mut means = Vec::with_capacity(labels.len());
    let mut variances = Vec::with_capacity(labels.len());
    for &label in &labels {
        let rows: Vec<&Vec<Option<T>>> = x.iter().zip(y).filter(|(_, &l)| l == label).map(|(r, _)| r).collect();
        priors.push(T::from_count(rows.len()) / n);
        let (mut mu, mut var) = (Vec::with_capacity(dim), Vec::with_capacity(dim));
        for d in 0..dim {
            let vals: Vec<T> = rows.iter().filter_map(|r| r[d]).collect();
            let (m, v) = moments(&vals).or(global[d]).unwrap_or((T::zero(), T::zero()));
            mu.push(m);
            var.push(v.max(variance_floor));
        }
        means.push(mu);
        variances.push(var);
    }
    let log_priors = priors.iter().map(|p| p.ln()).collect();
    Ok(GaussianNbModel { labels, priors, log_priors, means, variances, variance_floor })
}

/// Maximum a-posteriori label. Ties go to the smaller label.
pub fn predict_nb<T: Scalar>(model: &GaussianNbModel<T>, x: &[Option<T>]) -> Result<Prediction<T>> {
    let dim = model.means.first().map_or(0, Vec::len);
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    if x.iter().all(Option::is_none) {
        return Err(Error::AllMissing);
    }
    let half = T::lit(0.5);
    let ln_2pi = T::lit((2.0 * std::f64::consts::PI).ln());
    let log_post: Vec<T> = (0..model.labels.len())
        .map(|c| {
            let mut acc = model.log_priors[c];
            for (d, cell) in x.iter().enumerate() {
                if let Some(v) = *cell {
                    let var = model.variances[c][d];
                    let diff = v - model.means[c][d];
                    acc = acc - half * (ln_2pi + var.ln()) - diff * diff / (var + var);
                }
            }
            acc
        })
        .collect();
    let mut best = 0;
    for c in 1..log_post.len() {
        if log_post[c] > log_post[best] {
            best = c;
        }
    }
    let top = log_post[best];
    let weights: Vec<T> = log_post.iter().map(|&lp| (lp - top).exp()).collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    let posteriors = model.labels.iter().zip(&weights).map(|(&l, &w)| (l, w / total)).collect();
    Ok(Prediction { label: model.labels[best], posteriors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn symmetric(prior_low: f64) -> GaussianNbModel<f64> {
        let priors = vec![prior_low, 1.0 - prior_low];
        GaussianNbModel {
            labels: vec![-1, 1],
            log_priors: priors.iter().map(|p: &f64| p.ln()).collect(),
            priors,
            means: vec![vec![-1.0], vec![1.0]],
            variances: vec![vec![1.0], vec![1.0]],
            variance_floor: 1e-9,
        }
    }

    #[test]
    fn sufficient_statistics_and_floor() {
        let x = vec![vec![Some(0.0)], vec![Some(2.0)]];
        let m = fit_nb(&x, &[0, 1], 1e-9).unwrap();
        assert_eq!(m.means, vec![vec![0.0], vec![2.0]]);
        // global variance of {0, 2} is 1
        assert_eq!(m.variance_floor, 1e-9);
        assert_eq!(m.variances, vec![vec![1e-9], vec![1e-9]]);
    }

    #[test]
    fn missing_cells_only_affect_their_dimension() {
        let x = vec![
            vec![Some(1.0), None],
            vec![Some(3.0), Some(10.0)],
            vec![Some(5.0), Some(20.0)],
            vec![Some(7.0), Some(30.0)],
        ];
        let m = fit_nb(&x, &[0, 0, 1, 1], 1e-9).unwrap();
        assert_eq!(m.means[0], vec![2.0, 10.0]);
        assert_eq!(m.variances[0][0], 1.0);
        assert_eq!(m.means[1], vec![6.0, 25.0]);
    }

    #[test]
    fn priors_from_counts() {
        let y = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        let x: Vec<_> = y.iter().map(|&l| vec![Some(f64::from(l))]).collect();
        let m = fit_nb(&x, &y, 1e-9).unwrap();
        assert_eq!(m.priors, vec![0.6, 0.4]);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_nb::<f64>(&[], &[], 1e-9), Err(Error::Empty("training matrix")));
        assert_eq!(fit_nb(&[vec![Some(1.0)], vec![Some(2.0)]], &[3, 3], 1e-9), Err(Error::SingleClass));
    }

    #[test]
    fn symmetric_tie_goes_to_smaller_label() {
        let p = predict_nb(&symmetric(0.5), &[Some(0.0)]).unwrap();
        assert_eq!(p.label, -1);
        assert_eq!(p.posteriors, vec![(-1, 0.5), (1, 0.5)]);
    }

    #[test]
    fn prior_breaks_symmetry() {
        assert_eq!(predict_nb(&symmetric(0.1), &[Some(0.0)]).unwrap().label, 1);
        assert_eq!(predict_nb(&symmetric(0.9), &[Some(0.0)]).unwrap().label, -1);
    }

    #[test]
    fn hand_computed_posterior_ratio() {
        let m = GaussianNbModel {
            labels: vec![0, 2],
            priors: vec![0.5, 0.5],
            log_priors: vec![0.5_f64.ln(), 0.5_f64.ln()],
            means: vec![vec![0.0], vec![2.0]],
            variances: vec![vec![1.0], vec![1.0]],
            variance_floor: 1e-9,
        };
        let p = predict_nb(&m, &[Some(1.5)]).unwrap();
        assert_eq!(p.label, 2);
        let ratio = p.posteriors[0].1 / p.posteriors[1].1;
        assert!((ratio - (-(1.5_f64.powi(2) - 0.5_f64.powi(2)) / 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn all_missing_row_rejected() {
        assert_eq!(predict_nb(&symmetric(0.5), &[None]), Err(Error::AllMissing));
        assert!(predict_nb(&symmetric(0.5), &[Some(1.0), Some(2.0)]).is_err());
    }

    proptest! {
        #[test]
        fn posteriors_normalized_and_shift_invariant(
            rows in proptest::collection::vec((-5.0..5.0_f64, -5.0..5.0_f64, 0..3_i32), 6..40),
            probe in (-6.0..6.0_f64, -6.0..6.0_f64),
            shift in -50.0..50.0_f64,
        ) {
            let x: Vec<Vec<Option<f64>>> = rows.iter().map(|r| vec![Some(r.0), Some(r.1)]).collect();
            let y: Vec<i32> = rows.iter().map(|r| r.2).collect();
            let Ok(mut m) = fit_nb(&x, &y, 1e-9) else { return Ok(()) };
            let q = [Some(probe.0), Some(probe.1)];
            let p = predict_nb(&m, &q).unwrap();
            let total: f64 = p.posteriors.iter().map(|(_, v)| v).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for lp in &mut m.log_priors {
                *lp += shift;
            }
            prop_assert_eq!(predict_nb(&m, &q).unwrap().label, p.label);
        }
    }
}
