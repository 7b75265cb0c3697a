use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};
use crate::special::student_t_two_tailed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub n: usize,
    /// `r·√((n−2)/(1−r²))`; `None` for `n < 3`.
    pub t_stat: Option<T>,
    /// Two-tailed Student-t p-value with `n − 2` degrees of freedom; `None` for `n < 3`.
    pub p_two_tailed: Option<T>,
}

/// Pearson product-moment correlation with its Student-t significance.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<CorrelationResult<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mx = mean(xs).unwrap_or_else(T::zero);
    let my = mean(ys).unwrap_or_else(T::zero);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::UndefinedCorrelation("xs"));
    }
    if !(syy > T::zero()) {
        return Err(Error::UndefinedCorrelation("ys"));
    }
    let r = (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one());
    let (t_stat, p_two_tailed) = if n >= 3 {
        let dof = T::from_count(n - 2);
        let denom = T::one() - r * r;
        let t = if denom > T::zero() { r * (dof / denom).sqrt() } else { r.signum() * T::infinity() };
        (Some(t), Some(student_t_two_tailed(t, dof)))
    } else {
        (None, None)
    };
    Ok(CorrelationResult { r, n, t_stat, p_two_tailed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SplitMix64;
    use proptest::prelude::*;

    #[test]
    fn perfect_linear_and_inverse() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0_f64]).unwrap().r, 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0_f64]).unwrap().r, -1.0);
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0_f64]).unwrap();
        assert_eq!(r.p_two_tailed, Some(0.0));
    }

    #[test]
    fn hand_computed_point_eight() {
        // Σdxdy = 4, Σdx² = Σdy² = 5
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0_f64]).unwrap();
        assert!((r.r - 0.8).abs() < 1e-15);
        let t = 0.8 * (2.0_f64 / 0.36).sqrt();
        assert!((r.t_stat.unwrap() - t).abs() < 1e-12);
        // dof = 2 closed form: p = 1 − t/√(2 + t²)
        assert!((r.p_two_tailed.unwrap() - (1.0 - t / (2.0 + t * t).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn error_cases() {
        assert_eq!(pearson(&[1.0, 2.0], &[1.0_f64]), Err(Error::LengthMismatch { left: 2, right: 1 }));
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0_f64]), Err(Error::UndefinedCorrelation("xs")));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0_f64]), Err(Error::UndefinedCorrelation("ys")));
        assert!(pearson(&[1.0_f64], &[1.0]).is_err());
    }

    #[test]
    fn two_points_have_no_p_value() {
        let r = pearson(&[1.0, 2.0], &[3.0, 1.0_f64]).unwrap();
        assert_eq!(r.r, -1.0);
        assert_eq!(r.p_two_tailed, None);
    }

    #[test]
    fn f32_instantiation() {
        let r = pearson(&[1.0_f32, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.r - 0.8).abs() < 1e-6);
    }

    #[test]
    fn p_value_agrees_with_permutation_oracle() {
        let mut rng = SplitMix64::new(2024);
        for &rho in &[0.0, 0.3, 0.5] {
            let n = 25;
            let xs: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            let ys: Vec<f64> = xs.iter().map(|x| rho * x + (1.0 - rho * rho).sqrt() * rng.next_normal()).collect();
            let observed = pearson(&xs, &ys).unwrap();
            let mut shuffled = ys.clone();
            let mut extreme = 0usize;
            let resamples = 10_000;
            for _ in 0..resamples {
                rng.shuffle(&mut shuffled);
                if pearson(&xs, &shuffled).unwrap().r.abs() >= observed.r.abs() {
                    extreme += 1;
                }
            }
            let perm_p = extreme as f64 / resamples as f64;
            let p = observed.p_two_tailed.unwrap();
            assert!((p - perm_p).abs() < 0.02, "rho={rho} t-test p={p} permutation p={perm_p}");
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_affine_invariant(
            pts in proptest::collection::vec((-100.0..100.0_f64, -100.0..100.0_f64), 3..40),
            a in 0.1..10.0_f64, b in -50.0..50.0_f64,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let (Ok(xy), Ok(yx)) = (pearson(&xs, &ys), pearson(&ys, &xs)) {
                prop_assert!((xy.r - yx.r).abs() < 1e-12);
                prop_assert!(xy.r.abs() <= 1.0);
                let p = xy.p_two_tailed.unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                let scaled: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
                let flipped: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
                prop_assert!((pearson(&scaled, &ys).unwrap().r - xy.r).abs() < 1e-9);
                prop_assert!((pearson(&flipped, &ys).unwrap().r + xy.r).abs() < 1e-9);
            }
        }
    }
}
