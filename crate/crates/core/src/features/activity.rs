//! Accelerometer activity score: mean over fixed-length bins of the
//! population standard deviation of the acceleration magnitude.
//!
//! Using the magnitude makes the score independent of phone orientation, and
//! its standard deviation removes the constant gravity component.

use crate::config::ActivityParams;
use crate::ingest::AccelSample;
use crate::timeline::{interval_of, DayInterval, Epoch, IntervalBounds, MS_PER_DAY};

/// Half-open UTC time span `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start_ms: i64,
    pub end_ms: i64,
}

impl Span {
    pub fn contains(&self, t: i64) -> bool {
        (self.start_ms..self.end_ms).contains(&t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityFeatures {
    pub daily_score: Option<f64>,
    /// Indexed by [`DayInterval::index`].
    pub interval_scores: [Option<f64>; 4],
    pub valid_bin_fraction: f64,
}

/// A bin with enough samples to be scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinScore {
    pub start_ms: i64,
    pub std: f64,
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Scores of all valid bins in `span`, in time order. Samples must be sorted.
pub fn valid_bins(samples: &[AccelSample], span: Span, params: &ActivityParams) -> Vec<BinScore> {
    let bin_ms = i64::from(params.bin_seconds) * 1000;
    let mut out = Vec::new();
    let mut magnitudes: Vec<f64> = Vec::new();
    let mut current: Option<i64> = None;
    let mut flush = |bin: Option<i64>, mags: &mut Vec<f64>| {
        if let Some(b) = bin {
            if mags.len() >= params.min_samples_per_bin && !mags.is_empty() {
                out.push(BinScore { start_ms: span.start_ms + b * bin_ms, std: population_std(mags) });
            }
        }
        mags.clear();
    };
    for s in samples.iter().filter(|s| span.contains(s.t)) {
        let bin = (s.t - span.start_ms).div_euclid(bin_ms);
        if current != Some(bin) {
            flush(current, &mut magnitudes);
            current = Some(bin);
        }
        magnitudes.push(s.magnitude());
    }
    flush(current, &mut magnitudes);
    out
}

fn mean_of(bins: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = bins.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Activity score of `span`; `None` when no bin is valid.
pub fn activity_score(samples: &[AccelSample], span: Span, params: &ActivityParams) -> Option<f64> {
    mean_of(valid_bins(samples, span, params).into_iter().map(|b| b.std))
}

/// Daily and per-interval scores for one local day.
pub fn activity_features(
    samples: &[AccelSample],
    epoch: Epoch,
    offset_minutes: i32,
    bounds: &IntervalBounds,
    params: &ActivityParams,
) -> ActivityFeatures {
    let start = epoch.start_utc_ms(offset_minutes);
    let span = Span { start_ms: start, end_ms: start + MS_PER_DAY };
    let bins = valid_bins(samples, span, params);
    let total_bins = (86_400 / params.bin_seconds) as f64;
    let mut interval_scores = [None; 4];
    for interval in DayInterval::ALL {
        interval_scores[interval.index()] =
            mean_of(bins.iter().filter(|b| interval_of(b.start_ms, offset_minutes, bounds) == interval).map(|b| b.std));
    }
    ActivityFeatures {
        daily_score: mean_of(bins.iter().map(|b| b.std)),
        interval_scores,
        valid_bin_fraction: bins.len() as f64 / total_bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: ActivityParams = ActivityParams { bin_seconds: 60, min_samples_per_bin: 10 };

    fn sample(t: i64, z: f64) -> AccelSample {
        AccelSample { t, x: 0.0, y: 0.0, z }
    }

    fn minute() -> Span {
        Span { start_ms: 0, end_ms: 60_000 }
    }

    #[test]
    fn constant_gravity_scores_zero() {
        let s: Vec<_> = (0..20).map(|i| sample(i * 3000, 9.81)).collect();
        assert_eq!(activity_score(&s, minute(), &P), Some(0.0));
    }

    #[test]
    fn empty_span_is_missing() {
        assert_eq!(activity_score(&[], minute(), &P), None);
    }

    #[test]
    fn two_point_magnitudes_give_unit_std() {
        let s: Vec<_> = (0..20).map(|i| sample(i * 3000, if i % 2 == 0 { 9.0 } else { 11.0 })).collect();
        assert_eq!(activity_score(&s, minute(), &P), Some(1.0));
    }

    #[test]
    fn sparse_bins_are_invalid() {
        let s: Vec<_> = (0..9).map(|i| sample(i * 1000, 9.0 + i as f64)).collect();
        assert_eq!(activity_score(&s, minute(), &P), None);
    }

    #[test]
    fn daily_score_between_interval_scores() {
        // One scored bin per hour with interval-specific spread.
        let mut s = Vec::new();
        for hour in 0..24_i64 {
            let spread = 0.5 + (hour / 6) as f64;
            for i in 0..12 {
                let z = 9.81 + if i % 2 == 0 { spread } else { -spread };
                s.push(sample(hour * 3_600_000 + i * 5000, z));
            }
        }
        let f = activity_features(&s, Epoch(0), 0, &IntervalBounds::default(), &P);
        let scores: Vec<f64> = f.interval_scores.iter().map(|v| v.unwrap()).collect();
        let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let daily = f.daily_score.unwrap();
        assert!(lo <= daily && daily <= hi);
        assert!((f.valid_bin_fraction - 24.0 / 1440.0).abs() < 1e-15);
        assert!((f.interval_scores[DayInterval::Night.index()].unwrap() - 0.5).abs() < 1e-12);
    }

    fn rotate(s: &AccelSample, a: f64, b: f64) -> AccelSample {
        // rotation about z by a, then about x by b
        let (x1, y1) = (s.x * a.cos() - s.y * a.sin(), s.x * a.sin() + s.y * a.cos());
        let (y2, z2) = (y1 * b.cos() - s.z * b.sin(), y1 * b.sin() + s.z * b.cos());
        AccelSample { t: s.t, x: x1, y: y2, z: z2 }
    }

    proptest! {
        #[test]
        fn invariant_under_rotation_and_time_shift(
            values in proptest::collection::vec((-5.0..5.0_f64, -5.0..5.0_f64, 5.0..15.0_f64), 30..120),
            a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU,
            shift in -10_000_000_000_i64..10_000_000_000,
        ) {
            let span = Span { start_ms: 0, end_ms: 180_000 };
            let s: Vec<_> = values.iter().enumerate()
                .map(|(i, &(x, y, z))| AccelSample { t: i as i64 * 1500, x, y, z })
                .collect();
            let base = activity_score(&s, span, &P);
            let rotated: Vec<_> = s.iter().map(|v| rotate(v, a, b)).collect();
            let shifted: Vec<_> = s.iter().map(|v| AccelSample { t: v.t + shift, ..*v }).collect();
            let shifted_span = Span { start_ms: shift, end_ms: 180_000 + shift };
            match (base, activity_score(&rotated, span, &P), activity_score(&shifted, shifted_span, &P)) {
                (Some(x), Some(r), Some(t)) => {
                    prop_assert!((x - r).abs() < 1e-9);
                    prop_assert_eq!(x, t);
                }
                (None, None, None) => {}
                other => prop_assert!(false, "inconsistent {:?}", other),
            }
        }
    }
}
