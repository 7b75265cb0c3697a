//! Location features from one day of GPS fixes: travelled distance, radius
//! of gyration, and significant places found by stay-point clustering.

use crate::config::MobilityParams;
use crate::ingest::GpsFix;

/// Mean Earth radius, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Great-circle distance in meters.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

fn fix_distance(a: &GpsFix, b: &GpsFix) -> f64 {
    haversine_m(a.lat, a.lon, b.lat, b.lon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityFeatures {
    pub total_distance_m: f64,
    pub radius_of_gyration_m: f64,
    pub place_count: usize,
    /// Share of stay time spent at the most-visited place; `None` without places.
    pub top_place_fraction: Option<f64>,
    /// Fixes left after accuracy and speed filtering.
    pub fix_count: usize,
}

/// A dwell of at least the minimum duration within the stay radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayPoint {
    pub lat: f64,
    pub lon: f64,
    pub arrive_ms: i64,
    pub leave_ms: i64,
}

/// Drops inaccurate fixes, then fixes implying an implausible speed from
/// the previously kept fix.
pub fn filter_fixes(fixes: &[GpsFix], params: &MobilityParams) -> Vec<GpsFix> {
    let mut kept: Vec<GpsFix> = Vec::with_capacity(fixes.len());
    for f in fixes.iter().filter(|f| f.accuracy_m <= params.max_accuracy_m) {
        if let Some(prev) = kept.last() {
            let dist = fix_distance(prev, f);
            let dt_s = (f.t - prev.t) as f64 / 1000.0;
            let too_fast = if dt_s <= 0.0 { dist > 0.0 } else { dist / dt_s * 3.6 > params.max_speed_kmh };
            if too_fast {
                continue;
            }
        }
        kept.push(*f);
    }
    kept
}

/// Classic stay-point detection: from an anchor fix, extend while fixes stay
/// within the radius of the anchor; emit a stay if the dwell is long enough.
pub fn stay_points(fixes: &[GpsFix], params: &MobilityParams) -> Vec<StayPoint> {
    let min_ms = (params.stay_min_minutes * 60_000.0).round() as i64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < fixes.len() {
        let mut j = i + 1;
        while j < fixes.len() && fix_distance(&fixes[i], &fixes[j]) <= params.stay_radius_m {
            j += 1;
        }
        let last = &fixes[j - 1];
        if last.t - fixes[i].t >= min_ms {
            let n = (j - i) as f64;
            let lat = fixes[i..j].iter().map(|f| f.lat).sum::<f64>() / n;
            let lon = fixes[i..j].iter().map(|f| f.lon).sum::<f64>() / n;
            out.push(StayPoint { lat, lon, arrive_ms: fixes[i].t, leave_ms: last.t });
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

struct Place {
    lat: f64,
    lon: f64,
    members: usize,
    stay_ms: i64,
}

/// Greedy place clustering: each stay joins the first place whose centroid
/// lies within the merge distance, else opens a new place.
fn cluster_places(stays: &[StayPoint], merge_m: f64) -> Vec<Place> {
    let mut places: Vec<Place> = Vec::new();
    for s in stays {
        let dwell = s.leave_ms - s.arrive_ms;
        match places.iter_mut().find(|p| haversine_m(p.lat, p.lon, s.lat, s.lon) <= merge_m) {
            Some(p) => {
                let k = p.members as f64;
                p.lat = (p.lat * k + s.lat) / (k + 1.0);
                p.lon = (p.lon * k + s.lon) / (k + 1.0);
                p.members += 1;
                p.stay_ms += dwell;
            }
            None => places.push(Place { lat: s.lat, lon: s.lon, members: 1, stay_ms: dwell }),
        }
    }
    places
}

fn wrap_degrees(d: f64) -> f64 {
    if (-180.0..=180.0).contains(&d) {
        return d;
    }
    (d + 180.0).rem_euclid(360.0) - 180.0
}

/// RMS great-circle distance to the centroid, with the centroid taken in a
/// local equirectangular projection anchored at the first fix.
pub fn radius_of_gyration(fixes: &[GpsFix]) -> f64 {
    let Some(anchor) = fixes.first() else { return 0.0 };
    let cos_lat = anchor.lat.to_radians().cos().max(1e-12);
    let n = fixes.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for f in fixes {
        sx += wrap_degrees(f.lon - anchor.lon).to_radians() * cos_lat * EARTH_RADIUS_M;
        sy += (f.lat - anchor.lat).to_radians() * EARTH_RADIUS_M;
    }
    let c_lat = anchor.lat + (sy / n / EARTH_RADIUS_M).to_degrees();
    let c_lon = wrap_degrees(anchor.lon + (sx / n / (EARTH_RADIUS_M * cos_lat)).to_degrees());
    let msd = fixes.iter().map(|f| haversine_m(f.lat, f.lon, c_lat, c_lon).powi(2)).sum::<f64>() / n;
    msd.sqrt()
}

pub fn mobility_features(fixes: &[GpsFix], params: &MobilityParams) -> MobilityFeatures {
    let usable = filter_fixes(fixes, params);
    let (total_distance_m, radius_of_gyration_m) = if usable.len() < 2 {
        (0.0, 0.0)
    } else {
        (usable.windows(2).map(|w| fix_distance(&w[0], &w[1])).sum(), radius_of_gyration(&usable))
    };
    let places = cluster_places(&stay_points(&usable, params), params.place_merge_m);
    let total_stay: i64 = places.iter().map(|p| p.stay_ms).sum();
    let top_place_fraction =
        places.iter().map(|p| p.stay_ms).max().map(
            |top| {
                if total_stay > 0 {
                    top as f64 / total_stay as f64
                } else {
                    1.0
                }
            },
        );
    MobilityFeatures {
        total_distance_m,
        radius_of_gyration_m,
        place_count: places.len(),
        top_place_fraction,
        fix_count: usable.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: MobilityParams = MobilityParams {
        max_accuracy_m: 100.0,
        max_speed_kmh: 200.0,
        stay_radius_m: 150.0,
        stay_min_minutes: 10.0,
        place_merge_m: 300.0,
    };

    fn fix(min: i64, lat: f64, lon: f64) -> GpsFix {
        GpsFix { t: min * 60_000, lat, lon, accuracy_m: 10.0 }
    }

    /// Independent distance route: chord length between unit vectors.
    fn chord_distance(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
        let v = |lat: f64, lon: f64| {
            let (p, l) = (lat.to_radians(), lon.to_radians());
            [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
        };
        let (a, b) = (v(lat1, lon1), v(lat2, lon2));
        let c = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        2.0 * EARTH_RADIUS_M * (c / 2.0).asin()
    }

    #[test]
    fn stationary_two_hours() {
        let fixes: Vec<_> = (0..=120).map(|m| fix(m, 47.26, 11.39)).collect();
        let f = mobility_features(&fixes, &P);
        assert_eq!(f.total_distance_m, 0.0);
        assert_eq!(f.radius_of_gyration_m, 0.0);
        assert_eq!(f.place_count, 1);
        assert_eq!(f.top_place_fraction, Some(1.0));
        assert_eq!(f.fix_count, 121);
    }

    #[test]
    fn no_fixes() {
        let f = mobility_features(&[], &P);
        assert_eq!((f.total_distance_m, f.radius_of_gyration_m, f.place_count, f.fix_count), (0.0, 0.0, 0, 0));
        assert_eq!(f.top_place_fraction, None);
    }

    #[test]
    fn two_places_one_kilometre_apart() {
        let lat_a = 47.26;
        let lat_b = lat_a + (1000.0 / EARTH_RADIUS_M).to_degrees();
        let lon = 11.39;
        let mut fixes: Vec<_> = (0..30).map(|m| fix(m, lat_a, lon)).collect();
        fixes.extend((30..60).map(|m| fix(m, lat_b, lon)));
        let f = mobility_features(&fixes, &P);
        let expected = chord_distance(lat_a, lon, lat_b, lon);
        assert!((expected - 1000.0).abs() < 1e-6);
        assert!((f.total_distance_m - expected).abs() < 1.0);
        assert_eq!(f.place_count, 2);
        assert!((f.top_place_fraction.unwrap() - 0.5).abs() < 1e-12);
        assert!((f.radius_of_gyration_m - 500.0).abs() < 1.0);
    }

    #[test]
    fn filters_inaccurate_and_teleporting_fixes() {
        let mut fixes = vec![fix(0, 47.0, 11.0), fix(1, 47.0, 11.0)];
        fixes.push(GpsFix { accuracy_m: 250.0, ..fix(2, 47.0, 11.0) });
        // ~111 km in one minute
        fixes.push(fix(3, 48.0, 11.0));
        fixes.push(fix(4, 47.0, 11.0));
        let kept = filter_fixes(&fixes, &P);
        assert_eq!(kept.len(), 3);
        assert!(kept.iter().all(|f| f.lat == 47.0));
    }

    #[test]
    fn haversine_matches_chord_route() {
        let pairs = [(47.26, 11.39, 48.2, 16.37), (-33.9, 151.2, 51.5, -0.12), (0.0, 179.9, 0.0, -179.9)];
        for (a, b, c, d) in pairs {
            let h = haversine_m(a, b, c, d);
            assert!((h - chord_distance(a, b, c, d)).abs() < 1e-6 * h.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn gyration_bounded_by_max_pairwise(pts in proptest::collection::vec((-0.05..0.05_f64, -0.05..0.05_f64), 2..40)) {
            let fixes: Vec<_> = pts.iter().enumerate().map(|(i, &(a, b))| fix(i as i64 * 10, 47.0 + a, 11.0 + b)).collect();
            let f = mobility_features(&fixes, &P);
            let usable = filter_fixes(&fixes, &P);
            let mut max_pair: f64 = 0.0;
            for i in 0..usable.len() {
                for j in i + 1..usable.len() {
                    max_pair = max_pair.max(fix_distance(&usable[i], &usable[j]));
                }
            }
            prop_assert!(f.total_distance_m >= 0.0);
            prop_assert!(f.radius_of_gyration_m >= 0.0);
            prop_assert!(f.radius_of_gyration_m <= max_pair + 1e-6);
        }
    }
}
