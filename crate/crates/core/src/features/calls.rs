//! Phone-call pattern features for one local day.

use std::collections::BTreeSet;

use crate::ingest::{CallDirection, CallRecord};
use crate::timeline::{interval_of, DayInterval, IntervalBounds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CallFeatures {
    pub call_count: usize,
    pub total_duration_s: Option<f64>,
    pub mean_duration_s: Option<f64>,
    pub outgoing_fraction: Option<f64>,
    pub unique_contacts: usize,
    pub night_call_count: usize,
}

/// Features of the calls of one day. Without calls every duration-derived
/// field is missing.
pub fn call_features(calls: &[CallRecord], offset_minutes: i32, bounds: &IntervalBounds) -> CallFeatures {
    let n = calls.len();
    if n == 0 {
        return CallFeatures {
            call_count: 0,
            total_duration_s: None,
            mean_duration_s: None,
            outgoing_fraction: None,
            unique_contacts: 0,
            night_call_count: 0,
        };
    }
    let total: f64 = calls.iter().map(|c| c.duration_s).sum();
    let outgoing = calls.iter().filter(|c| c.direction == CallDirection::Out).count();
    let contacts: BTreeSet<&str> = calls.iter().map(|c| c.contact.as_str()).collect();
    let night = calls.iter().filter(|c| interval_of(c.t, offset_minutes, bounds) == DayInterval::Night).count();
    CallFeatures {
        call_count: n,
        total_duration_s: Some(total),
        mean_duration_s: Some(total / n as f64),
        outgoing_fraction: Some(outgoing as f64 / n as f64),
        unique_contacts: contacts.len(),
        night_call_count: night,
    }
}
