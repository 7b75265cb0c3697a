use crate::ingest::VoiceFeatureRow;

/// Per-column mean and population standard deviation over the day's voice
/// rows, interleaved as `[mean₀, std₀, mean₁, std₁, …]`. `None` without rows.
pub fn sound_features(rows: &[VoiceFeatureRow], width: usize) -> Option<Vec<f64>> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mut out = Vec::with_capacity(2 * width);
    for col in 0..width {
        let mean = rows.iter().map(|r| r.values[col]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.values[col] - mean).powi(2)).sum::<f64>() / n;
        out.push(mean);
        out.push(var.sqrt());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_std_per_column() {
        let rows = vec![
            VoiceFeatureRow { call_id: "a".into(), t: 0, values: vec![1.0, 10.0] },
            VoiceFeatureRow { call_id: "b".into(), t: 1, values: vec![3.0, 10.0] },
        ];
        assert_eq!(sound_features(&rows, 2), Some(vec![2.0, 1.0, 10.0, 0.0]));
        assert_eq!(sound_features(&[], 2), None);
    }
}
