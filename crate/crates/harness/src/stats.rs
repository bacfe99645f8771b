//! Per-time summary statistics over trials.

/// Mean and population standard deviation at each time index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub trials: usize,
}

impl TrialSummary {
    /// `series[trial][t]`; all series must have the same length.
    pub fn from_series(series: &[Vec<f64>]) -> Option<TrialSummary> {
        let first = series.first()?;
        let len = first.len();
        if series.iter().any(|s| s.len() != len) {
            return None;
        }
        let mut mean = Vec::with_capacity(len);
        let mut std = Vec::with_capacity(len);
        for t in 0..len {
            let (m, s) = mean_std(series.iter().map(|s| s[t]));
            mean.push(m);
            std.push(s);
        }
        Some(TrialSummary {
            mean,
            std,
            trials: series.len(),
        })
    }
}

/// Mean and population standard deviation (divisor n), summed in input
/// order. Returns `(NaN, NaN)` for an empty input.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in values.clone() {
        sum += v;
        n += 1;
    }
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}
