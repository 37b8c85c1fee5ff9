use crate::error::{Error, Result};
use crate::trace::{Metric, RunTrace};

/// Least-squares fit of `log10(error) = intercept + slope * log10(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub n_points: usize,
}

const MIN_POINTS: usize = 5;

/// `(n_max / 10^decades, n_max)` for the last checkpoint of `trace`.
pub fn default_window(trace: &RunTrace, decades: f64) -> (f64, f64) {
    let n_max = trace.checkpoints.last().map_or(0.0, |c| c.n_samples as f64);
    (n_max / 10f64.powf(decades), n_max)
}

/// Fits the decay rate of `metric` against the sample count over the
/// checkpoints with `n_lo <= n_samples <= n_hi` and a positive finite
/// value. Average over repeats before fitting (see [`RunTrace::mean`]).
pub fn fit_rate(trace: &RunTrace, metric: Metric, window: (f64, f64)) -> Result<RateFit> {
    let (n_lo, n_hi) = window;
    let pts: Vec<(f64, f64)> = trace
        .checkpoints
        .iter()
        .filter(|c| (c.n_samples as f64) >= n_lo * (1.0 - 1e-12) && (c.n_samples as f64) <= n_hi)
        .map(|c| (c.n_samples as f64, c.get(metric)))
        .filter(|&(_, e)| e > 0.0 && e.is_finite())
        .map(|(n, e)| (n.log10(), e.log10()))
        .collect();
    let k = pts.len();
    if k < MIN_POINTS {
        return Err(Error::InsufficientData { needed: MIN_POINTS, got: k });
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("slope window has a single sample count".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (rss / (kf - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, stderr, intercept, n_points: k })
}
