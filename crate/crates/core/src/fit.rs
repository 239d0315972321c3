//! Ordinary least squares on log-log data.

/// Slope and intercept of `ln y` against `ln x`. Points with a degenerate
/// abscissa spread yield slope 0 and the mean log value as intercept.
pub fn log_log_ols(points: &[(f64, f64)]) -> (f64, f64) {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    ols(&logs)
}

/// Slope and intercept of `y` against `x`.
pub fn ols(logs: &[(f64, f64)]) -> (f64, f64) {
    let n = logs.len() as f64;
    if logs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
