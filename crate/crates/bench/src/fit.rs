//! Least-squares lines through measured iteration counts.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `1` when the data have no spread.
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. `None` with fewer than
/// two points or when all `x` coincide.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fits `iterations ∝ ε^{−s}` on a log-log scale; the slope is `s`.
pub fn epsilon_exponent(eps: &[f64], iterations: &[f64]) -> Option<LineFit> {
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = iterations.iter().map(|k| k.ln()).collect();
    fit_line(&xs, &ys)
}

/// Fits `iterations ≈ c·ln(1/ε) + d`.
pub fn log_accuracy_fit(eps: &[f64], iterations: &[f64]) -> Option<LineFit> {
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    fit_line(&xs, iterations)
}
