//! Log-log least-squares exponent estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Two-sided 95% interval for the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

/// Slope of `log cost` against `log n`. Needs at least four distinct `n`
/// and positive values.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit, CliError> {
    let mut ns: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 4 {
        return Err(CliError::Degenerate(format!("need at least 4 distinct n values, got {}", ns.len())));
    }
    if samples.iter().any(|&(n, c)| !(n > 0.0 && c > 0.0 && n.is_finite() && c.is_finite())) {
        return Err(CliError::Degenerate("n and cost must be positive and finite".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = k - 2.0;
    let stderr = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| CliError::Degenerate(e.to_string()))?.inverse_cdf(0.975);
    Ok(ExponentFit { slope, intercept, stderr, ci_low: slope - t * stderr, ci_high: slope + t * stderr, points: samples.len() })
}
