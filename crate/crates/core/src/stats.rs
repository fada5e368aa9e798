//! Least-squares rate fits on log-log data.

use crate::error::{invalid, Result};

/// `log err ≈ intercept + slope · log h`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residuals of the points used, in input order.
    pub residuals: Vec<f64>,
    /// Points dropped because their error was zero or non-finite.
    pub excluded: usize,
}

/// OLS fit of `ln y` against `ln x`; points with `y <= 0` are excluded.
pub fn fit_log_log(x: &[f64], y: &[f64]) -> Result<RateFit> {
    if x.len() != y.len() {
        return invalid("x and y differ in length");
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let excluded = x.len() - pts.len();
    let (slope, intercept, r_squared, residuals) = ols(&pts)?;
    Ok(RateFit { slope, intercept, r_squared, residuals, excluded })
}

/// OLS fit of `ln y` against `x` (exponential rates).
pub fn fit_semi_log(x: &[f64], y: &[f64]) -> Result<RateFit> {
    if x.len() != y.len() {
        return invalid("x and y differ in length");
    }
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **b > 0.0 && a.is_finite() && b.is_finite()).map(|(a, b)| (*a, b.ln())).collect();
    let excluded = x.len() - pts.len();
    let (slope, intercept, r_squared, residuals) = ols(&pts)?;
    Ok(RateFit { slope, intercept, r_squared, residuals, excluded })
}

fn ols(pts: &[(f64, f64)]) -> Result<(f64, f64, f64, Vec<f64>)> {
    if pts.len() < 2 {
        return invalid("need at least two positive points for a rate fit");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("all abscissae coincide");
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - intercept - slope * p.0).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2, residuals))
}
