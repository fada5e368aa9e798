//! Convergence-rate fits on `(N, error)` points.

use mflab_core::stats::{fit_log_log, RateFit};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 3;

/// A log-log fit together with notes about dropped points.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub fit: RateFit,
    pub notes: Vec<String>,
}

/// OLS of `ln error` on `ln N`. Zero errors are dropped with a note; fewer
/// than three usable points is an error.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateEstimate> {
    let mut notes = Vec::new();
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(n, e) in points {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Fit(format!("N must be positive, got {n}")));
        }
        if e == 0.0 {
            notes.push(format!("N={n}: zero error excluded from the fit"));
            continue;
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Fit(format!("N={n}: error must be positive and finite, got {e}")));
        }
        xs.push(n);
        ys.push(e);
    }
    if xs.len() < MIN_POINTS {
        return Err(Error::Fit(format!("need at least {MIN_POINTS} points with positive error, have {}", xs.len())));
    }
    let fit = fit_log_log(&xs, &ys)?;
    Ok(RateEstimate { fit, notes })
}
