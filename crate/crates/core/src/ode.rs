//! Fixed-step explicit integrators shared by the particle, Euler and PDE solvers.

use std::fmt;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Euler,
    #[default]
    Rk4,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => invalid(format!("unknown scheme '{other}' (expected euler or rk4)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        })
    }
}

pub const DEFAULT_BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub scheme: Scheme,
    /// Abort when any state component exceeds this in absolute value.
    pub blow_up: f64,
    /// Store every `record_stride`-th step (the final time is always stored).
    pub record_stride: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, blow_up: DEFAULT_BLOW_UP, record_stride: 1 }
    }
}

/// Step times `0 = t_0 < … < t_K = t_end` with uniform spacing `dt`, except a
/// shortened last step.
pub fn step_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("step size must be positive, got {dt}"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return invalid(format!("final time must be non-negative, got {t_end}"));
    }
    let ratio = t_end / dt;
    let rounded = ratio.round();
    let full = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) { rounded as usize } else { ratio.floor() as usize };
    let mut times: Vec<f64> = (0..=full).map(|k| k as f64 * dt).collect();
    if let Some(last) = times.last_mut() {
        if (*last - t_end).abs() <= 1e-9 * dt {
            *last = t_end;
        } else if *last < t_end {
            times.push(t_end);
        } else {
            *last = t_end;
        }
    }
    Ok(times)
}

/// Integrates `y' = f(t, y)` from `t = 0`; returns recorded `(times, states)`.
pub fn integrate_fixed<F>(f: F, y0: &[f64], t_end: f64, dt: f64, opts: StepOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let times = step_times(t_end, dt)?;
    let stride = opts.record_stride.max(1);
    let n = y0.len();
    let mut y = y0.to_vec();
    check_guard(0.0, &y, opts.blow_up)?;
    let mut rec_t = vec![0.0];
    let mut rec_y = vec![y.clone()];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for s in 1..times.len() {
        let t0 = times[s - 1];
        let h = times[s] - t0;
        match opts.scheme {
            Scheme::Euler => {
                f(t0, &y, &mut k1)?;
                for i in 0..n {
                    y[i] += h * k1[i];
                }
            }
            Scheme::Rk4 => {
                f(t0, &y, &mut k1)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                f(t0 + 0.5 * h, &tmp, &mut k2)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                f(t0 + 0.5 * h, &tmp, &mut k3)?;
                for i in 0..n {
                    tmp[i] = y[i] + h * k3[i];
                }
                f(t0 + h, &tmp, &mut k4)?;
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        check_guard(times[s], &y, opts.blow_up)?;
        if s % stride == 0 || s == times.len() - 1 {
            rec_t.push(times[s]);
            rec_y.push(y.clone());
        }
    }
    Ok((rec_t, rec_y))
}

fn check_guard(t: f64, y: &[f64], threshold: f64) -> Result<()> {
    let mut worst: f64 = 0.0;
    for &v in y {
        if !v.is_finite() {
            return Err(Error::BlowUp { t, value: f64::INFINITY, threshold });
        }
        worst = worst.max(v.abs());
    }
    if worst > threshold {
        return Err(Error::BlowUp { t, value: worst, threshold });
    }
    Ok(())
}
