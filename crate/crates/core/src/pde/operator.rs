//! `A_ε f = η_ε ⋆ A(η_ε ⋆ f)` on a periodic grid, plus the exact `A f`.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::dsl::{Domain, PdeSpec};
use super::mollifier::Mollifier;
use super::sigma::validate;
use super::spectral;

/// Grid nodes required per `ε`.
pub const MIN_NODES_PER_EPS: f64 = 16.0;

fn check_linear_torus(spec: &PdeSpec) -> Result<()> {
    if spec.domain() != Domain::Torus {
        return Err(Error::Unsupported("grid operators are implemented on the torus only".into()));
    }
    if !spec.is_linear() {
        return Err(Error::Unsupported("grid operators need a linear spec (coefficients free of y)".into()));
    }
    Ok(())
}

/// `(1/M) Σ_j h(x_k − x_j) f_j` for `h` supported in `[−r/M, r/M]`.
fn circular(taps: &[f64], r: usize, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let inv = 1.0 / m as f64;
    let mut out = vec![0.0; m];
    out.par_iter_mut().enumerate().for_each(|(k, o)| {
        let mut acc = 0.0;
        for (d, &h) in taps.iter().enumerate() {
            // offset k − j = d − r
            let j = (k + m * (r / m + 1) + r - d) % m;
            acc += h * f[j];
        }
        *o = acc * inv;
    });
    out
}

/// `A_ε f` at time `t` for periodic grid data on `x_k = k/M`.
pub fn apply_a_eps(spec: &PdeSpec, m: &Mollifier, eps: f64, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    validate(spec, m, eps)?;
    check_linear_torus(spec)?;
    let n = f.len();
    if (n as f64) * eps < MIN_NODES_PER_EPS {
        return Err(Error::Resolution(format!(
            "{n} grid nodes give {:.1} nodes per ε = {eps}; need at least {MIN_NODES_PER_EPS}",
            n as f64 * eps
        )));
    }
    let r = (eps * n as f64).ceil() as usize;
    let offsets: Vec<f64> = (0..=2 * r).map(|d| (d as f64 - r as f64) / n as f64).collect();
    let grid: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    // sampled η_ε rescaled to unit discrete mass; derivative stencils shifted
    // by a multiple of it to sum to zero, so constants stay exact
    let eta: Vec<f64> = offsets.iter().map(|&u| m.scaled(eps, u)).collect();
    let mass = eta.iter().sum::<f64>() / n as f64;
    let eta: Vec<f64> = eta.iter().map(|v| v / mass).collect();
    let mut inner = vec![0.0; n];
    for l in 0..=spec.order() {
        if spec.coeff(l).is_zero() {
            continue;
        }
        let taps: Vec<f64> = if l == 0 {
            eta.clone()
        } else {
            let raw: Vec<f64> = offsets.iter().map(|&u| m.scaled_derivative(l, eps, u)).collect();
            let s = raw.iter().sum::<f64>() / n as f64;
            raw.iter().zip(&eta).map(|(d, e)| d - s * e).collect()
        };
        let h = circular(&taps, r, f);
        for ((acc, hk), &x) in inner.iter_mut().zip(h).zip(&grid) {
            *acc += spec.coeff_at(l, t, x, 0.0) * hk;
        }
    }
    Ok(circular(&eta, r, &inner))
}

/// `A f` at time `t` with spectral derivatives.
pub fn apply_a(spec: &PdeSpec, t: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_linear_torus(spec)?;
    let n = f.len();
    let mut out = vec![0.0; n];
    for l in 0..=spec.order() {
        if spec.coeff(l).is_zero() {
            continue;
        }
        let d = spectral::derivative(f, l);
        for (k, (o, dk)) in out.iter_mut().zip(d).enumerate() {
            *o += spec.coeff_at(l, t, k as f64 / n as f64, 0.0) * dk;
        }
    }
    Ok(out)
}

/// `⟨f, g⟩ = (1/M) Σ f_k g_k`.
pub fn grid_inner(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / f.len() as f64
}
