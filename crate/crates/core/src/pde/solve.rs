//! Particle solves on the `(ε, N)` schedule and grid reference solutions.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate_fixed, step_times, Scheme, StepOptions};
use crate::partition::{PartitionField, TagRule, TaggedPartition};

use super::dsl::{Domain, PdeSpec};
use super::mollifier::Mollifier;
use super::sigma::SigmaMatrices;
use super::spectral::{self, FineSolution};

/// `ε_N = (C / ln N)^{1/(p+2)}`, clamped to `1/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eps: f64,
    /// Formula value before clamping.
    pub raw: f64,
    pub clamped: bool,
}

pub fn scaling_schedule(n: usize, c: f64, p: usize) -> Result<Schedule> {
    if n < 3 {
        return invalid(format!("schedule needs N ≥ 3, got {n}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("schedule constant must be positive, got {c}"));
    }
    let raw = (c / (n as f64).ln()).powf(1.0 / (p as f64 + 2.0));
    let clamped = raw > 0.25;
    Ok(Schedule { eps: raw.min(0.25), raw, clamped })
}

/// Runs the `ε`-particle system with midpoint tags on `N` uniform cells and
/// `ξ_i(0) = y0(x_i)`; RK4 with step `dt`.
#[allow(clippy::too_many_arguments)]
pub fn particle_pde_solve(
    spec: &PdeSpec,
    m: &Mollifier,
    eps: f64,
    n: usize,
    y0: &dyn Fn(f64) -> f64,
    t_end: f64,
    dt: f64,
) -> Result<PartitionField> {
    particle_pde_solve_with(spec, m, eps, n, y0, t_end, dt, StepOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn particle_pde_solve_with(
    spec: &PdeSpec,
    m: &Mollifier,
    eps: f64,
    n: usize,
    y0: &dyn Fn(f64) -> f64,
    t_end: f64,
    dt: f64,
    opts: StepOptions,
) -> Result<PartitionField> {
    let p = TaggedPartition::uniform(n, TagRule::Midpoint, spec.domain().metric())?;
    let mats = SigmaMatrices::new(spec, m, eps, p.tags())?;
    let init: Vec<f64> = p.tags().iter().map(|&x| y0(x)).collect();
    let opts = StepOptions { record_stride: usize::MAX, ..opts };
    let (_, states) = integrate_fixed(
        |t, y, out| {
            mats.rhs(t, y, out);
            Ok(())
        },
        &init,
        t_end,
        dt,
        opts,
    )?;
    let last = states.into_iter().last().unwrap_or(init);
    PartitionField::from_states(p, 1, last)
}

/// Largest stable RK4 step with a safety margin, from a Gershgorin bound at
/// `t = 0`.
pub fn stable_dt(spec: &PdeSpec, m: &Mollifier, eps: f64, n: usize, y0: &dyn Fn(f64) -> f64) -> Result<f64> {
    let p = TaggedPartition::uniform(n, TagRule::Midpoint, spec.domain().metric())?;
    let mats = SigmaMatrices::new(spec, m, eps, p.tags())?;
    let init: Vec<f64> = p.tags().iter().map(|&x| y0(x)).collect();
    let rho = mats.gershgorin(0.0, &init);
    Ok(if rho > 0.0 { 2.0 / rho } else { f64::INFINITY })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Grid points on the torus.
    pub m: usize,
    /// Time step for variable-coefficient solves; chosen automatically if `None`.
    pub dt: Option<f64>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { m: 4096, dt: None }
    }
}

/// Reference solution of a linear spec on the torus.
///
/// Constant coefficients use the exact Fourier multiplier; variable
/// coefficients use spectral RK4 for `p ≤ 1` and Crank–Nicolson with central
/// differences for `p = 2`.
pub fn reference_pde_solve(
    spec: &PdeSpec,
    y0: &dyn Fn(f64) -> f64,
    t_end: f64,
    opts: ReferenceOptions,
) -> Result<FineSolution> {
    if spec.domain() != Domain::Torus {
        return Err(Error::Unsupported("reference solves are implemented on the torus only".into()));
    }
    if !spec.is_linear() {
        return Err(Error::Unsupported("no reference for a quasilinear spec; compare against an analytic case".into()));
    }
    if opts.m < 8 {
        return Err(Error::ReferenceTooSmall(format!("grid of {} points", opts.m)));
    }
    let m = opts.m;
    let grid: Vec<f64> = (0..m).map(|k| k as f64 / m as f64).collect();
    let init: Vec<f64> = grid.iter().map(|&x| y0(x)).collect();
    if spec.is_constant() {
        let coeffs: Vec<f64> = (0..=spec.order()).map(|l| spec.coeff_at(l, 0.0, 0.0, 0.0)).collect();
        let mut c = spectral::forward(&init);
        for (k, ck) in c.iter_mut().enumerate() {
            let mut lam = Complex64::new(0.0, 0.0);
            for (l, &a) in coeffs.iter().enumerate() {
                lam += a * spectral::symbol(k, m, l);
            }
            *ck *= (lam * t_end).exp();
        }
        return Ok(FineSolution::new(spectral::inverse(c), t_end));
    }
    match spec.order() {
        0 | 1 => spectral_rk4(spec, &grid, init, t_end, opts.dt),
        2 => crank_nicolson(spec, &grid, init, t_end, opts.dt.unwrap_or(1e-4)),
        p => Err(Error::Unsupported(format!("variable-coefficient reference for order {p}"))),
    }
}

fn coeff_bound(spec: &PdeSpec, l: usize, grid: &[f64], t_end: f64) -> f64 {
    [0.0, 0.5 * t_end, t_end]
        .iter()
        .flat_map(|&t| grid.iter().map(move |&x| spec.coeff_at(l, t, x, 0.0).abs()))
        .fold(0.0, f64::max)
}

fn spectral_rk4(spec: &PdeSpec, grid: &[f64], init: Vec<f64>, t_end: f64, dt: Option<f64>) -> Result<FineSolution> {
    let m = grid.len();
    let a0 = coeff_bound(spec, 0, grid, t_end);
    let a1 = if spec.order() >= 1 { coeff_bound(spec, 1, grid, t_end) } else { 0.0 };
    let auto = 1.0 / (1.2 * (a1 * PI * m as f64 + a0)).max(1.0);
    let dt = dt.unwrap_or(auto).min(auto).min(1e-3);
    let p = spec.order();
    let (_, states) = integrate_fixed(
        |t, y, out| {
            out.fill(0.0);
            for l in 0..=p {
                if spec.coeff(l).is_zero() {
                    continue;
                }
                let d = spectral::derivative(y, l);
                for ((o, dk), &x) in out.iter_mut().zip(d).zip(grid) {
                    *o += spec.coeff_at(l, t, x, 0.0) * dk;
                }
            }
            Ok(())
        },
        &init,
        t_end,
        dt,
        StepOptions { scheme: Scheme::Rk4, record_stride: usize::MAX, ..StepOptions::default() },
    )?;
    Ok(FineSolution::new(states.into_iter().last().unwrap_or(init), t_end))
}

/// Tridiagonal periodic operator rows `(lower, diag, upper)` of `L(t)`.
fn fd_rows(spec: &PdeSpec, grid: &[f64], t: f64) -> Vec<(f64, f64, f64)> {
    let h = 1.0 / grid.len() as f64;
    grid.iter()
        .map(|&x| {
            let a0 = spec.coeff_at(0, t, x, 0.0);
            let a1 = spec.coeff_at(1, t, x, 0.0);
            let a2 = spec.coeff_at(2, t, x, 0.0);
            let lo = a2 / (h * h) - a1 / (2.0 * h);
            let up = a2 / (h * h) + a1 / (2.0 * h);
            (lo, a0 - 2.0 * a2 / (h * h), up)
        })
        .collect()
}

/// Solves the cyclic tridiagonal system `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i`
/// by Sherman–Morrison.
fn cyclic_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = thomas(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = thomas(a, &bb, c, &u);
    let factor = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

fn crank_nicolson(spec: &PdeSpec, grid: &[f64], init: Vec<f64>, t_end: f64, dt: f64) -> Result<FineSolution> {
    let n = grid.len();
    let times = step_times(t_end, dt)?;
    let mut y = init;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        let rows = fd_rows(spec, grid, 0.5 * (t0 + t1));
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let (lo, di, up) = rows[i];
                y[i] + 0.5 * h * (lo * y[(i + n - 1) % n] + di * y[i] + up * y[(i + 1) % n])
            })
            .collect();
        let a: Vec<f64> = rows.iter().map(|r| -0.5 * h * r.0).collect();
        let b: Vec<f64> = rows.iter().map(|r| 1.0 - 0.5 * h * r.1).collect();
        let c: Vec<f64> = rows.iter().map(|r| -0.5 * h * r.2).collect();
        y = cyclic_tridiagonal(&a, &b, &c, &rhs);
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t: t1, value: *v, threshold: f64::MAX });
        }
    }
    Ok(FineSolution::new(y, t_end))
}

/// `L²` error against the reference with cell-uniform weights:
/// `(absolute, relative)`.
pub fn l2_error(field: &PartitionField, reference: &FineSolution) -> (f64, f64) {
    let p = field.partition();
    let n = p.len() as f64;
    let mut err = 0.0;
    let mut norm = 0.0;
    for (i, &x) in p.tags().iter().enumerate() {
        let r = reference.eval(x);
        err += (field.value(i)[0] - r).powi(2);
        norm += r * r;
    }
    let err = (err / n).sqrt();
    let norm = (norm / n).sqrt();
    (err, if norm > 0.0 { err / norm } else { f64::INFINITY })
}

/// One row of a schedule sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRow {
    pub n: usize,
    pub eps: f64,
    pub clamped: bool,
    pub dt: f64,
    pub error: f64,
    pub relative_error: f64,
}

/// How `ε` is chosen for each `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsPolicy {
    Fixed(f64),
    /// `ε_N = (C / ln N)^{1/(p+2)}`.
    Schedule(f64),
}

impl EpsPolicy {
    pub fn eps(self, n: usize, p: usize) -> Result<Schedule> {
        match self {
            EpsPolicy::Fixed(e) => Ok(Schedule { eps: e, raw: e, clamped: false }),
            EpsPolicy::Schedule(c) => scaling_schedule(n, c, p),
        }
    }
}

impl std::fmt::Display for EpsPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpsPolicy::Fixed(e) => write!(f, "fixed({e})"),
            EpsPolicy::Schedule(c) => write!(f, "schedule(C={c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleTable {
    pub spec: String,
    pub policy: EpsPolicy,
    pub rows: Vec<ScheduleRow>,
}

impl ScheduleTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn final_relative_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.relative_error)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["N", "eps", "clamped", "dt", "l2_error", "relative_error"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.eps.to_string(),
                r.clamped.to_string(),
                r.dt.to_string(),
                r.error.to_string(),
                r.relative_error.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sweeps `N` along `ε_N = (C / ln N)^{1/(p+2)}`.
pub fn schedule_experiment(
    spec: &PdeSpec,
    c: f64,
    n_list: &[usize],
    y0: &(dyn Fn(f64) -> f64 + Sync),
    t_end: f64,
    dt_max: f64,
) -> Result<ScheduleTable> {
    pde_sweep(spec, EpsPolicy::Schedule(c), n_list, y0, t_end, dt_max)
}

/// Compares one particle solve per `N` with a single reference solution.
///
/// The step is `min(dt_max, stable_dt)`, so stiff small-`ε` runs stay stable.
pub fn pde_sweep(
    spec: &PdeSpec,
    policy: EpsPolicy,
    n_list: &[usize],
    y0: &(dyn Fn(f64) -> f64 + Sync),
    t_end: f64,
    dt_max: f64,
) -> Result<ScheduleTable> {
    let reference = reference_pde_solve(spec, y0, t_end, ReferenceOptions::default())?;
    let m = Mollifier::for_order(spec.order())?;
    let mut rows = Vec::new();
    for &n in n_list {
        let s = policy.eps(n, spec.order())?;
        let dt = dt_max.min(stable_dt(spec, &m, s.eps, n, y0)?);
        let field = particle_pde_solve(spec, &m, s.eps, n, y0, t_end, dt)?;
        let (error, relative_error) = l2_error(&field, &reference);
        rows.push(ScheduleRow { n, eps: s.eps, clamped: s.clamped, dt, error, relative_error });
    }
    Ok(ScheduleTable { spec: spec.to_string(), policy, rows })
}
