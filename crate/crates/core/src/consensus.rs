//! Consensus diagnostics for the opinion kernel on cloud states.
//!
//! With `K` particles per site, deviations from the site mean obey
//! `δ̇ = −S_i δ`, so the temperature decays like `e^{−2 S_i t}` and the `k`-th
//! central moment like `e^{−k S_i t}`. The experiment measures both and
//! reports which of the candidate rates `k·S_i` and `S_i` the data follow.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::kernels::opinion_kernel;
use crate::measures::{moments, site_rate, ConditionalFamily};
use crate::ode::Scheme;
use crate::partition::{Metric, TagRule, TaggedPartition};
use crate::particles::{cloud_state, integrate};
use crate::rng::substream;

pub type SigmaFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusConfig {
    /// Sites.
    pub n: usize,
    /// Particles per site.
    pub k: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Highest central moment whose rate is measured (≥ 3).
    pub k_max: usize,
    pub seed: u64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self { n: 8, k: 16, t_end: 1.0, dt: 1e-3, k_max: 4, seed: 0 }
    }
}

/// Measured decay rate of one central moment at one site.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRate {
    pub order: usize,
    pub site: usize,
    pub measured: f64,
    /// `k·S_i`.
    pub scaled: f64,
    /// `S_i`.
    pub unscaled: f64,
}

impl MomentRate {
    pub fn matches_scaled(&self) -> bool {
        (self.measured - self.scaled).abs() < (self.measured - self.unscaled).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    pub site_rate: Vec<f64>,
    /// `T_i(t)/T_i(0)`.
    pub temperature_ratio: Vec<f64>,
    /// `e^{−2 S_i t}`.
    pub predicted_ratio: Vec<f64>,
    pub rates: Vec<MomentRate>,
}

impl ConsensusReport {
    pub fn temperature_errors(&self) -> Vec<f64> {
        self.temperature_ratio.iter().zip(&self.predicted_ratio).map(|(m, p)| (m - p).abs() / p).collect()
    }

    pub fn max_temperature_error(&self) -> f64 {
        self.temperature_errors().into_iter().fold(0.0, f64::max)
    }

    /// `"k*S"` or `"S"` for moment order `k`, by majority over sites.
    pub fn winner(&self, order: usize) -> Option<&'static str> {
        let rows: Vec<_> = self.rates.iter().filter(|r| r.order == order).collect();
        if rows.is_empty() {
            return None;
        }
        let scaled = rows.iter().filter(|r| r.matches_scaled()).count();
        Some(if 2 * scaled >= rows.len() { "k*S" } else { "S" })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "site,order,S,measured_rate,k_times_S,T_ratio,T_predicted")?;
        for (i, s) in self.site_rate.iter().enumerate() {
            writeln!(w, "{i},2,{s},{},{},{},{}", 2.0 * s, 2.0 * s, self.temperature_ratio[i], self.predicted_ratio[i])?;
        }
        for r in &self.rates {
            writeln!(w, "{},{},{},{},{},,", r.site, r.order, r.unscaled, r.measured, r.scaled)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the cloud system with midpoint tags and `K` uniform samples in
/// `[0, 1]` per site.
pub fn consensus_experiment(sigma: SigmaFn, cfg: &ConsensusConfig) -> Result<ConsensusReport> {
    if cfg.k_max < 3 {
        return invalid("k_max must be at least 3");
    }
    if cfg.k < 2 {
        return invalid("need at least two particles per site");
    }
    let p = TaggedPartition::uniform(cfg.n, TagRule::Midpoint, Metric::Interval)?;
    let samples: Vec<Vec<Vec<f64>>> = (0..cfg.n)
        .map(|i| {
            let mut rng = substream(cfg.seed, i as u64);
            (0..cfg.k).map(|_| vec![rng.random::<f64>()]).collect()
        })
        .collect();
    let s0 = cloud_state(&p, 1, &samples)?;
    let sig = Arc::clone(&sigma);
    let rates = site_rate(move |x, xp| sig(x, xp), &p)?;
    let sig = Arc::clone(&sigma);
    let kernel = opinion_kernel(move |x, xp| sig(x, xp), 1, Metric::Interval);
    let traj = integrate(&kernel, &s0, cfg.t_end, cfg.dt, Scheme::Rk4)?;
    let m0 = moments(&ConditionalFamily::from_state(&s0)?, cfg.k_max)?;
    let m1 = moments(&ConditionalFamily::from_state(&traj.final_state())?, cfg.k_max)?;
    let t = cfg.t_end;
    let temperature_ratio: Vec<f64> = m0.temperature.iter().zip(&m1.temperature).map(|(a, b)| b / a).collect();
    let predicted_ratio: Vec<f64> = rates.iter().map(|s| (-2.0 * s * t).exp()).collect();
    let mut out = Vec::new();
    for order in 3..=cfg.k_max {
        for (i, s) in rates.iter().enumerate() {
            let (a, b) = (m0.central[i][order - 1], m1.central[i][order - 1]);
            let measured = -(b / a).abs().ln() / t;
            out.push(MomentRate { order, site: i, measured, scaled: order as f64 * s, unscaled: *s });
        }
    }
    Ok(ConsensusReport { site_rate: rates, temperature_ratio, predicted_ratio, rates: out })
}
