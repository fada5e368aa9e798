//! Randomized checks of the elementary `W1` inequalities, using the exact LP
//! as the oracle.
//!
//! Instances draw tags in `[0, 1]` and states in `[0, 1/2]^d`, so every ground
//! distance is at most `sqrt(1 + d/4) ≤ 1.23`. On such supports the lower
//! tensor bound `W1^n ≤ W1(μ1^{⊗n}, μ2^{⊗n})` follows from
//! `W1(μ1^{⊗n}, μ2^{⊗n}) ≥ √n W1` whenever `W1^{n−1} ≤ √n`; it fails for widely
//! separated Diracs, which is why the box is bounded.

use rand::Rng as _;

use crate::error::Result;
use crate::measures::{ConditionalFamily, DiscreteMeasure};
use crate::partition::Metric;
use crate::rng::{substream, Rng};

use super::{l1nu_w1, support_norm, w1};

pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub instance: usize,
    /// Checked as `lhs ≤ rhs + SLACK`, or `|lhs − rhs| ≤ SLACK` for equalities.
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaSuiteReport {
    pub instances: usize,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&LemmaCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// `(name, checks, failures)` per lemma, in first-seen order.
    pub fn summary(&self) -> Vec<(&'static str, usize, usize)> {
        let mut out: Vec<(&'static str, usize, usize)> = Vec::new();
        for c in &self.checks {
            match out.iter_mut().find(|e| e.0 == c.name) {
                Some(e) => {
                    e.1 += 1;
                    e.2 += usize::from(!c.pass);
                }
                None => out.push((c.name, 1, usize::from(!c.pass))),
            }
        }
        out
    }
}

fn le(name: &'static str, instance: usize, lhs: f64, rhs: f64) -> LemmaCheck {
    LemmaCheck { name, instance, lhs, rhs, pass: lhs <= rhs + SLACK }
}

fn eq(name: &'static str, instance: usize, lhs: f64, rhs: f64) -> LemmaCheck {
    LemmaCheck { name, instance, lhs, rhs, pass: (lhs - rhs).abs() <= SLACK }
}

fn rational_weights(rng: &mut Rng, n: usize) -> Vec<f64> {
    let raw: Vec<u32> = (0..n).map(|_| rng.random_range(1..=8)).collect();
    let total: u32 = raw.iter().sum();
    raw.iter().map(|&r| r as f64 / total as f64).collect()
}

fn random_measure(rng: &mut Rng, order: usize, dim: usize, max_atoms: usize) -> Result<DiscreteMeasure> {
    let n = rng.random_range(1..=max_atoms);
    let mut atoms = Vec::with_capacity(n * order * (1 + dim));
    for _ in 0..n * order {
        atoms.push(rng.random::<f64>());
        for _ in 0..dim {
            atoms.push(0.5 * rng.random::<f64>());
        }
    }
    DiscreteMeasure::new(order, dim, atoms, rational_weights(rng, n))
}

fn random_family(rng: &mut Rng, sites: &[f64], nu: &[f64], dim: usize) -> Result<ConditionalFamily> {
    let cond = sites
        .iter()
        .map(|_| {
            let n = rng.random_range(1..=3);
            let w = rational_weights(rng, n);
            w.into_iter().map(|wi| ((0..dim).map(|_| 0.5 * rng.random::<f64>()).collect(), wi)).collect()
        })
        .collect();
    ConditionalFamily::new(dim, sites.to_vec(), nu.to_vec(), cond)
}

/// Runs every check on `instances` random instances with at most 4 atoms and `d ≤ 2`.
pub fn lemma_suite(instances: usize, seed: u64) -> Result<LemmaSuiteReport> {
    let metric = Metric::Interval;
    let mut checks = Vec::new();
    for inst in 0..instances {
        let mut rng = substream(seed, inst as u64);
        let dim = rng.random_range(1..=2);
        let m1 = random_measure(&mut rng, 1, dim, 4)?;
        let m2 = random_measure(&mut rng, 1, dim, 4)?;
        let m3 = random_measure(&mut rng, 1, dim, 4)?;

        let w12 = w1(&m1, &m2, metric)?;
        let w21 = w1(&m2, &m1, metric)?;
        let w13 = w1(&m1, &m3, metric)?;
        let w23 = w1(&m2, &m3, metric)?;
        checks.push(eq("symmetry", inst, w12, w21));
        checks.push(le("triangle", inst, w13, w12 + w23));

        for n in [2usize, 3] {
            let t = w1(&m1.tensor_power(n)?, &m2.tensor_power(n)?, metric)?;
            let name_lo = if n == 2 { "tensor_lower_n2" } else { "tensor_lower_n3" };
            let name_hi = if n == 2 { "tensor_upper_n2" } else { "tensor_upper_n3" };
            checks.push(le(name_lo, inst, w12.powi(n as i32), t));
            checks.push(le(name_hi, inst, t, n as f64 * w12));
        }

        let p = random_measure(&mut rng, 2, dim, 4)?;
        let q = random_measure(&mut rng, 2, dim, 4)?;
        let wpq = w1(&p, &q, metric)?;
        checks.push(le("marginal_contraction", inst, w1(&p.marginal(1)?, &q.marginal(1)?, metric)?, wpq));
        checks.push(le("symmetrization_contraction", inst, w1(&p.symmetrize()?, &q.symmetrize()?, metric)?, wpq));

        let common = w1(&m1.tensor(&m3)?, &m2.tensor(&m3)?, metric)?;
        checks.push(eq("common_factor", inst, common, w12));
        checks.push(le("support_bound", inst, w12, support_norm(&m1) + support_norm(&m2)));

        let ns = rng.random_range(1..=3);
        let sites: Vec<f64> = (0..ns).map(|k| (k as f64 + rng.random::<f64>()) / ns as f64).collect();
        let nu = rational_weights(&mut rng, ns);
        let f1 = random_family(&mut rng, &sites, &nu, dim)?;
        let f2 = random_family(&mut rng, &sites, &nu, dim)?;
        let joint = w1(&f1.to_measure()?, &f2.to_measure()?, metric)?;
        checks.push(le("l1nu_domination", inst, joint, l1nu_w1(&f1, &f2)?));
    }
    Ok(LemmaSuiteReport { instances, checks })
}
