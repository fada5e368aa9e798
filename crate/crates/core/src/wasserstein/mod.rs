//! Exact Wasserstein-1 distances between discrete measures.
//!
//! * [`w1_line`]: measures on `R`, via `∫ |F_1 − F_2|`.
//! * [`w1_lp`]: measures on `(Ω × R^d)^n`, via the transportation LP with
//!   ground distance `sqrt(Σ_c d_Ω(x_c, x'_c)² + ‖ξ_c − ξ'_c‖²)`.
//! * [`l1nu_w1`]: the disintegrated distance `Σ_i ν_i W1(μ_{x_i}, μ'_{x_i})`.
//!
//! For `p > 1`, `W_1 ≤ W_p` and `W_p^p ≤ diam^{p−1} W_1` on bounded supports;
//! only `p = 1` is implemented.

mod lemmas;
mod lp;

use std::io::Write;
use std::path::Path;

pub use lemmas::{lemma_suite, LemmaCheck, LemmaSuiteReport};

use crate::error::{Error, Result};
use crate::measures::{ConditionalFamily, DiscreteMeasure};
use crate::partition::{euclid_dist, Metric};

/// Largest atom count per side accepted by [`w1_lp`].
pub const LP_ATOM_CAP: usize = 512;

/// `W1` between weighted atoms `(position, weight)` on the real line.
pub fn w1_line(mu1: &[(f64, f64)], mu2: &[(f64, f64)]) -> Result<f64> {
    if mu1.is_empty() || mu2.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    for m in [mu1, mu2] {
        let total: f64 = m.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(total));
        }
    }
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(mu1.len() + mu2.len());
    events.extend(mu1.iter().map(|&(x, w)| (x, w)));
    events.extend(mu2.iter().map(|&(x, w)| (x, -w)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for k in 0..events.len() {
        diff += events[k].1;
        if k + 1 < events.len() {
            total += diff.abs() * (events[k + 1].0 - events[k].0);
        }
    }
    Ok(total)
}

/// One entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub a: usize,
    pub b: usize,
    pub mass: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.a] += e.mass;
        }
        s
    }

    pub fn col_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.b] += e.mass;
        }
        s
    }

    /// Columns `a, b, mass, distance`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "a,b,mass,distance")?;
        for e in &self.entries {
            writeln!(w, "{},{},{},{}", e.a, e.b, e.mass, e.distance)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ground distance between atom `a` of `m1` and atom `b` of `m2`.
pub fn ground_distance(m1: &DiscreteMeasure, a: usize, m2: &DiscreteMeasure, b: usize, metric: Metric) -> f64 {
    let mut sq = 0.0;
    for c in 0..m1.order() {
        let dx = metric.dist(m1.x(a, c), m2.x(b, c));
        let dxi = euclid_dist(m1.xi(a, c), m2.xi(b, c));
        sq += dx * dx + dxi * dxi;
    }
    sq.sqrt()
}

/// Exact `W1` and an optimal plan.
pub fn w1_lp(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, metric: Metric) -> Result<(f64, TransportPlan)> {
    if mu1.order() != mu2.order() {
        return Err(Error::ShapeMismatch { expected: mu1.order(), got: mu2.order() });
    }
    if mu1.dim() != mu2.dim() {
        return Err(Error::ShapeMismatch { expected: mu1.dim(), got: mu2.dim() });
    }
    if mu1.len() > LP_ATOM_CAP || mu2.len() > LP_ATOM_CAP {
        return Err(Error::TooLarge { rows: mu1.len(), cols: mu2.len(), cap: LP_ATOM_CAP });
    }
    let (n1, n2) = (mu1.len(), mu2.len());
    let mut cost = vec![0.0; n1 * n2];
    for a in 0..n1 {
        for b in 0..n2 {
            cost[a * n2 + b] = ground_distance(mu1, a, mu2, b, metric);
        }
    }
    let (ma, mb, scale) = lp::integer_masses(mu1.weights(), mu2.weights());
    let flow = lp::transport(&ma, &mb, &cost)?;
    let mut entries = Vec::new();
    let mut total = 0.0;
    for a in 0..n1 {
        for b in 0..n2 {
            let f = flow[a * n2 + b];
            if f > 0 {
                let mass = f as f64 / scale as f64;
                let distance = cost[a * n2 + b];
                total += mass * distance;
                entries.push(PlanEntry { a, b, mass, distance });
            }
        }
    }
    Ok((total, TransportPlan { entries, cost: total }))
}

/// Shorthand for the optimal value only.
pub fn w1(mu1: &DiscreteMeasure, mu2: &DiscreteMeasure, metric: Metric) -> Result<f64> {
    Ok(w1_lp(mu1, mu2, metric)?.0)
}

/// Conservative support size: `max_a Σ_c (|x_c| + ‖ξ_c‖)`.
pub fn support_norm(mu: &DiscreteMeasure) -> f64 {
    (0..mu.len())
        .map(|a| (0..mu.order()).map(|c| mu.x(a, c).abs() + euclid_dist(mu.xi(a, c), &vec![0.0; mu.dim()])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Σ_i ν_i W1(μ_{x_i}, μ'_{x_i})` for families with the same marginal `ν`.
pub fn l1nu_w1(f1: &ConditionalFamily, f2: &ConditionalFamily) -> Result<f64> {
    if !f1.same_marginal(f2) || f1.dim() != f2.dim() {
        return Err(Error::MarginalMismatch);
    }
    let mut total = 0.0;
    for i in 0..f1.len() {
        let (c1, c2) = (f1.conditional(i), f2.conditional(i));
        let w = if f1.dim() == 1 {
            let a: Vec<(f64, f64)> = c1.iter().map(|(xi, w)| (xi[0], *w)).collect();
            let b: Vec<(f64, f64)> = c2.iter().map(|(xi, w)| (xi[0], *w)).collect();
            w1_line(&a, &b)?
        } else {
            let x = f1.sites()[i];
            w1(&conditional_measure(x, f1.dim(), c1)?, &conditional_measure(x, f1.dim(), c2)?, Metric::Interval)?
        };
        total += f1.site_weights()[i] * w;
    }
    Ok(total)
}

fn conditional_measure(x: f64, dim: usize, c: &[(Vec<f64>, f64)]) -> Result<DiscreteMeasure> {
    let tags = vec![x; c.len()];
    let states: Vec<f64> = c.iter().flat_map(|p| p.0.iter().copied()).collect();
    let total: f64 = c.iter().map(|p| p.1).sum();
    DiscreteMeasure::from_pairs(dim, &tags, &states, c.iter().map(|p| p.1 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<(f64, f64)> {
        v.iter().map(|&x| (x, 1.0 / v.len() as f64)).collect()
    }

    #[test]
    fn line_examples() {
        assert_eq!(w1_line(&[(0.0, 1.0)], &[(1.0, 1.0)]).unwrap(), 1.0);
        let m = pts(&[0.1, 0.5, 0.7]);
        assert_eq!(w1_line(&m, &m).unwrap(), 0.0);
        assert!(matches!(w1_line(&[], &m), Err(Error::EmptyMeasure)));
    }

    #[test]
    fn line_lebesgue_surrogate() {
        let fine: Vec<f64> = (0..4096).map(|k| (k as f64 + 0.5) / 4096.0).collect();
        for n in [2usize, 4, 8] {
            let coarse: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
            let w = w1_line(&pts(&fine), &pts(&coarse)).unwrap();
            assert!((w - 0.25 / n as f64).abs() < 2e-4, "{n}: {w}");
        }
    }

    #[test]
    fn lp_examples() {
        let m = DiscreteMeasure::uniform_pairs(1, &[0.0, 1.0], &[0.0, 0.0]).unwrap();
        let (w, plan) = w1_lp(&m, &m, Metric::Interval).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(plan.entries.len(), 2);
        assert!(plan.entries.iter().all(|e| e.a == e.b));

        let other = DiscreteMeasure::uniform_pairs(1, &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        // couplings: identity costs 1 + 1, swap costs √2 + √2
        let brute = f64::min(0.5 * 1.0 + 0.5 * 1.0, 0.5 * 2f64.sqrt() + 0.5 * 2f64.sqrt());
        assert!((w1(&m, &other, Metric::Interval).unwrap() - brute).abs() < 1e-15);
    }

    #[test]
    fn lp_matches_line_on_collinear_atoms() {
        let a = DiscreteMeasure::from_pairs(1, &[0.0; 3], &[0.1, 0.9, 2.5], vec![0.2, 0.3, 0.5]).unwrap();
        let b = DiscreteMeasure::from_pairs(1, &[0.0; 2], &[-1.0, 1.2], vec![0.75, 0.25]).unwrap();
        let lp = w1(&a, &b, Metric::Interval).unwrap();
        let line = w1_line(&[(0.1, 0.2), (0.9, 0.3), (2.5, 0.5)], &[(-1.0, 0.75), (1.2, 0.25)]).unwrap();
        assert!((lp - line).abs() < 1e-10);
    }

    #[test]
    fn plan_is_feasible() {
        let a = DiscreteMeasure::from_pairs(1, &[0.1, 0.4, 0.9], &[0.0, 1.0, 0.3], vec![1.0 / 3.0, 1.0 / 6.0, 0.5]).unwrap();
        let b = DiscreteMeasure::from_pairs(1, &[0.2, 0.6], &[0.5, -0.2], vec![0.3, 0.7]).unwrap();
        let (w, plan) = w1_lp(&a, &b, Metric::Torus).unwrap();
        for (r, wt) in plan.row_sums(3).iter().zip(a.weights()) {
            assert!((r - wt).abs() < 1e-10);
        }
        for (c, wt) in plan.col_sums(2).iter().zip(b.weights()) {
            assert!((c - wt).abs() < 1e-10);
        }
        let c: f64 = plan.entries.iter().map(|e| e.mass * e.distance).sum();
        assert!((c - w).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let n = LP_ATOM_CAP + 1;
        let tags: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        let m = DiscreteMeasure::uniform_pairs(1, &tags, &vec![0.0; n]).unwrap();
        assert!(matches!(w1_lp(&m, &m, Metric::Interval), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn l1nu_examples() {
        let fam = |a: f64, b: f64| {
            ConditionalFamily::new(1, vec![0.25, 0.75], vec![0.5, 0.5], vec![vec![(vec![a], 1.0)], vec![(vec![b], 1.0)]]).unwrap()
        };
        assert_eq!(l1nu_w1(&fam(0.0, 0.0), &fam(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(l1nu_w1(&fam(0.0, 0.0), &fam(1.0, 3.0)).unwrap(), 2.0);
        let single = ConditionalFamily::new(1, vec![0.5], vec![1.0], vec![vec![(vec![0.0], 0.5), (vec![2.0], 0.5)]]).unwrap();
        let other = ConditionalFamily::new(1, vec![0.5], vec![1.0], vec![vec![(vec![1.0], 1.0)]]).unwrap();
        let plain = w1(&single.to_measure().unwrap(), &other.to_measure().unwrap(), Metric::Interval).unwrap();
        assert!((l1nu_w1(&single, &other).unwrap() - plain).abs() < 1e-15);
        let moved = ConditionalFamily::new(1, vec![0.6], vec![1.0], vec![vec![(vec![1.0], 1.0)]]).unwrap();
        let err = l1nu_w1(&single, &moved).unwrap_err();
        assert!(err.to_string().contains("having the same marginal ν"));
    }

    #[test]
    fn support_norm_examples() {
        let m = DiscreteMeasure::uniform_pairs(2, &[0.5, -1.0], &[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(support_norm(&m), 5.5);
    }
}
