//! Tagged partitions of `Ω = [0, 1]` and piecewise-constant fields.
//!
//! Cells are half-open `[a_i, a_{i+1})`; the last cell is closed at 1 so
//! that field evaluation is total on `[0, 1]`.

use std::io::Write;

use crate::error::{invalid, Error, Result};

/// Metric on `Ω = [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Interval,
    /// `min(|x − x'|, 1 − |x − x'|)`.
    Torus,
}

impl Metric {
    pub fn dist(self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self {
            Metric::Interval => d,
            Metric::Torus => {
                let d = d.rem_euclid(1.0);
                d.min(1.0 - d)
            }
        }
    }

    /// Signed displacement `y − x`, wrapped into `(−1/2, 1/2]` on the torus.
    pub fn displacement(self, x: f64, y: f64) -> f64 {
        let d = y - x;
        match self {
            Metric::Interval => d,
            Metric::Torus => {
                let w = d - d.round();
                if w <= -0.5 {
                    w + 1.0
                } else {
                    w
                }
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Metric::Interval),
            "torus" => Ok(Metric::Torus),
            other => invalid(format!("unknown metric '{other}' (expected interval|torus)")),
        }
    }
}

/// Where each cell's tag sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagRule {
    Left,
    Midpoint,
}

impl TagRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(TagRule::Left),
            "midpoint" => Ok(TagRule::Midpoint),
            other => invalid(format!("unknown tag rule '{other}' (expected left|midpoint)")),
        }
    }
}

/// A tagged partition `(Ω_i, x_i)` of `[0, 1]` with Lebesgue cells of mass `1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPartition {
    breakpoints: Vec<f64>,
    tags: Vec<f64>,
    c_omega: f64,
    metric: Metric,
}

impl TaggedPartition {
    /// `a_i = (i−1)/N`, tags at the left end or midpoint, `C_Ω = 1`.
    pub fn uniform(n: usize, rule: TagRule, metric: Metric) -> Result<Self> {
        if n == 0 {
            return invalid("partition needs N >= 1 cells");
        }
        let nf = n as f64;
        let breakpoints = (0..=n).map(|i| i as f64 / nf).collect();
        let tags = (0..n)
            .map(|i| match rule {
                TagRule::Left => i as f64 / nf,
                TagRule::Midpoint => (i as f64 + 0.5) / nf,
            })
            .collect();
        Ok(Self { breakpoints, tags, c_omega: 1.0, metric })
    }

    /// Explicit breakpoints and tags. Every cell must have Lebesgue mass `1/N`
    /// and contain its tag; `C_Ω` is computed as `N · max diam(Ω_i)`.
    pub fn from_parts(breakpoints: Vec<f64>, tags: Vec<f64>, metric: Metric) -> Result<Self> {
        let n = tags.len();
        if n == 0 || breakpoints.len() != n + 1 {
            return Err(Error::ShapeMismatch { expected: n + 1, got: breakpoints.len() });
        }
        if breakpoints[0] != 0.0 || breakpoints[n] != 1.0 {
            return invalid("breakpoints must start at 0 and end at 1");
        }
        let mut max_diam: f64 = 0.0;
        for i in 0..n {
            let (a, b) = (breakpoints[i], breakpoints[i + 1]);
            if b <= a {
                return invalid("breakpoints must be strictly increasing");
            }
            if ((b - a) - 1.0 / n as f64).abs() > 1e-12 {
                return invalid(format!("cell {i} has mass {} instead of 1/N", b - a));
            }
            let t = tags[i];
            let inside = if i + 1 == n { t >= a && t <= b } else { t >= a && t < b };
            if !inside {
                return invalid(format!("tag {t} lies outside cell {i} [{a}, {b})"));
            }
            if i > 0 && t <= tags[i - 1] {
                return invalid("tags must be strictly increasing");
            }
            max_diam = max_diam.max(b - a);
        }
        Ok(Self { breakpoints, tags, c_omega: max_diam * n as f64, metric })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn c_omega(&self) -> f64 {
        self.c_omega
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Index of the cell containing `x` (clamped to `[0, 1]`).
    pub fn cell_of(&self, x: f64) -> usize {
        let n = self.len();
        let k = self.breakpoints.partition_point(|&a| a <= x);
        k.saturating_sub(1).min(n - 1)
    }

    /// `(1/N) Σ f(x_i)`.
    pub fn riemann_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.tags.iter().map(|&x| f(x)).sum();
        s / self.len() as f64
    }
}

/// Piecewise-constant field `y_Ξ(x) = Σ ξ_i 1_{Ω_i}(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionField {
    partition: TaggedPartition,
    dim: usize,
    values: Vec<f64>,
}

impl PartitionField {
    /// `values` is row-major `N × dim`.
    pub fn from_states(partition: TaggedPartition, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("field dimension must be positive");
        }
        let expected = partition.len() * dim;
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        Ok(Self { partition, dim, values })
    }

    /// Samples `f` at the tags.
    pub fn from_fn(partition: TaggedPartition, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(partition.len() * dim);
        for &x in partition.tags() {
            let v = f(x);
            if v.len() != dim {
                return Err(Error::ShapeMismatch { expected: dim, got: v.len() });
            }
            values.extend(v);
        }
        Self::from_states(partition, dim, values)
    }

    pub fn partition(&self) -> &TaggedPartition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn eval(&self, x: f64) -> &[f64] {
        self.value(self.partition.cell_of(x))
    }

    /// Exact `L∞` distance between two piecewise-constant fields, evaluated
    /// on the union of both breakpoint grids.
    pub fn sup_distance(&self, other: &PartitionField) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch { expected: self.dim, got: other.dim });
        }
        let mut grid: Vec<f64> = self
            .partition
            .breakpoints()
            .iter()
            .chain(other.partition.breakpoints())
            .copied()
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut sup: f64 = 0.0;
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let d = euclid_dist(self.eval(mid), other.eval(mid));
            sup = sup.max(d);
        }
        Ok(sup)
    }

    /// CSV with columns `x_i, xi_1..xi_d`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x_i".to_string()];
        header.extend((1..=self.dim).map(|k| format!("xi_{k}")));
        w.write_record(&header)?;
        for (i, &x) in self.partition.tags().iter().enumerate() {
            let mut row = vec![x.to_string()];
            row.extend(self.value(i).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_tags() {
        let p = TaggedPartition::uniform(1, TagRule::Midpoint, Metric::Interval).unwrap();
        assert_eq!(p.tags(), &[0.5]);
        let p = TaggedPartition::uniform(4, TagRule::Left, Metric::Interval).unwrap();
        assert_eq!(p.tags(), &[0.0, 0.25, 0.5, 0.75]);
        let p = TaggedPartition::uniform(4, TagRule::Midpoint, Metric::Interval).unwrap();
        assert_eq!(p.tags(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(TaggedPartition::uniform(0, TagRule::Left, Metric::Interval).is_err());
    }

    #[test]
    fn partition_invariants() {
        for n in 1..40 {
            let p = TaggedPartition::uniform(n, TagRule::Midpoint, Metric::Torus).unwrap();
            for w in p.breakpoints().windows(2) {
                assert!((w[1] - w[0] - 1.0 / n as f64).abs() < 1e-15);
                assert!(w[1] - w[0] <= p.c_omega() / n as f64 + 1e-15);
            }
            assert!(p.tags().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn field_lookup() {
        let p = TaggedPartition::uniform(2, TagRule::Midpoint, Metric::Interval).unwrap();
        let f = PartitionField::from_states(p.clone(), 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(f.eval(0.1), &[0.0]);
        assert_eq!(f.eval(0.9), &[1.0]);
        // right-closed convention: a_2 belongs to cell 2
        assert_eq!(f.eval(0.5), &[1.0]);
        assert_eq!(f.eval(1.0), &[1.0]);
        for (i, &x) in p.tags().iter().enumerate() {
            assert_eq!(f.eval(x), f.value(i));
        }
        assert!(PartitionField::from_states(p, 1, vec![0.0]).is_err());
    }

    #[test]
    fn cell_boundaries_are_exact() {
        for n in [3usize, 7, 10, 64, 100] {
            let p = TaggedPartition::uniform(n, TagRule::Left, Metric::Interval).unwrap();
            for i in 0..n {
                assert_eq!(p.cell_of(p.breakpoints()[i]), i);
            }
        }
    }

    #[test]
    fn sup_distance_cases() {
        let p2 = TaggedPartition::uniform(2, TagRule::Midpoint, Metric::Interval).unwrap();
        let p4 = TaggedPartition::uniform(4, TagRule::Midpoint, Metric::Interval).unwrap();
        let f = PartitionField::from_states(p2.clone(), 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(f.sup_distance(&f).unwrap(), 0.0);
        let g = PartitionField::from_states(p4, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.sup_distance(&g).unwrap(), 0.0);
        let zero = PartitionField::from_states(p2.clone(), 1, vec![0.0, 0.0]).unwrap();
        let one = PartitionField::from_states(p2, 1, vec![1.0, 1.0]).unwrap();
        assert_eq!(zero.sup_distance(&one).unwrap(), 1.0);
    }

    #[test]
    fn riemann_sums() {
        let p = TaggedPartition::uniform(7, TagRule::Midpoint, Metric::Interval).unwrap();
        assert_eq!(p.riemann_sum(|_| 2.5), 2.5);
        for n in 1..50 {
            let p = TaggedPartition::uniform(n, TagRule::Midpoint, Metric::Interval).unwrap();
            assert!((p.riemann_sum(|x| x) - 0.5).abs() < 1e-14);
        }
        let p = TaggedPartition::uniform(2, TagRule::Midpoint, Metric::Interval).unwrap();
        assert_eq!(p.riemann_sum(|x| x * x), 0.3125);
    }

    #[test]
    fn riemann_error_bound_for_lipschitz_integrands() {
        // |∫f − sum| ≤ (C_Ω/N)·Lip(f); f = sin(3x) has Lip 3 and ∫ = (1 − cos 3)/3.
        let exact = (1.0 - 3f64.cos()) / 3.0;
        for n in 1..=64 {
            for rule in [TagRule::Left, TagRule::Midpoint] {
                let p = TaggedPartition::uniform(n, rule, Metric::Interval).unwrap();
                let err = (p.riemann_sum(|x| (3.0 * x).sin()) - exact).abs();
                assert!(err <= p.c_omega() / n as f64 * 3.0 + 1e-14);
            }
        }
    }

    #[test]
    fn explicit_partitions() {
        let p = TaggedPartition::from_parts(vec![0.0, 0.5, 1.0], vec![0.1, 0.9], Metric::Interval).unwrap();
        assert_eq!(p.c_omega(), 1.0);
        assert!(TaggedPartition::from_parts(vec![0.0, 0.4, 1.0], vec![0.1, 0.9], Metric::Interval).is_err());
        assert!(TaggedPartition::from_parts(vec![0.0, 0.5, 1.0], vec![0.6, 0.9], Metric::Interval).is_err());
    }

    #[test]
    fn torus_metric() {
        assert!((Metric::Torus.dist(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert!((Metric::Torus.displacement(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert!((Metric::Torus.displacement(0.05, 0.95) + 0.1).abs() < 1e-15);
        assert!((Metric::Interval.dist(0.05, 0.95) - 0.9).abs() < 1e-15);
    }
}
