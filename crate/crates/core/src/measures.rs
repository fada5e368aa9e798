//! Discrete measures on `(Ω × R^d)^n`, disintegration by tag, the empirical,
//! semi-empirical and monokinetic constructions, and per-site moments.
//!
//! Atoms are never merged. Two atoms belong to the same site exactly when
//! their tags are bit-identical.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernels::InteractionKernel;
use crate::partition::{PartitionField, TaggedPartition};
use crate::particles::ParticleState;

const WEIGHT_TOL: f64 = 1e-12;

/// Weighted atoms on `(Ω × R^d)^n`. Each atom is `n` components `(x, ξ)`,
/// stored flat with stride `n·(1 + d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    order: usize,
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(order: usize, dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if order == 0 || dim == 0 {
            return invalid("measure order and state dimension must be positive");
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let stride = order * (1 + dim);
        if atoms.len() != weights.len() * stride {
            return Err(Error::ShapeMismatch { expected: weights.len() * stride, got: atoms.len() });
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return invalid("atoms must be finite");
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return invalid("weights must be positive and finite");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Unnormalized(total));
        }
        Ok(Self { order, dim, atoms, weights })
    }

    /// Order-1 measure from `(x, ξ)` pairs.
    pub fn from_pairs(dim: usize, tags: &[f64], states: &[f64], weights: Vec<f64>) -> Result<Self> {
        if states.len() != tags.len() * dim {
            return Err(Error::ShapeMismatch { expected: tags.len() * dim, got: states.len() });
        }
        let mut atoms = Vec::with_capacity(tags.len() * (1 + dim));
        for (i, &x) in tags.iter().enumerate() {
            atoms.push(x);
            atoms.extend_from_slice(&states[i * dim..(i + 1) * dim]);
        }
        Self::new(1, dim, atoms, weights)
    }

    /// Equal weights on the given pairs.
    pub fn uniform_pairs(dim: usize, tags: &[f64], states: &[f64]) -> Result<Self> {
        let n = tags.len();
        Self::from_pairs(dim, tags, states, vec![1.0 / n as f64; n])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn stride(&self) -> usize {
        self.order * (1 + self.dim)
    }

    /// The full atom: `n` blocks `(x, ξ_1..ξ_d)`.
    pub fn atom(&self, a: usize) -> &[f64] {
        let s = self.stride();
        &self.atoms[a * s..(a + 1) * s]
    }

    /// Tag of component `c` of atom `a`.
    pub fn x(&self, a: usize, c: usize) -> f64 {
        self.atom(a)[c * (1 + self.dim)]
    }

    /// State of component `c` of atom `a`.
    pub fn xi(&self, a: usize, c: usize) -> &[f64] {
        let b = c * (1 + self.dim);
        &self.atom(a)[b + 1..b + 1 + self.dim]
    }

    /// `μ ⊗ ν`: components concatenated, weights multiplied (row-major in `μ`).
    pub fn tensor(&self, other: &DiscreteMeasure) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch { expected: self.dim, got: other.dim });
        }
        let mut atoms = Vec::with_capacity(self.len() * other.len() * (self.stride() + other.stride()));
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for a in 0..self.len() {
            for b in 0..other.len() {
                atoms.extend_from_slice(self.atom(a));
                atoms.extend_from_slice(other.atom(b));
                weights.push(self.weights[a] * other.weights[b]);
            }
        }
        renormalized(self.order + other.order, self.dim, atoms, weights)
    }

    /// `μ^{⊗n}`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("tensor power must be at least 1");
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Projection onto the first `n` components (atoms kept, not merged).
    pub fn marginal(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.order {
            return invalid(format!("marginal order {n} outside 1..={}", self.order));
        }
        let keep = n * (1 + self.dim);
        let mut atoms = Vec::with_capacity(self.len() * keep);
        for a in 0..self.len() {
            atoms.extend_from_slice(&self.atom(a)[..keep]);
        }
        Ok(Self { order: n, dim: self.dim, atoms, weights: self.weights.clone() })
    }

    /// Average over all permutations of the components.
    pub fn symmetrize(&self) -> Result<Self> {
        let perms = permutations(self.order);
        let block = 1 + self.dim;
        let mut atoms = Vec::with_capacity(self.atoms.len() * perms.len());
        let mut weights = Vec::with_capacity(self.len() * perms.len());
        let f = 1.0 / perms.len() as f64;
        for a in 0..self.len() {
            let atom = self.atom(a);
            for p in &perms {
                for &c in p {
                    atoms.extend_from_slice(&atom[c * block..(c + 1) * block]);
                }
                weights.push(self.weights[a] * f);
            }
        }
        renormalized(self.order, self.dim, atoms, weights)
    }

    /// Group order-1 atoms by bit-identical tag, in order of first appearance.
    pub fn disintegrate(&self) -> Result<ConditionalFamily> {
        if self.order != 1 {
            return invalid("disintegration needs an order-1 measure");
        }
        let mut sites: Vec<f64> = Vec::new();
        let mut groups: Vec<Vec<(Vec<f64>, f64)>> = Vec::new();
        for a in 0..self.len() {
            let x = self.x(a, 0);
            let idx = match sites.iter().position(|s| s.to_bits() == x.to_bits()) {
                Some(i) => i,
                None => {
                    sites.push(x);
                    groups.push(Vec::new());
                    sites.len() - 1
                }
            };
            groups[idx].push((self.xi(a, 0).to_vec(), self.weights[a]));
        }
        let mut nu = Vec::with_capacity(sites.len());
        for g in &mut groups {
            let total: f64 = g.iter().map(|p| p.1).sum();
            nu.push(total);
            for p in g.iter_mut() {
                p.1 /= total;
            }
        }
        ConditionalFamily::new(self.dim, sites, nu, groups)
    }

    /// Columns `weight, x, xi_1..xi_d` (components suffixed `_c` when the order exceeds 1).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(w, "weight")?;
        for c in 1..=self.order {
            let sfx = if self.order == 1 { String::new() } else { format!("_{c}") };
            write!(w, ",x{sfx}")?;
            for k in 1..=self.dim {
                write!(w, ",xi{sfx}_{k}")?;
            }
        }
        writeln!(w)?;
        for a in 0..self.len() {
            write!(w, "{}", self.weights[a])?;
            for v in self.atom(a) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl DiscreteMeasure {
    /// Reads the order-1 schema written by [`DiscreteMeasure::write_csv`]:
    /// `weight, x, xi_1..xi_d`. Weights are rescaled to sum to one.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let cols = r.headers()?.len();
        if cols < 3 {
            return invalid(format!("{}: expected columns weight,x,xi_1.., found {cols}", path.display()));
        }
        let dim = cols - 2;
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("{} row {}: {e}", path.display(), row + 2)))?;
            weights.push(vals[0]);
            atoms.extend_from_slice(&vals[1..]);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Unnormalized(total));
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Self::new(1, dim, atoms, weights)
    }
}

/// Builds a measure whose weights are products of normalized weights; the sum
/// may drift by a few ulps, so it is rescaled before validation.
fn renormalized(order: usize, dim: usize, atoms: Vec<f64>, mut weights: Vec<f64>) -> Result<DiscreteMeasure> {
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(total));
    }
    for w in &mut weights {
        *w /= total;
    }
    DiscreteMeasure::new(order, dim, atoms, weights)
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A disintegration `μ = ∫ μ_x dν(x)` with finitely many sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalFamily {
    dim: usize,
    sites: Vec<f64>,
    site_weights: Vec<f64>,
    conditionals: Vec<Vec<(Vec<f64>, f64)>>,
}

impl ConditionalFamily {
    pub fn new(dim: usize, sites: Vec<f64>, site_weights: Vec<f64>, conditionals: Vec<Vec<(Vec<f64>, f64)>>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if site_weights.len() != sites.len() {
            return Err(Error::ShapeMismatch { expected: sites.len(), got: site_weights.len() });
        }
        if conditionals.len() != sites.len() {
            return Err(Error::ShapeMismatch { expected: sites.len(), got: conditionals.len() });
        }
        let total: f64 = site_weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Unnormalized(total));
        }
        for (i, c) in conditionals.iter().enumerate() {
            if c.is_empty() {
                return invalid(format!("site {i} has no atoms"));
            }
            let s: f64 = c.iter().map(|p| p.1).sum();
            if (s - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::Unnormalized(s));
            }
            for (xi, w) in c {
                if xi.len() != dim {
                    return Err(Error::ShapeMismatch { expected: dim, got: xi.len() });
                }
                if !(*w > 0.0) || xi.iter().any(|v| !v.is_finite()) {
                    return invalid(format!("site {i} has a non-positive weight or non-finite atom"));
                }
            }
        }
        Ok(Self { dim, sites, site_weights, conditionals })
    }

    /// Per-site particle clouds of a state, grouped by bit-identical tag.
    pub fn from_state(s: &ParticleState) -> Result<Self> {
        empirical(s).disintegrate()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn site_weights(&self) -> &[f64] {
        &self.site_weights
    }

    pub fn conditional(&self, i: usize) -> &[(Vec<f64>, f64)] {
        &self.conditionals[i]
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `μ = Σ_i ν_i δ_{x_i} ⊗ μ_{x_i}`.
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (i, &x) in self.sites.iter().enumerate() {
            for (xi, w) in &self.conditionals[i] {
                atoms.push(x);
                atoms.extend_from_slice(xi);
                weights.push(self.site_weights[i] * w);
            }
        }
        renormalized(1, self.dim, atoms, weights)
    }

    /// True when both families have bit-identical sites and site weights within 1e-12.
    pub fn same_marginal(&self, other: &ConditionalFamily) -> bool {
        self.sites.len() == other.sites.len()
            && self.sites.iter().zip(&other.sites).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.site_weights.iter().zip(&other.site_weights).all(|(a, b)| (a - b).abs() <= WEIGHT_TOL)
    }
}

/// `μ^E = (1/M) Σ δ_{x_i} ⊗ δ_{ξ_i}`.
pub fn empirical(s: &ParticleState) -> DiscreteMeasure {
    DiscreteMeasure::uniform_pairs(s.dim(), s.tags(), s.states()).expect("particle states are validated")
}

/// `(1/N) Σ δ_{x_i} ⊗ δ_{y(x_i)}` on the tags of `p`.
pub fn monokinetic(p: &TaggedPartition, y: &PartitionField) -> Result<DiscreteMeasure> {
    if y.partition().tags() != p.tags() {
        return invalid("field and partition have different tags");
    }
    DiscreteMeasure::uniform_pairs(y.dim(), p.tags(), y.values())
}

/// `Σ_i ν_i δ_{x_i} ⊗ μ_{x_i}` for a family whose sites carry uniform weight `1/N`.
pub fn semi_empirical(f: &ConditionalFamily) -> Result<DiscreteMeasure> {
    let n = f.len() as f64;
    if f.site_weights.iter().any(|w| (w - 1.0 / n).abs() > WEIGHT_TOL) {
        return invalid("semi-empirical measures need uniform site weights 1/N");
    }
    f.to_measure()
}

/// `X[μ](t, x, ξ) = Σ_a w_a G(t, x, x_a, ξ, ξ_a)`, summed in atom order.
pub fn mean_field(k: &InteractionKernel, mu: &DiscreteMeasure, t: f64, x: f64, xi: &[f64]) -> Result<Vec<f64>> {
    if mu.order() != 1 {
        return invalid("mean field needs an order-1 measure");
    }
    if k.state_dim() != mu.dim() || xi.len() != mu.dim() {
        return Err(Error::ShapeMismatch { expected: k.state_dim(), got: mu.dim() });
    }
    let d = mu.dim();
    let mut acc = vec![0.0; d];
    let mut g = vec![0.0; d];
    for a in 0..mu.len() {
        k.eval_into(t, x, mu.x(a, 0), xi, mu.xi(a, 0), &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { i: 0, j: a });
        }
        for c in 0..d {
            acc[c] += mu.weights()[a] * g[c];
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub sites: Vec<f64>,
    pub dim: usize,
    /// Per-site mean, row-major `sites × d`.
    pub means: Vec<f64>,
    /// `T_i = (1/d) Σ w ‖ξ − y_i‖²`.
    pub temperature: Vec<f64>,
    /// `central[i][k-1]` is the `k`-th central moment at site `i`, `k = 1..=k_max`.
    /// For `d > 1` only `k ≤ 2` is available and `y_2 = Σ w ‖ξ − y_i‖²`.
    pub central: Vec<Vec<f64>>,
    pub site_rate: Option<Vec<f64>>,
}

impl MomentReport {
    pub fn mean(&self, i: usize) -> &[f64] {
        &self.means[i * self.dim..(i + 1) * self.dim]
    }

    pub fn with_site_rate(mut self, rate: Vec<f64>) -> Result<Self> {
        if rate.len() != self.sites.len() {
            return Err(Error::ShapeMismatch { expected: self.sites.len(), got: rate.len() });
        }
        self.site_rate = Some(rate);
        Ok(self)
    }

    /// Columns `site, x_i, y_1..y_d, T, y_2..y_k` (plus `S` when present).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let kmax = self.central.first().map_or(0, |c| c.len());
        write!(w, "site,x_i")?;
        for c in 1..=self.dim {
            write!(w, ",y_{c}")?;
        }
        write!(w, ",T")?;
        for k in 2..=kmax {
            write!(w, ",y{k}")?;
        }
        if self.site_rate.is_some() {
            write!(w, ",S")?;
        }
        writeln!(w)?;
        for i in 0..self.sites.len() {
            write!(w, "{i},{}", self.sites[i])?;
            for v in self.mean(i) {
                write!(w, ",{v}")?;
            }
            write!(w, ",{}", self.temperature[i])?;
            for v in &self.central[i][1..] {
                write!(w, ",{v}")?;
            }
            if let Some(s) = &self.site_rate {
                write!(w, ",{}", s[i])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-site mean, temperature and central moments up to `k_max`.
pub fn moments(f: &ConditionalFamily, k_max: usize) -> Result<MomentReport> {
    if k_max < 2 {
        return invalid("k_max must be at least 2");
    }
    let d = f.dim();
    if k_max >= 3 && d > 1 {
        return Err(Error::Unsupported("central moments of order >= 3 need d = 1".into()));
    }
    let per_site: Vec<(Vec<f64>, f64, Vec<f64>)> = f
        .conditionals
        .par_iter()
        .map(|c| {
            let mut mean = vec![0.0; d];
            for (xi, w) in c {
                for k in 0..d {
                    mean[k] += w * xi[k];
                }
            }
            let mut sq = 0.0;
            for (xi, w) in c {
                sq += w * xi.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
            let mut central = vec![0.0; k_max];
            if d == 1 {
                for (xi, w) in c {
                    let dev = xi[0] - mean[0];
                    let mut p = 1.0;
                    for slot in central.iter_mut() {
                        p *= dev;
                        *slot += w * p;
                    }
                }
            } else {
                central[1] = sq;
            }
            (mean, sq / d as f64, central)
        })
        .collect();
    let mut means = Vec::with_capacity(f.len() * d);
    let mut temperature = Vec::with_capacity(f.len());
    let mut central = Vec::with_capacity(f.len());
    for (m, t, c) in per_site {
        means.extend(m);
        temperature.push(t);
        central.push(c);
    }
    Ok(MomentReport { sites: f.sites.clone(), dim: d, means, temperature, central, site_rate: None })
}

/// `S_i = (1/N) Σ_j σ(x_i, x_j)` over the tags of `p`.
pub fn site_rate(sigma: impl Fn(f64, f64) -> f64, p: &TaggedPartition) -> Result<Vec<f64>> {
    let tags = p.tags();
    let n = tags.len() as f64;
    let mut out = Vec::with_capacity(tags.len());
    for &x in tags {
        let mut s = 0.0;
        for &xp in tags {
            let v = sigma(x, xp);
            if v < 0.0 || !v.is_finite() {
                return invalid(format!("σ({x}, {xp}) = {v} is negative or not finite"));
            }
            s += v;
        }
        out.push(s / n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::opinion_kernel;
    use crate::particles::{cloud_state, particle_rhs};
    use crate::partition::{Metric, TagRule};

    fn family(sites: &[(f64, &[(f64, f64)])]) -> ConditionalFamily {
        let n = sites.len() as f64;
        ConditionalFamily::new(
            1,
            sites.iter().map(|s| s.0).collect(),
            vec![1.0 / n; sites.len()],
            sites.iter().map(|s| s.1.iter().map(|&(v, w)| (vec![v], w)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn empirical_examples() {
        let s = ParticleState::new(vec![0.5], 1, vec![2.0]).unwrap();
        assert_eq!(empirical(&s).weights(), &[1.0]);
        let s = ParticleState::new(vec![0.5, 0.5], 1, vec![1.0, 1.0]).unwrap();
        assert_eq!(empirical(&s).len(), 2);
        let p = TaggedPartition::uniform(2, TagRule::Midpoint, Metric::Interval).unwrap();
        let c = cloud_state(&p, 1, &[vec![vec![0.0], vec![1.0]], vec![vec![2.0], vec![3.0]]]).unwrap();
        let m = empirical(&c);
        assert_eq!(m.len(), 4);
        assert!(m.weights().iter().all(|w| *w == 0.25));
    }

    #[test]
    fn monokinetic_matches_empirical() {
        let p = TaggedPartition::uniform(2, TagRule::Midpoint, Metric::Interval).unwrap();
        let y = PartitionField::from_states(p.clone(), 1, vec![1.0, 3.0]).unwrap();
        let m = monokinetic(&p, &y).unwrap();
        assert_eq!(m.xi(0, 0), &[1.0]);
        assert_eq!(m.xi(1, 0), &[3.0]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let s = ParticleState::on_partition(&p, 1, vec![1.0, 3.0]).unwrap();
        assert_eq!(m, empirical(&s));
    }

    #[test]
    fn semi_empirical_examples() {
        let f = family(&[(0.5, &[(0.0, 1.0)])]);
        let m = semi_empirical(&f).unwrap();
        assert_eq!(m.atom(0), &[0.5, 0.0]);
        let f = family(&[(0.25, &[(0.0, 0.5), (1.0, 0.5)]), (0.75, &[(2.0, 0.5), (3.0, 0.5)])]);
        let m = semi_empirical(&f).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.weights().iter().all(|w| *w == 0.25));
        let skew = ConditionalFamily::new(1, vec![0.25, 0.75], vec![0.3, 0.7], vec![vec![(vec![0.0], 1.0)], vec![(vec![1.0], 1.0)]]).unwrap();
        assert!(semi_empirical(&skew).is_err());
    }

    #[test]
    fn mean_field_examples() {
        let k = opinion_kernel(|_, _| 1.0, 1, Metric::Interval);
        let mu = DiscreteMeasure::uniform_pairs(1, &[0.2, 0.8], &[0.0, 2.0]).unwrap();
        assert_eq!(mean_field(&k, &mu, 0.0, 0.5, &[1.0]).unwrap(), vec![0.0]);
        let k = opinion_kernel(|x, xp| 1.0 + x * xp, 1, Metric::Interval);
        let dirac = DiscreteMeasure::uniform_pairs(1, &[0.3], &[4.0]).unwrap();
        assert_eq!(mean_field(&k, &dirac, 0.0, 0.6, &[1.0]).unwrap(), k.eval(0.0, 0.6, 0.3, &[1.0], &[4.0]));
        let s = ParticleState::new(vec![0.1, 0.4, 0.9], 1, vec![1.0, -2.0, 0.5]).unwrap();
        let rhs = particle_rhs(&k, 0.0, &s).unwrap();
        let mu = empirical(&s);
        for i in 0..3 {
            let v = mean_field(&k, &mu, 0.0, s.tags()[i], s.state(i)).unwrap();
            assert!((v[0] - rhs[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_examples() {
        let r = moments(&family(&[(0.5, &[(0.0, 0.5), (2.0, 0.5)])]), 3).unwrap();
        assert_eq!(r.mean(0), &[1.0]);
        assert_eq!(r.temperature[0], 1.0);
        assert_eq!(r.central[0], vec![0.0, 1.0, 0.0]);
        let r = moments(&family(&[(0.5, &[(3.0, 1.0)])]), 2).unwrap();
        assert_eq!(r.temperature[0], 0.0);
        let r = moments(&family(&[(0.5, &[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)])]), 4).unwrap();
        // direct weighted sums
        let oracle = |k: i32| 0.25 * (-1f64).powi(k) + 0.25;
        assert_eq!(r.mean(0), &[1.0]);
        assert!((r.central[0][1] - oracle(2)).abs() < 1e-15);
        assert!((r.central[0][3] - oracle(4)).abs() < 1e-15);
        assert!((r.central[0][3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let m = DiscreteMeasure::uniform_pairs(2, &[0.1, 0.7], &[0.5, -1.0, 0.25, 3.0]).unwrap();
        let path = std::env::temp_dir().join(format!("mflab-measure-{}.csv", std::process::id()));
        m.write_csv(&path).unwrap();
        let back = DiscreteMeasure::read_csv(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(back, m);
    }

    #[test]
    fn moments_in_two_dimensions() {
        let f = ConditionalFamily::new(2, vec![0.5], vec![1.0], vec![vec![(vec![0.0, 0.0], 0.5), (vec![2.0, 2.0], 0.5)]]).unwrap();
        let r = moments(&f, 2).unwrap();
        assert_eq!(r.mean(0), &[1.0, 1.0]);
        assert_eq!(r.temperature[0], 1.0);
        assert!(moments(&f, 3).is_err());
    }

    #[test]
    fn site_rate_examples() {
        let p = TaggedPartition::uniform(4, TagRule::Left, Metric::Interval).unwrap();
        assert_eq!(site_rate(|_, _| 1.0, &p).unwrap(), vec![1.0; 4]);
        let mean = p.tags().iter().sum::<f64>() / 4.0;
        for s in site_rate(|_, xp| xp, &p).unwrap() {
            assert!((s - mean).abs() < 1e-15);
        }
        let p1 = TaggedPartition::uniform(1, TagRule::Midpoint, Metric::Interval).unwrap();
        assert_eq!(site_rate(|x, xp| x + xp, &p1).unwrap(), vec![1.0]);
        assert!(site_rate(|_, _| -1.0, &p).is_err());
    }

    #[test]
    fn tensor_marginal_symmetrize() {
        let mu = DiscreteMeasure::uniform_pairs(1, &[0.1, 0.2], &[1.0, 2.0]).unwrap();
        let t = mu.tensor_power(2).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.order(), 2);
        assert_eq!(t.atom(1), &[0.1, 1.0, 0.2, 2.0]);
        assert_eq!(t.marginal(1).unwrap().len(), 4);
        let s = t.symmetrize().unwrap();
        assert_eq!(s.len(), 8);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(t.marginal(3).is_err());
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn disintegration_round_trip() {
        let mu = DiscreteMeasure::from_pairs(1, &[0.1, 0.2, 0.1], &[1.0, 2.0, 3.0], vec![0.25, 0.5, 0.25]).unwrap();
        let f = mu.disintegrate().unwrap();
        assert_eq!(f.sites(), &[0.1, 0.2]);
        assert_eq!(f.site_weights(), &[0.5, 0.5]);
        assert_eq!(f.conditional(0).len(), 2);
        assert_eq!(f.to_measure().unwrap().len(), 3);
    }

    #[test]
    fn validation() {
        assert!(matches!(DiscreteMeasure::new(1, 1, vec![], vec![]), Err(Error::EmptyMeasure)));
        assert!(matches!(DiscreteMeasure::new(1, 1, vec![0.0, 0.0], vec![0.5]), Err(Error::Unnormalized(_))));
        assert!(DiscreteMeasure::new(1, 1, vec![0.0, f64::NAN], vec![1.0]).is_err());
    }
}
