//! Interaction kernels `G(t, x, x', ξ, ξ') ∈ R^d` and sampled regularity
//! estimates.
//!
//! A kernel is an immutable, thread-safe evaluator plus metadata (Hölder
//! exponent in `(x, x')`, Lipschitz flag in `(ξ, ξ')`, optional closed-form
//! bounds). Built-ins: [`opinion_kernel`], [`cucker_smale_kernel`] and
//! [`hamiltonian_pair_kernel`]; the PDE module adds mollified kernels.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::Metric;
use crate::rng::seeded;

/// `(t, x, x', ξ, ξ', out)`; writes `G` into `out` (length `d`).
pub type EvalFn = dyn Fn(f64, f64, f64, &[f64], &[f64], &mut [f64]) + Send + Sync;
/// Extra contribution added to the `j = i` interaction at particle level: `(t, x, ξ, out)`.
pub type DiagonalFn = dyn Fn(f64, f64, &[f64], &mut [f64]) + Send + Sync;
/// Batched row sum `(t, x, ξ, tags, states, acc)`: adds `G(t, x, x_j, ξ, ξ_j)` to
/// `acc` for every `j` in ascending order, with the same floating-point
/// operations as the pointwise evaluator.
pub type RowFn = dyn Fn(f64, f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;
/// Closed-form Lipschitz and sup bounds on a box.
pub type BoundsFn = dyn Fn(&BoundBox) -> KernelConstants + Send + Sync;

/// Declared regularity of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    /// Hölder exponent `α ∈ (0, 1]` in `(x, x')`.
    pub holder_exponent: f64,
    pub lipschitz_in_state: bool,
    /// `G` does not depend on `(x, x')`.
    pub indistinguishable: bool,
}

impl Default for Regularity {
    fn default() -> Self {
        Self { holder_exponent: 1.0, lipschitz_in_state: true, indistinguishable: false }
    }
}

/// Lipschitz constant (jointly in `(x, x', ξ, ξ')`) and `sup ‖G‖` on a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub lipschitz: f64,
    pub sup: f64,
    /// True when the values come from sampling rather than a closed form.
    pub estimated: bool,
}

#[derive(Clone)]
pub struct InteractionKernel {
    name: String,
    dim: usize,
    metric: Metric,
    regularity: Regularity,
    eval: Arc<EvalFn>,
    diagonal: Option<Arc<DiagonalFn>>,
    bounds: Option<Arc<BoundsFn>>,
    row: Option<Arc<RowFn>>,
}

impl fmt::Debug for InteractionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InteractionKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("metric", &self.metric)
            .field("regularity", &self.regularity)
            .field("diagonal", &self.diagonal.is_some())
            .field("closed_form_bounds", &self.bounds.is_some())
            .field("row_sum", &self.row.is_some())
            .finish()
    }
}

impl InteractionKernel {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        metric: Metric,
        regularity: Regularity,
        eval: impl Fn(f64, f64, f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        assert!(dim > 0, "kernel state dimension must be positive");
        Self {
            name: name.into(),
            dim,
            metric,
            regularity,
            eval: Arc::new(eval),
            diagonal: None,
            bounds: None,
            row: None,
        }
    }

    /// `G ≡ 0`.
    pub fn zero(dim: usize) -> Self {
        let reg = Regularity { indistinguishable: true, ..Regularity::default() };
        Self::new("zero", dim, Metric::Interval, reg, |_, _, _, _, _, out| out.fill(0.0))
            .with_closed_form_bounds(|_| KernelConstants { lipschitz: 0.0, sup: 0.0, estimated: false })
    }

    pub fn with_diagonal(
        mut self,
        f: impl Fn(f64, f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.diagonal = Some(Arc::new(f));
        self
    }

    pub fn with_closed_form_bounds(
        mut self,
        f: impl Fn(&BoundBox) -> KernelConstants + Send + Sync + 'static,
    ) -> Self {
        self.bounds = Some(Arc::new(f));
        self
    }

    pub fn with_row_sum(
        mut self,
        f: impl Fn(f64, f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.row = Some(Arc::new(f));
        self
    }

    /// Adds `Σ_j G(t, x, x_j, ξ, ξ_j)` to `acc` (no diagonal term).
    #[inline]
    pub fn row_sum_into(&self, t: f64, x: f64, xi: &[f64], tags: &[f64], states: &[f64], acc: &mut [f64]) {
        match &self.row {
            Some(f) => f(t, x, xi, tags, states, acc),
            None => {
                let d = self.dim;
                let mut g = vec![0.0; d];
                for (j, &xp) in tags.iter().enumerate() {
                    (self.eval)(t, x, xp, xi, &states[j * d..(j + 1) * d], &mut g);
                    for c in 0..d {
                        acc[c] += g[c];
                    }
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn has_diagonal_term(&self) -> bool {
        self.diagonal.is_some()
    }

    #[inline]
    pub fn eval_into(&self, t: f64, x: f64, xp: f64, xi: &[f64], xip: &[f64], out: &mut [f64]) {
        (self.eval)(t, x, xp, xi, xip, out)
    }

    pub fn eval(&self, t: f64, x: f64, xp: f64, xi: &[f64], xip: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, x, xp, xi, xip, &mut out);
        out
    }

    /// Writes the `j = i` correction into `out`; returns false (leaving `out`
    /// untouched) when the kernel has none.
    #[inline]
    pub fn diagonal_into(&self, t: f64, x: f64, xi: &[f64], out: &mut [f64]) -> bool {
        match &self.diagonal {
            Some(f) => {
                f(t, x, xi, out);
                true
            }
            None => false,
        }
    }

    /// Closed-form constants on `bx`, if registered.
    pub fn closed_form_constants(&self, bx: &BoundBox) -> Option<KernelConstants> {
        self.bounds.as_ref().map(|f| f(bx))
    }
}

/// Opinion propagation: `G = σ(x, x') (ξ' − ξ)`.
pub fn opinion_kernel(
    sigma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dim: usize,
    metric: Metric,
) -> InteractionKernel {
    let sigma = Arc::new(sigma);
    let row_sigma = sigma.clone();
    InteractionKernel::new("opinion", dim, metric, Regularity::default(), move |_, x, xp, xi, xip, out| {
        let s = sigma(x, xp);
        for k in 0..out.len() {
            out[k] = s * (xip[k] - xi[k]);
        }
    })
    .with_row_sum(move |_, x, xi, tags, states, acc| {
        let d = xi.len();
        if d == 1 {
            let (x0, mut a) = (xi[0], acc[0]);
            for (&xp, &v) in tags.iter().zip(states) {
                a += row_sigma(x, xp) * (v - x0);
            }
            acc[0] = a;
            return;
        }
        for (&xp, xj) in tags.iter().zip(states.chunks_exact(d)) {
            let s = row_sigma(x, xp);
            for k in 0..d {
                acc[k] += s * (xj[k] - xi[k]);
            }
        }
    })
}

/// Opinion kernel with `σ ≡ c`, with its exact constants registered:
/// Lipschitz `√2·|c|`, sup `|c|·‖ξ-box widths‖`.
pub fn constant_opinion_kernel(c: f64, dim: usize, metric: Metric) -> InteractionKernel {
    let mut k = opinion_kernel(move |_, _| c, dim, metric)
        .with_closed_form_bounds(move |bx| {
            let width = bx.xi.iter().map(|(lo, hi)| (hi - lo) * (hi - lo)).sum::<f64>().sqrt();
            KernelConstants { lipschitz: std::f64::consts::SQRT_2 * c.abs(), sup: c.abs() * width, estimated: false }
        });
    k.regularity.indistinguishable = true;
    k
}

/// Cucker–Smale flocking with `ξ = (q, p) ∈ R^r × R^r`:
/// `G = (p, a(‖q − q'‖)(p' − p))`.
pub fn cucker_smale_kernel(
    a: impl Fn(f64) -> f64 + Send + Sync + 'static,
    r: usize,
    metric: Metric,
) -> InteractionKernel {
    let reg = Regularity { indistinguishable: true, ..Regularity::default() };
    InteractionKernel::new("cucker_smale", 2 * r, metric, reg, move |_, _, _, xi, xip, out| {
        let (q, p) = xi.split_at(r);
        let (qp, pp) = xip.split_at(r);
        let dist = q.iter().zip(qp).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        let w = a(dist);
        for k in 0..r {
            out[k] = p[k];
            out[r + k] = w * (pp[k] - p[k]);
        }
    })
}

/// Gradient of a single-particle Hamiltonian: `(z = (q, p), grad)` with `grad = (∂_q h, ∂_p h)`.
pub type SingleGradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
/// Gradient of a pair Hamiltonian `h(z, z')`: `grad = (∂_q, ∂_p, ∂_q', ∂_p')`, length `4r`.
pub type PairGradFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// Hamiltonian particle system with single and pair Hamiltonians.
///
/// For the pair `(i, j)` the kernel returns
/// `(∂_p h_1(z) + ∂_4 h(z', z), −∂_q h_1(z) − ∂_3 h(z', z))`, and the `j = i`
/// interaction additionally receives `(∂_2 h(z, z), −∂_1 h(z, z))`.
/// Self-interaction is decided by particle index, never by comparing tags.
/// For symmetric `h` this is Hamilton's system for
/// `H = Σ h_1(z_i) + (1/2N) Σ_{i≠j} h(z_i, z_j) + (1/N) Σ_i h(z_i, z_i)`.
pub fn hamiltonian_pair_kernel(
    single_grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    pair_grad: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    r: usize,
    metric: Metric,
) -> InteractionKernel {
    let single: Arc<SingleGradFn> = Arc::new(single_grad);
    let pair: Arc<PairGradFn> = Arc::new(pair_grad);
    let pair_diag = pair.clone();
    let reg = Regularity { indistinguishable: true, ..Regularity::default() };
    InteractionKernel::new("hamiltonian", 2 * r, metric, reg, move |_, _, _, xi, xip, out| {
        let mut gs = vec![0.0; 2 * r];
        let mut gp = vec![0.0; 4 * r];
        single(xi, &mut gs);
        // partner-first ordering: derivative of h(z', z) in its second slot
        pair(xip, xi, &mut gp);
        for k in 0..r {
            out[k] = gs[r + k] + gp[3 * r + k];
            out[r + k] = -gs[k] - gp[2 * r + k];
        }
    })
    .with_diagonal(move |_, _, xi, out| {
        let mut gp = vec![0.0; 4 * r];
        pair_diag(xi, xi, &mut gp);
        for k in 0..r {
            out[k] = gp[r + k];
            out[r + k] = -gp[k];
        }
    })
}

/// Conservative domain for sup/Lipschitz estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBox {
    pub omega: (f64, f64),
    pub xi: Vec<(f64, f64)>,
    pub time: (f64, f64),
}

impl BoundBox {
    pub fn new(omega: (f64, f64), xi: Vec<(f64, f64)>, time: (f64, f64)) -> Result<Self> {
        let all = std::iter::once(omega).chain(xi.iter().copied()).chain(std::iter::once(time));
        for (lo, hi) in all {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::DegenerateBox(format!("interval [{lo}, {hi}] is empty or not finite")));
            }
        }
        if xi.is_empty() {
            return Err(Error::DegenerateBox("no state coordinates".into()));
        }
        Ok(Self { omega, xi, time })
    }

    /// Smallest box containing the given tags and states (row-major, `dim` columns),
    /// padded by `pad` in every state coordinate.
    pub fn hull(tags: &[f64], states: &[f64], dim: usize, time: (f64, f64), pad: f64) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::DegenerateBox("no points".into()));
        }
        let lo = tags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut xi = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for row in states.chunks(dim) {
            for (k, &v) in row.iter().enumerate() {
                xi[k].0 = xi[k].0.min(v);
                xi[k].1 = xi[k].1.max(v);
            }
        }
        for iv in &mut xi {
            iv.0 -= pad;
            iv.1 += pad;
        }
        Self::new((lo, hi), xi, time)
    }

    pub fn union(&self, other: &BoundBox) -> Result<Self> {
        if self.xi.len() != other.xi.len() {
            return Err(Error::ShapeMismatch { expected: self.xi.len(), got: other.xi.len() });
        }
        let xi = self.xi.iter().zip(&other.xi).map(|(a, b)| (a.0.min(b.0), a.1.max(b.1))).collect();
        Self::new(
            (self.omega.0.min(other.omega.0), self.omega.1.max(other.omega.1)),
            xi,
            (self.time.0.min(other.time.0), self.time.1.max(other.time.1)),
        )
    }

    fn volume_is_zero(&self) -> bool {
        self.omega.1 <= self.omega.0 || self.xi.iter().any(|(lo, hi)| hi <= lo)
    }

    /// Joint coordinates `(x, x', ξ, ξ')` as intervals.
    fn joint(&self) -> Vec<(f64, f64)> {
        let mut v = vec![self.omega, self.omega];
        v.extend(self.xi.iter().copied());
        v.extend(self.xi.iter().copied());
        v
    }
}

/// Sampled estimate of the Lipschitz constant of `G` jointly in `(x, x', ξ, ξ')`
/// on `bx`: the largest spectral norm of a central-difference Jacobian over the
/// box corners, its center and `samples` random points.
///
/// This is a lower estimate of the true constant; reports built on it must be
/// flagged as estimated.
pub fn lipschitz_estimate(k: &InteractionKernel, bx: &BoundBox, samples: usize, seed: u64) -> Result<f64> {
    Ok(sampled_constants(k, bx, samples, seed)?.lipschitz)
}

/// Sampled `max ‖G‖` over the same point set as [`lipschitz_estimate`].
pub fn sup_estimate(k: &InteractionKernel, bx: &BoundBox, samples: usize, seed: u64) -> Result<f64> {
    Ok(sampled_constants(k, bx, samples, seed)?.sup)
}

/// Closed-form constants when registered, sampled estimates otherwise.
pub fn kernel_constants(k: &InteractionKernel, bx: &BoundBox, samples: usize, seed: u64) -> Result<KernelConstants> {
    match k.closed_form_constants(bx) {
        Some(c) => Ok(c),
        None => sampled_constants(k, bx, samples, seed),
    }
}

const MAX_CORNER_DIMS: usize = 12;

fn sampled_constants(k: &InteractionKernel, bx: &BoundBox, samples: usize, seed: u64) -> Result<KernelConstants> {
    if samples < 2 {
        return Err(Error::InvalidArgument("lipschitz estimation needs at least 2 samples".into()));
    }
    if bx.xi.len() != k.state_dim() {
        return Err(Error::ShapeMismatch { expected: k.state_dim(), got: bx.xi.len() });
    }
    if bx.volume_is_zero() {
        return Err(Error::DegenerateBox("box has zero volume".into()));
    }
    let joint = bx.joint();
    let m = joint.len();
    let mut points: Vec<Vec<f64>> = Vec::new();
    if m <= MAX_CORNER_DIMS {
        for mask in 0..(1usize << m) {
            points.push(
                joint.iter().enumerate().map(|(c, &(lo, hi))| if mask >> c & 1 == 1 { hi } else { lo }).collect(),
            );
        }
    }
    points.push(joint.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect());
    let mut rng = seeded(seed);
    for _ in 0..samples {
        points.push(joint.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect());
    }
    let t = 0.5 * (bx.time.0 + bx.time.1);
    let d = k.state_dim();
    let mut lip: f64 = 0.0;
    let mut sup: f64 = 0.0;
    let mut jac = vec![0.0; d * m];
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    for p in &points {
        let g = eval_joint(k, t, p);
        sup = sup.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut q = p.clone();
        for c in 0..m {
            let (lo, hi) = joint[c];
            let h = 1e-6 * (hi - lo).abs().max(1.0);
            q[c] = p[c] + h;
            eval_joint_into(k, t, &q, &mut plus);
            q[c] = p[c] - h;
            eval_joint_into(k, t, &q, &mut minus);
            q[c] = p[c];
            for r in 0..d {
                jac[r * m + c] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
        lip = lip.max(spectral_norm(&jac, d, m));
    }
    Ok(KernelConstants { lipschitz: lip, sup, estimated: true })
}

fn eval_joint_into(k: &InteractionKernel, t: f64, p: &[f64], out: &mut [f64]) {
    let d = k.state_dim();
    k.eval_into(t, p[0], p[1], &p[2..2 + d], &p[2 + d..2 + 2 * d], out);
}

fn eval_joint(k: &InteractionKernel, t: f64, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k.state_dim()];
    eval_joint_into(k, t, p, &mut out);
    out
}

/// Largest singular value of a row-major `rows × cols` matrix.
pub(crate) fn spectral_norm(a: &[f64], rows: usize, cols: usize) -> f64 {
    // eigenvalues of A Aᵀ (rows × rows, small)
    let mut g = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in 0..rows {
            g[i * rows + j] = (0..cols).map(|c| a[i * cols + c] * a[j * cols + c]).sum();
        }
    }
    symmetric_max_eigenvalue(&mut g, rows).max(0.0).sqrt()
}

/// Cyclic Jacobi iteration; destroys `a`.
fn symmetric_max_eigenvalue(a: &mut [f64], n: usize) -> f64 {
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Samples `(x, x')` pairs and reports whether `G` ever changed with them.
pub fn check_indistinguishable(k: &InteractionKernel, bx: &BoundBox, samples: usize, seed: u64) -> bool {
    let mut rng = seeded(seed);
    let d = k.state_dim();
    let (lo, hi) = bx.omega;
    for _ in 0..samples {
        let xi: Vec<f64> = bx.xi.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        let xip: Vec<f64> = bx.xi.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        let t = bx.time.0 + (bx.time.1 - bx.time.0) * rng.random::<f64>();
        let base = k.eval(t, lo, lo, &xi, &xip);
        let x = lo + (hi - lo) * rng.random::<f64>();
        let xp = lo + (hi - lo) * rng.random::<f64>();
        let other = k.eval(t, x, xp, &xi, &xip);
        if (0..d).any(|c| base[c].to_bits() != other[c].to_bits()) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(d: usize) -> BoundBox {
        BoundBox::new((0.0, 1.0), vec![(-1.0, 1.0); d], (0.0, 0.0)).unwrap()
    }

    #[test]
    fn opinion_examples() {
        let k = opinion_kernel(|_, _| 1.0, 1, Metric::Interval);
        assert_eq!(k.eval(0.0, 0.1, 0.7, &[2.0], &[5.0]), vec![3.0]);
        assert_eq!(k.eval(0.0, 0.1, 0.7, &[4.0], &[4.0]), vec![0.0]);
        let k = opinion_kernel(|x, xp| x * xp, 1, Metric::Interval);
        assert_eq!(k.eval(0.0, 0.5, 1.0, &[0.0], &[2.0]), vec![1.0]);
    }

    #[test]
    fn row_sum_matches_pointwise() {
        let k = opinion_kernel(|x, xp| 1.0 + (x - xp).sin(), 2, Metric::Interval);
        let tags = [0.1, 0.35, 0.8, 0.95];
        let states = [0.3, -1.0, 2.0, 0.25, 1e-3, 7.0, -0.6, 0.1];
        let xi = [0.7, 0.2];
        let mut fast = vec![0.0; 2];
        k.row_sum_into(0.0, 0.4, &xi, &tags, &states, &mut fast);
        let mut slow = vec![0.0; 2];
        for j in 0..4 {
            let g = k.eval(0.0, 0.4, tags[j], &xi, &states[2 * j..2 * j + 2]);
            slow[0] += g[0];
            slow[1] += g[1];
        }
        assert_eq!(fast[0].to_bits(), slow[0].to_bits());
        assert_eq!(fast[1].to_bits(), slow[1].to_bits());
    }

    #[test]
    fn cucker_smale_examples() {
        let k = cucker_smale_kernel(|_| 1.0, 1, Metric::Interval);
        assert_eq!(k.state_dim(), 2);
        assert_eq!(k.eval(0.0, 0.0, 0.0, &[0.0, 0.0], &[1.0, 1.0]), vec![0.0, 1.0]);
        assert_eq!(k.eval(0.0, 0.0, 0.0, &[0.3, -2.0], &[0.3, -2.0]), vec![-2.0, 0.0]);
        let k = cucker_smale_kernel(|r| 1.0 / (1.0 + r * r), 1, Metric::Interval);
        assert_eq!(k.eval(0.0, 0.0, 0.0, &[0.0, 0.0], &[1.0, 2.0]), vec![0.0, 1.0]);
    }

    fn quadratic_pair_kernel() -> InteractionKernel {
        // h_1 = 0, h(z, z') = (q − q')²/2
        hamiltonian_pair_kernel(
            |_, g| g.fill(0.0),
            |z, zp, g| {
                let d = z[0] - zp[0];
                g[0] = d;
                g[1] = 0.0;
                g[2] = -d;
                g[3] = 0.0;
            },
            1,
            Metric::Interval,
        )
    }

    #[test]
    fn hamiltonian_examples() {
        let zero = hamiltonian_pair_kernel(|_, g| g.fill(0.0), |_, _, g| g.fill(0.0), 1, Metric::Interval);
        assert_eq!(zero.eval(0.0, 0.0, 0.5, &[1.0, 2.0], &[3.0, 4.0]), vec![0.0, 0.0]);

        let free = hamiltonian_pair_kernel(
            |z, g| {
                g[0] = 0.0;
                g[1] = z[1];
            },
            |_, _, g| g.fill(0.0),
            1,
            Metric::Interval,
        );
        assert_eq!(free.eval(0.0, 0.0, 0.5, &[0.0, 3.0], &[7.0, 1.0]), vec![3.0, 0.0]);

        // finite-difference oracle: ṗ = −∂_3 h(z', z) with h(a, b, c, d) = (a − c)²/2
        let h = |a: f64, c: f64| 0.5 * (a - c) * (a - c);
        let (q, qp) = (1.0, 0.0);
        let step = 1e-6;
        let d3 = (h(qp, q + step) - h(qp, q - step)) / (2.0 * step);
        let k = quadratic_pair_kernel();
        let g = k.eval(0.0, 0.1, 0.2, &[q, 0.0], &[qp, 0.0]);
        assert!((g[1] - (-d3)).abs() < 1e-8);
        assert!((g[1] + 1.0).abs() < 1e-12);
        assert!(k.has_diagonal_term());
    }

    #[test]
    fn lipschitz_of_constant_opinion() {
        let k = opinion_kernel(|_, _| 1.0, 1, Metric::Interval);
        for (lo, hi) in [(-1.0, 1.0), (0.0, 0.1), (3.0, 50.0)] {
            let bx = BoundBox::new((0.0, 1.0), vec![(lo, hi)], (0.0, 1.0)).unwrap();
            let l = lipschitz_estimate(&k, &bx, 64, 7).unwrap();
            assert!((1.0..=2.0).contains(&l), "{l}");
            assert!((l - std::f64::consts::SQRT_2).abs() < 1e-6);
        }
    }

    #[test]
    fn lipschitz_of_zero_kernel() {
        let k = InteractionKernel::zero(2);
        assert_eq!(lipschitz_estimate(&k, &unit_box(2), 16, 1).unwrap(), 0.0);
        assert_eq!(sup_estimate(&k, &unit_box(2), 16, 1).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_below_closed_form() {
        // G = x (ξ' − ξ): ‖∇G‖² = (ξ' − ξ)² + 2x², maximal at x = 1, |ξ' − ξ| = 2.
        let k = opinion_kernel(|x, _| x, 1, Metric::Interval);
        let exact = (4.0f64 + 2.0).sqrt();
        let l = lipschitz_estimate(&k, &unit_box(1), 200, 3).unwrap();
        assert!(l <= exact * (1.0 + 1e-9), "{l} > {exact}");
        assert!(l >= 0.99 * exact);
    }

    #[test]
    fn degenerate_box_is_rejected() {
        let k = opinion_kernel(|_, _| 1.0, 1, Metric::Interval);
        let bx = BoundBox::new((0.5, 0.5), vec![(0.0, 1.0)], (0.0, 0.0)).unwrap();
        assert!(matches!(lipschitz_estimate(&k, &bx, 8, 0), Err(Error::DegenerateBox(_))));
        let bx = BoundBox::new((0.0, 1.0), vec![(0.0, 1.0)], (0.0, 0.0)).unwrap();
        assert!(lipschitz_estimate(&k, &bx, 1, 0).is_err());
    }

    #[test]
    fn indistinguishable_checks() {
        let bx = unit_box(2);
        assert!(check_indistinguishable(&cucker_smale_kernel(|r| 1.0 / (1.0 + r), 1, Metric::Interval), &bx, 50, 2));
        assert!(!check_indistinguishable(&opinion_kernel(|x, xp| 1.0 + x * xp, 2, Metric::Interval), &bx, 50, 2));
    }

    #[test]
    fn closed_form_constants() {
        let k = constant_opinion_kernel(2.0, 1, Metric::Interval);
        let c = kernel_constants(&k, &unit_box(1), 8, 0).unwrap();
        assert!(!c.estimated);
        assert!((c.lipschitz - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(c.sup, 4.0);
        let s = sampled_constants(&k, &unit_box(1), 50, 0).unwrap();
        assert!(s.sup <= c.sup + 1e-12 && s.lipschitz <= c.lipschitz + 1e-9);
    }

    #[test]
    fn spectral_norm_small_matrices() {
        assert!((spectral_norm(&[0.0, 0.0, -1.0, 1.0], 1, 4) - 2f64.sqrt()).abs() < 1e-15);
        // diag(3, 1)
        assert!((spectral_norm(&[3.0, 0.0, 0.0, 1.0], 2, 2) - 3.0).abs() < 1e-12);
        // [[1, 1], [0, 1]] has largest singular value golden ratio
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_norm(&[1.0, 1.0, 0.0, 1.0], 2, 2) - phi).abs() < 1e-12);
    }
}
