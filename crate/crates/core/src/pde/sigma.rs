//! The mollified symbol `σ_ε(x, x') = Σ_l ∫ η_ε(x − z) a_l(z) D^l η_ε(z − x') dz`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;

use super::dsl::{Domain, PdeSpec};
use super::mollifier::Mollifier;

pub const QUADRATURE_NODES: usize = 32;

/// Checks `ε` and the mollifier order against the equation.
pub(crate) fn validate(spec: &PdeSpec, m: &Mollifier, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("ε must be positive, got {eps}"));
    }
    if spec.domain() == Domain::Torus && eps > 0.25 {
        return invalid(format!("support wider than domain: ε = {eps} exceeds 1/4 on the torus"));
    }
    if spec.order() > m.max_derivative() {
        return invalid(format!(
            "mollifier q = {} cannot differentiate {} times; need q ≥ p + 1",
            m.q(),
            spec.order()
        ));
    }
    Ok(())
}

/// Gauss–Legendre rule shared by all pair integrals.
#[derive(Debug, Clone)]
pub(crate) struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub(crate) fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }
}

/// `∫ η_ε(x − z) w(z) D^l η_ε(z − x') dz` over the support intersection.
///
/// On the torus `x'` is moved to its nearest image and `w` sees `z mod 1`;
/// on the interval `z` is restricted to `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn pair_integral(
    m: &Mollifier,
    eps: f64,
    domain: Domain,
    l: usize,
    x: f64,
    xp: f64,
    w: &dyn Fn(f64) -> f64,
    rule: &Rule,
) -> f64 {
    let xp = match domain {
        Domain::Torus => x + domain.metric().displacement(x, xp),
        Domain::Interval => xp,
    };
    let mut lo = x.max(xp) - eps;
    let mut hi = x.min(xp) + eps;
    if domain == Domain::Interval {
        lo = lo.max(0.0);
        hi = hi.min(1.0);
    }
    if lo >= hi {
        return 0.0;
    }
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (&s, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let z = c + h * s;
        let zw = match domain {
            Domain::Torus => z.rem_euclid(1.0),
            Domain::Interval => z,
        };
        acc += wt * m.scaled(eps, x - z) * w(zw) * m.scaled_derivative(l, eps, z - xp);
    }
    acc * h
}

/// `σ_ε(t, ξ)` as a function of `(x, x')`, with `a_l(t, z, ξ)` inside the integral.
pub fn sigma_eps<'a>(
    spec: &'a PdeSpec,
    m: &'a Mollifier,
    eps: f64,
    t: f64,
    xi: f64,
) -> Result<impl Fn(f64, f64) -> f64 + 'a> {
    validate(spec, m, eps)?;
    let rule = Rule::new(QUADRATURE_NODES);
    Ok(move |x: f64, xp: f64| sigma_at(spec, m, eps, &rule, t, xi, x, xp))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn sigma_at(
    spec: &PdeSpec,
    m: &Mollifier,
    eps: f64,
    rule: &Rule,
    t: f64,
    xi: f64,
    x: f64,
    xp: f64,
) -> f64 {
    let mut s = 0.0;
    for l in 0..=spec.order() {
        if spec.coeff(l).is_zero() {
            continue;
        }
        let w = |z: f64| spec.coeff_at(l, t, z, xi);
        s += pair_integral(m, eps, spec.domain(), l, x, xp, &w, rule);
    }
    s
}

/// How the `l`-th coefficient enters the precomputed particle system.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    Zero,
    /// Constant, pulled out of the integral.
    Constant(f64),
    /// Depends on `x` only; integrated exactly inside `K_l`.
    Spatial,
    /// Depends on `t` or `ξ`: evaluated at `(t, x_i, ξ_i)` each step.
    Pointwise,
}

/// Precomputed `K_l(x_i, x_j)` matrices for the `ε`-particle system
/// `ξ̇_i = (1/N) Σ_j σ_ε(x_i, x_j) ξ_j`.
///
/// Coefficients depending only on `x` are integrated exactly; coefficients
/// depending on `t` or `ξ` are factored out at `(t, x_i, ξ_i)`, which is exact
/// unless they also depend on `x`.
#[derive(Debug, Clone)]
pub struct SigmaMatrices {
    n: usize,
    tags: Vec<f64>,
    factors: Vec<Factor>,
    mats: Vec<Option<Vec<f64>>>,
    /// `Σ_l c_l K_l` when every factor is time and state independent.
    combined: Option<Vec<f64>>,
    spec: PdeSpec,
}

impl SigmaMatrices {
    pub fn new(spec: &PdeSpec, m: &Mollifier, eps: f64, tags: &[f64]) -> Result<Self> {
        validate(spec, m, eps)?;
        let n = tags.len();
        if n == 0 {
            return invalid("no particles");
        }
        let rule = Rule::new(QUADRATURE_NODES);
        let mut factors = Vec::new();
        let mut mats = Vec::new();
        for l in 0..=spec.order() {
            let dep = spec.dependence(l);
            let f = if spec.coeff(l).is_zero() {
                Factor::Zero
            } else if dep.is_constant() {
                Factor::Constant(spec.coeff_at(l, 0.0, 0.0, 0.0))
            } else if dep.x && !dep.t && !dep.y {
                Factor::Spatial
            } else {
                Factor::Pointwise
            };
            factors.push(f);
            if f == Factor::Zero {
                mats.push(None);
                continue;
            }
            let mut k = vec![0.0; n * n];
            k.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                let one = |_: f64| 1.0;
                let spatial = |z: f64| spec.coeff_at(l, 0.0, z, 0.0);
                let w: &dyn Fn(f64) -> f64 = if f == Factor::Spatial { &spatial } else { &one };
                for (j, r) in row.iter_mut().enumerate() {
                    *r = pair_integral(m, eps, spec.domain(), l, tags[i], tags[j], w, &rule);
                }
            });
            mats.push(Some(k));
        }
        let autonomous = factors.iter().all(|f| !matches!(f, Factor::Pointwise));
        let combined = autonomous.then(|| {
            let mut s = vec![0.0; n * n];
            for (f, k) in factors.iter().zip(&mats) {
                let c = match f {
                    Factor::Constant(c) => *c,
                    Factor::Spatial => 1.0,
                    _ => continue,
                };
                for (a, b) in s.iter_mut().zip(k.as_ref().unwrap()) {
                    *a += c * b;
                }
            }
            s
        });
        Ok(Self { n, tags: tags.to_vec(), factors, mats, combined, spec: spec.clone() })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `σ_ε(x_i, x_j)` at `(t, ξ_i)`.
    pub fn sigma(&self, t: f64, i: usize, j: usize, xi: f64) -> f64 {
        let n = self.n;
        self.factors
            .iter()
            .zip(&self.mats)
            .enumerate()
            .map(|(l, (f, k))| {
                let k = match k {
                    Some(k) => k[i * n + j],
                    None => return 0.0,
                };
                match f {
                    Factor::Zero => 0.0,
                    Factor::Constant(c) => c * k,
                    Factor::Spatial => k,
                    Factor::Pointwise => self.spec.coeff_at(l, t, self.tags[i], xi) * k,
                }
            })
            .sum()
    }

    /// Right-hand side `(1/N) Σ_j σ_ε(x_i, x_j) ξ_j`.
    pub fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let inv = 1.0 / n as f64;
        let dot = |k: &[f64], i: usize| -> f64 { k[i * n..(i + 1) * n].iter().zip(y).map(|(a, b)| a * b).sum() };
        if let Some(s) = &self.combined {
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = inv * dot(s, i));
            return;
        }
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (l, (f, k)) in self.factors.iter().zip(&self.mats).enumerate() {
                let Some(k) = k else { continue };
                let c = match f {
                    Factor::Zero => continue,
                    Factor::Constant(c) => *c,
                    Factor::Spatial => 1.0,
                    Factor::Pointwise => self.spec.coeff_at(l, t, self.tags[i], y[i]),
                };
                acc += c * dot(k, i);
            }
            *o = inv * acc;
        });
    }

    /// Gershgorin bound on the spectral radius of the linear part.
    pub fn gershgorin(&self, t: f64, y: &[f64]) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.sigma(t, i, j, y[i]).abs()).sum::<f64>() / n as f64)
            .fold(0.0, f64::max)
    }
}
