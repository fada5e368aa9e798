//! `G_ε(t, x, x', ξ, ξ') = σ_ε(t, x, x', ξ) ξ'` as an [`InteractionKernel`].

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::kernels::{InteractionKernel, Regularity};

use super::dsl::{Domain, PdeSpec};
use super::mollifier::Mollifier;
use super::sigma::{sigma_at, validate, Rule, QUADRATURE_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `σ_ε` by quadrature against the polynomial mollifier.
    Polynomial,
    /// `Σ_l a_l(t, x, ξ) ∂_{x'}^l` of `e^{−(x−x')²/2ε} / (πε)^{1/2}`.
    Gaussian,
}

#[derive(Debug, Clone)]
pub struct MollifiedKernel {
    spec: Arc<PdeSpec>,
    mollifier: Mollifier,
    eps: f64,
    nodes: usize,
    variant: Variant,
}

impl MollifiedKernel {
    pub fn new(spec: PdeSpec, mollifier: Mollifier, eps: f64) -> Result<Self> {
        validate(&spec, &mollifier, eps)?;
        Ok(Self { spec: Arc::new(spec), mollifier, eps, nodes: QUADRATURE_NODES, variant: Variant::Polynomial })
    }

    pub fn spec(&self) -> &PdeSpec {
        &self.spec
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `σ_ε(t, x, x', ξ)`.
    pub fn sigma(&self, t: f64, x: f64, xp: f64, xi: f64) -> f64 {
        match self.variant {
            Variant::Polynomial => {
                let rule = Rule::new(self.nodes);
                sigma_at(&self.spec, &self.mollifier, self.eps, &rule, t, xi, x, xp)
            }
            Variant::Gaussian => gaussian_sigma(&self.spec, self.eps, t, x, xp, xi),
        }
    }

    pub fn kernel(&self) -> InteractionKernel {
        let spec = Arc::clone(&self.spec);
        let metric = spec.domain().metric();
        let eps = self.eps;
        let reg = Regularity::default();
        match self.variant {
            Variant::Polynomial => {
                let m = self.mollifier.clone();
                let rule = Rule::new(self.nodes);
                InteractionKernel::new("mollified_pde", 1, metric, reg, move |t, x, xp, xi, xip, out| {
                    out[0] = sigma_at(&spec, &m, eps, &rule, t, xi[0], x, xp) * xip[0];
                })
            }
            Variant::Gaussian => InteractionKernel::new("gaussian_pde", 1, metric, reg, move |t, x, xp, xi, xip, out| {
                out[0] = gaussian_sigma(&spec, eps, t, x, xp, xi[0]) * xip[0];
            }),
        }
    }
}

/// Probabilists' Hermite polynomial `He_n(s)`.
pub fn hermite(n: usize, s: f64) -> f64 {
    let (mut a, mut b) = (1.0, s);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = s * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// `∂_{x'}^l g(x − x') = ε^{−l/2} He_l(u/√ε) g(u)` with `u = x − x'` and
/// `g(u) = e^{−u²/2ε} / (πε)^{1/2}`.
pub fn gaussian_derivative(l: usize, eps: f64, u: f64) -> f64 {
    let g = (-u * u / (2.0 * eps)).exp() / (std::f64::consts::PI * eps).sqrt();
    eps.powf(-(l as f64) / 2.0) * hermite(l, u / eps.sqrt()) * g
}

fn gaussian_sigma(spec: &PdeSpec, eps: f64, t: f64, x: f64, xp: f64, xi: f64) -> f64 {
    (0..=spec.order())
        .filter(|&l| !spec.coeff(l).is_zero())
        .map(|l| spec.coeff_at(l, t, x, xi) * gaussian_derivative(l, eps, x - xp))
        .sum()
}

/// Gaussian variant; needs an interval-domain spec (whose higher coefficients
/// vanish at the boundary).
pub fn gaussian_pde_kernel(spec: PdeSpec, eps: f64) -> Result<MollifiedKernel> {
    if spec.domain() != Domain::Interval {
        return invalid("the Gaussian kernel needs the interval domain");
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("ε must be positive, got {eps}"));
    }
    let mollifier = Mollifier::for_order(spec.order())?;
    Ok(MollifiedKernel { spec: Arc::new(spec), mollifier, eps, nodes: QUADRATURE_NODES, variant: Variant::Gaussian })
}
