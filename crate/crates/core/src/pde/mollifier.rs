//! Polynomial mollifiers `η_q(x) = c_q (1 − x²)^q` on `[−1, 1]`.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    q: usize,
    c_q: f64,
    /// `polys[l]` holds the ascending coefficients of `η^{(l)}` for `l < q`.
    polys: Vec<Vec<f64>>,
}

/// `η_q` with `c_q = Γ(q + 3/2) / (√π Γ(q + 1))`.
pub fn polynomial_mollifier(q: usize) -> Result<Mollifier> {
    if q == 0 {
        return invalid("mollifier exponent q must be at least 1");
    }
    // Γ(q+3/2)/(√π q!) = (1/2) Π_{k=1..q} (2k+1)/(2k)
    let c_q = (1..=q).fold(0.5, |c, k| c * (2 * k + 1) as f64 / (2 * k) as f64);
    let mut base = vec![0.0; 2 * q + 1];
    let mut binom = 1.0;
    for k in 0..=q {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        base[2 * k] = c_q * sign * binom;
        binom = binom * (q - k) as f64 / (k + 1) as f64;
    }
    let mut polys = vec![base];
    for _ in 1..q {
        let prev = polys.last().unwrap();
        let d: Vec<f64> = prev.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        polys.push(d);
    }
    Ok(Mollifier { q, c_q, polys })
}

impl Mollifier {
    /// Mollifier with the default exponent `q = p + 2` for an order-`p` operator.
    pub fn for_order(p: usize) -> Result<Self> {
        polynomial_mollifier(p + 2)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn normalizer(&self) -> f64 {
        self.c_q
    }

    /// Highest derivative order with a closed-form evaluator.
    pub fn max_derivative(&self) -> usize {
        self.q - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `η^{(l)}(x)`, zero outside `(−1, 1)`.
    pub fn derivative(&self, l: usize, x: f64) -> f64 {
        assert!(l < self.q, "derivative order {l} needs q > {l}");
        if x.abs() >= 1.0 {
            return 0.0;
        }
        self.polys[l].iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `η_ε(x) = η(x/ε)/ε`.
    pub fn scaled(&self, eps: f64, x: f64) -> f64 {
        self.value(x / eps) / eps
    }

    /// `D^l η_ε(x) = η^{(l)}(x/ε)/ε^{l+1}`.
    pub fn scaled_derivative(&self, l: usize, eps: f64, x: f64) -> f64 {
        self.derivative(l, x / eps) / eps.powi(l as i32 + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, integrate};

    #[test]
    fn normalization() {
        let m = polynomial_mollifier(1).unwrap();
        assert_eq!(m.normalizer(), 0.75);
        assert_eq!(m.value(0.0), 0.75);
        let (n, w) = gauss_legendre(64);
        for q in 1..=8 {
            let m = polynomial_mollifier(q).unwrap();
            // ∫(1 − x²)^q = 2·(2q)!!/(2q+1)!! independently of c_q
            let raw = (1..=q).fold(2.0, |a, k| a * (2 * k) as f64 / (2 * k + 1) as f64);
            assert!((m.normalizer() * raw - 1.0).abs() < 1e-14);
            assert!((integrate(|x| m.value(x), -1.0, 1.0, &n, &w) - 1.0).abs() < 1e-10);
            let e = 0.1;
            assert!((integrate(|x| m.scaled(e, x), -e, e, &n, &w) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetry_and_support() {
        let m = polynomial_mollifier(4).unwrap();
        assert_eq!(m.derivative(1, 0.0), 0.0);
        for x in [0.1, 0.5, 0.93] {
            assert!((m.value(x) - m.value(-x)).abs() < 1e-15);
            assert!((m.derivative(1, x) + m.derivative(1, -x)).abs() < 1e-14);
        }
        assert_eq!(m.value(1.0), 0.0);
        assert_eq!(m.value(-1.2), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for q in 2..=6 {
            let m = polynomial_mollifier(q).unwrap();
            for l in 1..q {
                for k in 0..41 {
                    let x = -0.95 + 1.9 * k as f64 / 40.0;
                    let fd = (m.derivative(l - 1, x + h) - m.derivative(l - 1, x - h)) / (2.0 * h);
                    let exact = m.derivative(l, x);
                    let scale = (0..=l).map(|j| m.derivative(j, 0.0).abs()).fold(1.0, f64::max);
                    assert!((fd - exact).abs() <= 1e-6 * scale, "q={q} l={l} x={x}: {fd} vs {exact}");
                }
            }
        }
    }
}
