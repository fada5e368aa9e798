//! Periodic grid helpers on `x_k = k/M`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Signed wavenumber of FFT bin `k` on `m` points.
pub(crate) fn wavenumber(k: usize, m: usize) -> f64 {
    if k <= m / 2 {
        k as f64
    } else {
        k as f64 - m as f64
    }
}

/// Unnormalized forward DFT.
pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse of [`forward`], real part.
pub(crate) fn inverse(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let m = coeffs.len();
    FftPlanner::new().plan_fft_inverse(m).process(&mut coeffs);
    coeffs.iter().map(|c| c.re / m as f64).collect()
}

/// `(2πik)^l`, with the Nyquist bin dropped for odd `l`.
pub(crate) fn symbol(k: usize, m: usize, l: usize) -> Complex64 {
    if l % 2 == 1 && m % 2 == 0 && k == m / 2 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, 2.0 * std::f64::consts::PI * wavenumber(k, m)).powi(l as i32)
}

/// Spectral `l`-th derivative of periodic grid data.
pub(crate) fn derivative(values: &[f64], l: usize) -> Vec<f64> {
    if l == 0 {
        return values.to_vec();
    }
    let m = values.len();
    let mut c = forward(values);
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= symbol(k, m, l);
    }
    inverse(c)
}

/// Trigonometric interpolant of grid data, evaluated anywhere on the circle.
#[derive(Debug, Clone)]
pub struct FineSolution {
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
    time: f64,
}

impl FineSolution {
    pub(crate) fn new(values: Vec<f64>, time: f64) -> Self {
        let m = values.len();
        let coeffs = forward(&values).into_iter().map(|c| c / m as f64).collect();
        Self { values, coeffs, time }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Values on `x_k = k/M`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Vec<f64> {
        let m = self.len();
        (0..m).map(|k| k as f64 / m as f64).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.len();
        let tau = 2.0 * std::f64::consts::PI;
        let mut s = self.coeffs[0].re;
        for k in 1..m.div_ceil(2) {
            let c = self.coeffs[k];
            let (sn, cs) = (tau * k as f64 * x).sin_cos();
            s += 2.0 * (c.re * cs - c.im * sn);
        }
        if m % 2 == 0 && m > 1 {
            s += self.coeffs[m / 2].re * (std::f64::consts::PI * m as f64 * x).cos();
        }
        s
    }
}
