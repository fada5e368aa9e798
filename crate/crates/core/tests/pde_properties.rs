use std::f64::consts::PI;

use mflab_core::pde::{apply_a_eps, grid_inner, parse_pde, Mollifier};
use proptest::prelude::*;

const M: usize = 2048;

fn grid() -> Vec<f64> {
    (0..M).map(|k| k as f64 / M as f64).collect()
}

/// `∂^l sin(ωx) = ω^l sin(ωx + lπ/2)`.
fn dsin(l: u32, w: f64, x: f64) -> f64 {
    w.powi(l as i32) * (w * x + l as f64 * PI / 2.0).sin()
}

/// Pairs of (pde text, exact `A f` for `f = sin(ωx)`).
fn cases() -> Vec<(&'static str, Box<dyn Fn(f64, f64) -> f64>)> {
    vec![
        ("dt y = dx^2 y", Box::new(|w, x| dsin(2, w, x))),
        ("dt y = -1 * dx^1 y", Box::new(|w, x| -dsin(1, w, x))),
        ("dt y = 0.5 * dx^2 y + dx^1 y - y", Box::new(|w, x| 0.5 * dsin(2, w, x) + dsin(1, w, x) - dsin(0, w, x))),
        ("dt y = sin(2*pi*x) * dx^1 y", Box::new(|w, x| (2.0 * PI * x).sin() * dsin(1, w, x))),
    ]
}

#[test]
fn consistency_error_over_eps_does_not_grow() {
    let xs = grid();
    for (text, exact) in cases() {
        let spec = parse_pde(text).unwrap();
        let moll = Mollifier::for_order(spec.order()).unwrap();
        for w in [2.0 * PI, 4.0 * PI] {
            let f: Vec<f64> = xs.iter().map(|&x| (w * x).sin()).collect();
            let want: Vec<f64> = xs.iter().map(|&x| exact(w, x)).collect();
            let mut prev: Option<f64> = None;
            for eps in [0.2, 0.1, 0.05, 0.025] {
                let got = apply_a_eps(&spec, &moll, eps, 0.0, &f).unwrap();
                let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let ratio = err / eps;
                if let Some(p) = prev {
                    assert!(ratio <= 1.1 * p, "{text}, ω={w:.2}, ε={eps}: {ratio} after {p}");
                }
                prev = Some(ratio);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mollified_heat_operator_is_dissipative(coeffs in prop::collection::vec(-1.0..1.0f64, 8), eps in 0.02..0.2f64, nu in 0.1..2.0f64) {
        let spec = parse_pde(&format!("dt y = {nu} * dx^2 y")).unwrap();
        let moll = Mollifier::for_order(2).unwrap();
        let f: Vec<f64> = grid()
            .iter()
            .map(|&x| coeffs.chunks(2).enumerate().map(|(k, c)| {
                let w = 2.0 * PI * (k + 1) as f64;
                c[0] * (w * x).sin() + c[1] * (w * x).cos()
            }).sum())
            .collect();
        let af = apply_a_eps(&spec, &moll, eps, 0.0, &f).unwrap();
        prop_assert!(grid_inner(&af, &f) <= 1e-8);
    }
}
