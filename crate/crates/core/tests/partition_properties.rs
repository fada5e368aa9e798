use mflab_core::wasserstein::w1_line;
use mflab_core::{Metric, TagRule, TaggedPartition};
use proptest::prelude::*;

const SURROGATE: usize = 4096;

fn lebesgue() -> Vec<(f64, f64)> {
    (0..SURROGATE).map(|a| ((a as f64 + 0.5) / SURROGATE as f64, 1.0 / SURROGATE as f64)).collect()
}

#[test]
fn tag_empirical_measure_converges_at_rate_one_over_n() {
    let leb = lebesgue();
    for rule in [TagRule::Left, TagRule::Midpoint] {
        for n in 1..=64 {
            let p = TaggedPartition::uniform(n, rule, Metric::Interval).unwrap();
            let emp: Vec<(f64, f64)> = p.tags().iter().map(|&x| (x, 1.0 / n as f64)).collect();
            let d = w1_line(&leb, &emp).unwrap();
            // the surrogate itself is within 1/(4M) of Lebesgue
            assert!(d <= p.c_omega() / n as f64 + 0.25 / SURROGATE as f64, "{rule:?} N={n}: {d}");
        }
    }
}

proptest! {
    #[test]
    fn riemann_error_is_bounded_by_lipschitz_constant(
        a in -3.0..3.0f64, b in 0.5..20.0f64, c in -2.0..2.0f64, n in 1usize..200, left in any::<bool>(), torus in any::<bool>()
    ) {
        let rule = if left { TagRule::Left } else { TagRule::Midpoint };
        let metric = if torus { Metric::Torus } else { Metric::Interval };
        let p = TaggedPartition::uniform(n, rule, metric).unwrap();
        let f = |x: f64| a * (b * x).sin() + c * x;
        let exact = a * (1.0 - b.cos()) / b + 0.5 * c;
        let lip = (a * b).abs() + c.abs();
        let err = (p.riemann_sum(f) - exact).abs();
        prop_assert!(err <= p.c_omega() / n as f64 * lip + 1e-12, "{err}");
    }
}
