use mflab_core::measures::{empirical, moments, monokinetic, semi_empirical, site_rate};
use mflab_core::kernels::opinion_kernel;
use mflab_core::ode::Scheme;
use mflab_core::particles::{cloud_state, integrate};
use mflab_core::quadrature::{gauss_legendre, integrate as gl_integrate};
use mflab_core::wasserstein::{l1nu_w1, w1};
use mflab_core::{ConditionalFamily, DiscreteMeasure, Metric, PartitionField, TagRule, TaggedPartition};
use proptest::prelude::*;

fn family(sites: Vec<f64>, cond: impl Fn(f64) -> Vec<(Vec<f64>, f64)>) -> ConditionalFamily {
    let n = sites.len();
    let conds = sites.iter().map(|&x| cond(x)).collect();
    ConditionalFamily::new(1, sites, vec![1.0 / n as f64; n], conds).unwrap()
}

fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

fn site_means(f: &ConditionalFamily) -> DiscreteMeasure {
    let r = moments(f, 2).unwrap();
    DiscreteMeasure::from_pairs(1, f.sites(), &r.means, f.site_weights().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Jensen per site, then the trivial coupling site by site.
    #[test]
    fn first_moment_is_controlled_by_l1nu_w1(sites in prop::collection::vec(0.0..1.0f64, 1..4),
                                             a in prop::collection::vec((-1.0..1.0f64, 0.1..1.0f64), 9),
                                             b in prop::collection::vec((-1.0..1.0f64, 0.1..1.0f64), 9)) {
        let pick = |v: &[(f64, f64)], i: usize| -> Vec<(Vec<f64>, f64)> {
            let w: f64 = v[3 * i..3 * i + 3].iter().map(|p| p.1).sum();
            v[3 * i..3 * i + 3].iter().map(|&(x, m)| (vec![x], m / w)).collect()
        };
        let n = sites.len();
        let fa = ConditionalFamily::new(1, sites.clone(), vec![1.0 / n as f64; n], (0..n).map(|i| pick(&a, i)).collect()).unwrap();
        let fb = ConditionalFamily::new(1, sites.clone(), vec![1.0 / n as f64; n], (0..n).map(|i| pick(&b, i)).collect()).unwrap();
        let (ma, mb) = (moments(&fa, 2).unwrap().means, moments(&fb, 2).unwrap().means);
        let l1: f64 = (0..n).map(|i| (ma[i] - mb[i]).abs() / n as f64).sum();
        let means = w1(&site_means(&fa), &site_means(&fb), Metric::Interval).unwrap();
        prop_assert!(means <= l1 + 1e-12);
        prop_assert!(l1 <= l1nu_w1(&fa, &fb).unwrap() + 1e-12);
    }

    #[test]
    fn semi_empirical_measure_converges(alpha in -1.0..1.0f64, beta in -1.0..1.0f64, n in 1usize..=4) {
        let cond = move |x: f64| vec![(vec![alpha * x], 0.5), (vec![(alpha + beta) * x + 0.5], 0.5)];
        let lip = 0.5 * (alpha.abs() + (alpha + beta).abs());
        let se = semi_empirical(&family(midpoints(n), cond)).unwrap();
        let reference = family(midpoints(64 * n), cond).to_measure().unwrap();
        let d = w1(&se, &reference, Metric::Interval).unwrap();
        prop_assert!(d <= 1.1 * (lip + 1.0) / n as f64, "N={n}: {d}");
    }

    #[test]
    fn monokinetic_discrepancy_is_order_one_over_n(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -1.0..1.0f64,
                                                   d in -0.5..0.5f64, n in 4usize..=256, left in any::<bool>()) {
        let y = move |x: f64| c * x + d * (2.0 * std::f64::consts::PI * x).sin();
        let f = move |x: f64, v: f64| (a * x + b * v).sin();
        let lip = a.abs() + b.abs() * (c.abs() + 2.0 * std::f64::consts::PI * d.abs());
        let rule = if left { TagRule::Left } else { TagRule::Midpoint };
        let p = TaggedPartition::uniform(n, rule, Metric::Interval).unwrap();
        let field = PartitionField::from_fn(p.clone(), 1, |x| vec![y(x)]).unwrap();
        let mu = monokinetic(&p, &field).unwrap();
        let pairing: f64 = (0..mu.len()).map(|k| mu.weights()[k] * f(mu.x(k, 0), mu.xi(k, 0)[0])).sum();
        let (nodes, weights) = gauss_legendre(32);
        let exact: f64 = (0..16).map(|j| gl_integrate(|x| f(x, y(x)), j as f64 / 16.0, (j + 1) as f64 / 16.0, &nodes, &weights)).sum();
        prop_assert!((pairing - exact).abs() <= p.c_omega() * lip / n as f64 + 1e-12);
    }
}

/// Mixing across nearby sites is cheap for the full measures but not for the means.
#[test]
fn first_moment_does_not_contract_plain_w1() {
    let delta = 0.01;
    let sites = vec![0.0, delta];
    let spread = vec![(vec![-1.0], 0.5), (vec![1.0], 0.5)];
    let fa = ConditionalFamily::new(1, sites.clone(), vec![0.5, 0.5], vec![spread.clone(), spread]).unwrap();
    let fb = ConditionalFamily::new(1, sites, vec![0.5, 0.5], vec![vec![(vec![-1.0], 1.0)], vec![(vec![1.0], 1.0)]]).unwrap();
    let full = w1(&fa.to_measure().unwrap(), &fb.to_measure().unwrap(), Metric::Interval).unwrap();
    let means = w1(&site_means(&fa), &site_means(&fb), Metric::Interval).unwrap();
    assert!((full - delta / 2.0).abs() < 1e-12);
    assert!(means >= 1.0);
}

#[test]
fn empirical_measure_has_uniform_weights() {
    let p = TaggedPartition::uniform(5, TagRule::Left, Metric::Interval).unwrap();
    let s = mflab_core::ParticleState::on_partition(&p, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let m = empirical(&s);
    assert_eq!(m.len(), 5);
    assert!(m.weights().iter().all(|&w| (w - 0.2).abs() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn temperature_decays_at_twice_the_site_rate(a in 0.1..1.0f64, b in 0.0..1.0f64, seed in 0u64..500) {
        let sigma = move |x: f64, xp: f64| a + b * x * xp;
        let p = TaggedPartition::uniform(6, TagRule::Midpoint, Metric::Interval).unwrap();
        let samples: Vec<Vec<Vec<f64>>> = (0..6)
            .map(|i| (0..4).map(|l| vec![((seed + 3) as f64 * (0.9 * i as f64 + 1.7 * l as f64 + 0.3)).cos()]).collect())
            .collect();
        let s0 = cloud_state(&p, 1, &samples).unwrap();
        let st = integrate(&opinion_kernel(sigma, 1, Metric::Interval), &s0, 1.0, 1e-3, Scheme::Rk4).unwrap().final_state();
        let t0 = moments(&ConditionalFamily::from_state(&s0).unwrap(), 2).unwrap().temperature;
        let t1 = moments(&ConditionalFamily::from_state(&st).unwrap(), 2).unwrap().temperature;
        let rates = site_rate(sigma, &p).unwrap();
        for i in 0..6 {
            let want = t0[i] * (-2.0 * rates[i]).exp();
            prop_assert!((t1[i] - want).abs() <= 1e-5 * want, "site {}: {} vs {}", i, t1[i], want);
        }
    }
}
