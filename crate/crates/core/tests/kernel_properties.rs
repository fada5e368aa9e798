use mflab_core::kernels::{cucker_smale_kernel, hamiltonian_pair_kernel, lipschitz_estimate, opinion_kernel};
use mflab_core::{BoundBox, Metric};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= 1e-14 * u.abs().max(v.abs()).max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn opinion_matches_formula(a in 0.0..2.0f64, b in 0.0..2.0f64, x in 0.0..1.0f64, xp in 0.0..1.0f64,
                               xi in prop::collection::vec(-3.0..3.0f64, 2), xip in prop::collection::vec(-3.0..3.0f64, 2)) {
        let k = opinion_kernel(move |x, xp| a + b * x * xp, 2, Metric::Interval);
        let s = a + b * x * xp;
        let want = [s * (xip[0] - xi[0]), s * (xip[1] - xi[1])];
        prop_assert!(close(&k.eval(0.3, x, xp, &xi, &xip), &want));
        prop_assert_eq!(k.eval(0.3, x, xp, &xi, &xi), vec![0.0, 0.0]);
    }

    #[test]
    fn cucker_smale_matches_formula(x in 0.0..1.0f64, xp in 0.0..1.0f64,
                                    z in prop::collection::vec(-3.0..3.0f64, 4), zp in prop::collection::vec(-3.0..3.0f64, 4)) {
        let k = cucker_smale_kernel(|r| 1.0 / (1.0 + r * r), 2, Metric::Interval);
        let r2 = (z[0] - zp[0]).powi(2) + (z[1] - zp[1]).powi(2);
        let w = 1.0 / (1.0 + r2);
        let want = [z[2], z[3], w * (zp[2] - z[2]), w * (zp[3] - z[3])];
        prop_assert!(close(&k.eval(0.0, x, xp, &z, &zp), &want));
    }

    #[test]
    fn hamiltonian_matches_formula(z in prop::collection::vec(-3.0..3.0f64, 2), zp in prop::collection::vec(-3.0..3.0f64, 2)) {
        // h1 = (q² + p²)/2, h(a, b) = (a_q − b_q)²/2 + a_p b_p
        let k = hamiltonian_pair_kernel(
            |z, g| { g[0] = z[0]; g[1] = z[1]; },
            |a, b, g| { g[0] = a[0] - b[0]; g[1] = b[1]; g[2] = b[0] - a[0]; g[3] = a[1]; },
            1,
            Metric::Interval,
        );
        let (q, p, qp, pp) = (z[0], z[1], zp[0], zp[1]);
        let want = [p + pp, qp - 2.0 * q];
        prop_assert!(close(&k.eval(0.0, 0.2, 0.7, &z, &zp), &want));
    }

    /// For multilinear σ the Jacobian norm peaks at box corners, which every
    /// estimate samples, so nesting boxes cannot lower the estimate.
    #[test]
    fn lipschitz_estimate_grows_with_the_box(a in 0.0..2.0f64, b in -1.0..1.0f64, c in 0.0..1.0f64,
                                              lo in -1.0..0.0f64, w in 0.1..1.0f64, grow in 0.0..1.0f64,
                                              seed in 0u64..1000) {
        let k = opinion_kernel(move |x, xp| a + c * (x + xp) + b * x * xp, 1, Metric::Interval);
        let small = BoundBox::new((0.2, 0.6), vec![(lo, lo + w)], (0.0, 1.0)).unwrap();
        let big = BoundBox::new((0.2 - 0.2 * grow, 0.6 + 0.4 * grow), vec![(lo - grow, lo + w + grow)], (0.0, 1.0)).unwrap();
        let ls = lipschitz_estimate(&k, &small, 32, seed).unwrap();
        let lb = lipschitz_estimate(&k, &big, 32, seed).unwrap();
        prop_assert!(lb >= ls * (1.0 - 1e-9), "{lb} < {ls}");
    }
}
