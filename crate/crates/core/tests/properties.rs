//! Property tests over random inputs.

mod common;

use common::diagonal_triple;
use dysenv::envelope::{env_gradient, env_value, equivalence_check};
use dysenv::fd::fd_gradient;
use dysenv::linalg::vec_ops;
use dysenv::registry::make_json;
use dysenv::splitting::reduction_check;
use dysenv::*;
use proptest::prelude::*;
use serde_json::json;

fn small_entry() -> impl Strategy<Value = f64> {
    (-2i32..=2).prop_map(f64::from)
}

fn square(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |v| Mat::from_row_major(n, n, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solve_has_small_residual(m in square(4), b in prop::collection::vec(-5.0f64..5.0, 4)) {
        // diagonal shift keeps the system well conditioned
        let a = m.add_diag(5.0);
        let x = solve_linear(&a, &b).unwrap();
        let r = vec_ops::sub(&a.mul_vec(&x), &b);
        prop_assert!(vec_ops::norm(&r) <= 1e-12 * (1.0 + vec_ops::norm(&b)));
    }

    #[test]
    fn eigen_2x2_matches_characteristic_polynomial(a in small_entry(), b in small_entry(), d in small_entry()) {
        let m = Mat::from_rows(&[vec![a, b], vec![b, d]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        // roots of l^2 - (a + d) l + (ad - b^2)
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        let (lo, hi) = ((tr - disc) / 2.0, (tr + disc) / 2.0);
        prop_assert!((e.values[0] - lo).abs() < 1e-12);
        prop_assert!((e.values[1] - hi).abs() < 1e-12);
        for l in &e.values {
            prop_assert!((l * l - tr * l + (a * d - b * b)).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_reconstructs(m in square(5)) {
        let s = m.symmetrize();
        let e = sym_eigen(&s).unwrap();
        let back = e.vectors.matmul(&Mat::from_diag(&e.values)).matmul(&e.vectors.transpose());
        prop_assert!(back.max_abs_diff(&s) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reductions_agree(
        df in prop::collection::vec(-0.5f64..2.0, 2),
        dg in prop::collection::vec(0.0f64..2.0, 2),
        dh in prop::collection::vec(0.0f64..2.0, 2),
        z in prop::collection::vec(-3.0f64..3.0, 2),
        pattern in 0usize..4,
        alpha in 0.1f64..1.5,
    ) {
        let zero = [0.0, 0.0];
        let (df, dg, dh) = match pattern {
            0 => (&df[..], &dg[..], &zero[..]),
            1 => (&df[..], &zero[..], &dh[..]),
            2 => (&zero[..], &dg[..], &dh[..]),
            _ => (&zero[..], &zero[..], &dh[..]),
        };
        let bf = if pattern >= 2 { [0.0, 0.0] } else { [0.3, -0.1] };
        let p = diagonal_triple(df, &bf, dg, dh);
        let params = SplitParams::new(0.3, alpha);
        let r = reduction_check(&p, &params, &z).unwrap();
        prop_assert!(r.max_deviation <= 1e-12, "{r:?}");
    }

    #[test]
    fn envelope_gradient_matches_fd(seed in 0u64..1000, z in prop::collection::vec(-2.0f64..2.0, 3)) {
        let p = make_json("quadratic", json!({"seed": seed, "n": 3})).unwrap();
        let gamma = 0.5 * p.gamma_limit().finite().unwrap();
        let params = SplitParams::new(gamma, 0.7);
        let g = env_gradient(&p, &params, &z).unwrap();
        let fd = fd_gradient(|y| env_value(&p, &params, y).unwrap(), &z, None).unwrap();
        prop_assert!(vec_ops::dist(&g, &fd) <= 1e-5 * (1.0 + vec_ops::norm(&g)));
        let eq = equivalence_check(&p, &params, &z).unwrap();
        prop_assert!(eq.deviation <= 1e-9 * (1.0 + vec_ops::norm(&z)));
    }

    #[test]
    fn prox_is_lipschitz_with_weak_convexity_constant(
        d in prop::collection::vec(-1.0f64..1.0, 2),
        z1 in prop::collection::vec(-3.0f64..3.0, 2),
        z2 in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let beta = d.iter().fold(0.0_f64, |m, v| m.max(-v));
        let xi = ProxableFn::new(common::quad(&d, &[0.0, 0.0]), beta);
        let gamma = 0.5;
        let p1 = prox(&xi, gamma, &z1).unwrap().point;
        let p2 = prox(&xi, gamma, &z2).unwrap().point;
        let bound = 1.0 / (1.0 - gamma * beta);
        prop_assert!(vec_ops::dist(&p1, &p2) <= bound * vec_ops::dist(&z1, &z2) + 1e-12);
    }
}
