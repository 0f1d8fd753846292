//! Closed forms and hand-derived values checked against oracles written
//! independently of the library code.

mod common;

use std::sync::Arc;

use common::{diagonal_triple, grid_prox, max_abs_diff, quad};
use dysenv::analysis::{alpha1, alpha2, diffeo_probe, jacobian_t};
use dysenv::envelope::{env_hessian_at_critical, env_value, evaluate, metric_at};
use dysenv::fd::{fd_gradient, fd_jacobian, try_fd_hessian};
use dysenv::functions::{L1Norm, QuarticWell, Shifted};
use dysenv::moreau::{envelope_value, prox_lipschitz_probe};
use dysenv::*;

#[test]
fn quadratic_prox_matches_grid() {
    let cases: [(&[f64], &[f64], f64, &[f64]); 3] = [
        (&[1.0], &[0.0], 1.0, &[2.0]),
        (&[3.0, 0.5], &[1.0, -2.0], 0.4, &[0.3, -1.2]),
        (&[1.0, 2.0, 0.25], &[0.0, 0.5, -0.5], 0.7, &[1.0, -1.0, 2.0]),
    ];
    for (d, b, gamma, z) in cases {
        let q = quad(d, b);
        let xi = ProxableFn::new(q, 0.0);
        let got = prox(&xi, gamma, z).unwrap().point;
        let oracle = grid_prox(
            |u| {
                u.iter()
                    .zip(d)
                    .zip(b)
                    .map(|((u, d), b)| 0.5 * d * u * u + b * u)
                    .sum()
            },
            gamma,
            z,
            4.0,
        );
        assert!(max_abs_diff(&got, &oracle) < 1e-5, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn soft_threshold_matches_grid() {
    let xi = ProxableFn::new(L1Norm::new(3, 0.7).unwrap(), 0.0);
    for z in [[1.5, -0.2, 0.69], [-3.0, 0.0, 0.71]] {
        let got = prox(&xi, 1.0, &z).unwrap().point;
        let oracle = grid_prox(
            |u| 0.7 * u.iter().map(|v| v.abs()).sum::<f64>(),
            1.0,
            &z,
            4.0,
        );
        assert!(max_abs_diff(&got, &oracle) < 1e-5, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn shifted_prox_matches_grid() {
    // (1/2)||x||^2 shifted by -0.5 is weakly convex with beta = 0 here; use -1.5.
    let inner = Arc::new(quad(&[1.0, 1.0], &[0.0, 0.0]));
    let xi = ProxableFn::new(Shifted::new(inner, -1.5), 0.5);
    let z = [1.0, -0.5];
    let got = prox(&xi, 1.0, &z).unwrap().point;
    let oracle = grid_prox(|u| -0.25 * (u[0] * u[0] + u[1] * u[1]), 1.0, &z, 8.0);
    assert!(max_abs_diff(&got, &oracle) < 1e-5, "{got:?} vs {oracle:?}");
    assert!(max_abs_diff(&got, &[2.0, -1.0]) < 1e-12);
}

#[test]
fn newton_prox_matches_grid_on_quartic() {
    // (1/4)(||x||^2 - 1)^2 - type well, no closed form
    let well = QuarticWell::new(2, 1.0).unwrap();
    let f = well.clone();
    let beta = 1.0;
    let xi = ProxableFn::new(well, beta);
    for z in [[0.1, 0.2], [1.5, -0.7], [-0.05, 0.0]] {
        let got = prox(&xi, 0.5, &z).unwrap().point;
        let oracle = grid_prox(|u| f.value(u).finite().unwrap(), 0.5, &z, 4.0);
        assert!(max_abs_diff(&got, &oracle) < 1e-5, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn moreau_examples() {
    let sq = ProxableFn::new(quad(&[1.0, 1.0], &[0.0, 0.0]), 0.0);
    let r = prox(&sq, 1.0, &[2.0, 0.0]).unwrap();
    assert!(max_abs_diff(&r.point, &[1.0, 0.0]) < 1e-12);
    assert!((r.envelope_value - 1.0).abs() < 1e-12);
    assert!(max_abs_diff(&r.envelope_gradient, &[1.0, 0.0]) < 1e-12);
    let fd = fd_gradient(
        |z| envelope_value(&sq, 1.0, z).unwrap().finite().unwrap(),
        &[2.0, 0.0],
        None,
    )
    .unwrap();
    assert!(max_abs_diff(&fd, &r.envelope_gradient) < 1e-5);

    let concave = ProxableFn::new(quad(&[-0.5], &[0.0]), 0.5);
    let r = prox(&concave, 1.0, &[1.0]).unwrap();
    assert!((r.point[0] - 2.0).abs() < 1e-12);

    assert!(prox_lipschitz_probe(&sq, 1.0, 200, 3.0, 1).unwrap() <= 0.5 + 1e-6);
    let ratio = prox_lipschitz_probe(&concave, 1.0, 200, 3.0, 1).unwrap();
    assert!(ratio <= 2.0 + 1e-6 && ratio > 2.0 - 1e-6);
}

#[test]
fn fd_examples() {
    let g = fd_gradient(|x| x[0].powi(3), &[1.0], Some(1e-5)).unwrap();
    assert!((g[0] - 3.0).abs() < 1e-9);
    let j = fd_jacobian(|x| vec![x[0] * x[0], x[0] * x[1]], &[1.0, 1.0], None).unwrap();
    let want = Mat::from_rows(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert!(j.max_abs_diff(&want) < 1e-5);
}

#[test]
fn dys_step_examples() {
    // GD: f = g = 0, h = (1/2)||.||^2
    let p = diagonal_triple(&[0.0], &[0.0], &[0.0], &[1.0]);
    let s = dys_step(&p, &SplitParams::new(0.5, 1.0), &[1.0]).unwrap();
    assert!((s.z_next[0] - 0.5).abs() < 1e-15);

    // DRS: f = (1/2)(x - 1)^2, g = (1/2)x^2
    let p = diagonal_triple(&[1.0], &[-1.0], &[1.0], &[0.0]);
    let s = dys_step(&p, &SplitParams::new(1.0, 1.0).with_mode(Mode::Drs), &[0.0]).unwrap();
    assert_eq!(s.proxg, vec![0.0]);
    assert_eq!(s.r, vec![0.0]);
    let oracle = grid_prox(|u| 0.5 * (u[0] - 1.0).powi(2), 1.0, &[0.0], 2.0);
    assert!((s.p[0] - oracle[0]).abs() < 1e-6);
    assert!((s.p[0] - 0.5).abs() < 1e-15 && (s.w[0] - 0.5).abs() < 1e-15);
    assert!((s.z_next[0] - 0.5).abs() < 1e-15);
}

#[test]
fn envelope_examples() {
    // h(z) - (gamma/2)||grad h(z)||^2 = 1/2 - 1/4
    let p = diagonal_triple(&[0.0], &[0.0], &[0.0], &[1.0]);
    let params = SplitParams::new(0.5, 1.0);
    assert!((env_value(&p, &params, &[1.0]).unwrap() - 0.25).abs() < 1e-15);
    let e = evaluate(&p, &params, &[1.0]).unwrap();
    assert!((e.gradient[0] - 0.5).abs() < 1e-15);
    assert!((e.metric.as_slice()[0] - 0.5).abs() < 1e-15);
    // d/dz of (1 - gamma) z^2 / 2
    let fd = fd_gradient(|z| 0.25 * z[0] * z[0], &[1.0], None).unwrap();
    assert!((e.gradient[0] - fd[0]).abs() < 1e-8);

    // g = (1/2)||.||^2: hess g^gamma = (1/gamma)(1 - 1/(1 + gamma)) = 2/3, A = 1 - 2 gamma (2/3)
    let p = diagonal_triple(&[0.0], &[0.0], &[1.0], &[0.0]);
    let a = metric_at(&p, 0.5, &[0.3]).unwrap();
    assert!((a.as_slice()[0] - 1.0 / 3.0).abs() < 1e-14);
    let moreau_g = |z: &[f64]| 0.5 * z[0] * z[0] / 1.5;
    let h = try_fd_hessian(|z| Ok(moreau_g(z)), &[0.3], None).unwrap();
    assert!((h.as_slice()[0] - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn envelope_hessian_at_saddle() {
    // f = (1/2) x^T diag(1, -1) x, g = h = 0: D (I + gamma D)^{-1} at gamma = 0.5
    let p = dysenv::registry::make_json("saddle_quadratic", serde_json::json!({})).unwrap();
    let params = SplitParams::new(0.5, 2.7);
    let h = env_hessian_at_critical(&p, &params, &[0.0, 0.0]).unwrap();
    let want = Mat::from_diag(&[2.0 / 3.0, -2.0]);
    assert!(h.max_abs_diff(&want) < 1e-12);
    let fd = try_fd_hessian(|z| env_value(&p, &params, z), &[0.0, 0.0], None).unwrap();
    assert!(fd.max_abs_diff(&want) < 1e-4);
}

#[test]
fn drs_envelope_hessian_matches_fd() {
    // f = (1/2)(x - 1)^2, g = (1/2)x^2, gamma = 0.5; critical z from x* = 1/2
    let p = diagonal_triple(&[1.0], &[-1.0], &[1.0], &[0.0]);
    let params = SplitParams::new(0.5, 1.0);
    let zstar = [0.5 + 0.5 * 0.5];
    let h = env_hessian_at_critical(&p, &params, &zstar).unwrap();
    let fd = try_fd_hessian(|z| env_value(&p, &params, z), &zstar, None).unwrap();
    assert!(h.max_abs_diff(&fd) < 1e-4, "{h:?} vs {fd:?}");
}

#[test]
fn step_bound_examples() {
    let rho = 0.9_f64 / 1.1;
    let want = 2.0 / (1.0 - rho * rho);
    assert!((alpha1(0.1, 1.0, 1.0).finite().unwrap() - want).abs() < 1e-12);
    assert!((want - 6.05).abs() < 1e-12);
    assert_eq!(alpha1(0.3, 0.0, 0.0), ExtReal::PosInf);
    assert!((alpha2(0.1, 1.0, 1.0, 1.0).finite().unwrap() - 5.5).abs() < 1e-12);
}

#[test]
fn jacobian_examples() {
    let p = diagonal_triple(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]);
    let params = SplitParams::new(0.5, 0.8);
    let j = jacobian_t(&p, &params, &[0.3, -2.0]).unwrap();
    assert!(j.max_abs_diff(&Mat::identity(2).scale(0.6)) < 1e-14);

    // saddle_quadratic FBS: J_T = diag(1 + alpha((1 + gamma d_i)^{-1} - 1))
    let p = dysenv::registry::make_json("saddle_quadratic", serde_json::json!({})).unwrap();
    let (gamma, d) = (0.5, [1.0, -1.0]);
    for alpha in [0.9 * 3.0, 1.5 * 3.0] {
        let params = SplitParams::new(gamma, alpha);
        let by_hand: Vec<f64> = d
            .iter()
            .map(|d| 1.0 + alpha * (1.0 / (1.0 + gamma * d) - 1.0))
            .collect();
        let lo = by_hand.iter().cloned().fold(f64::INFINITY, f64::min);
        let probe = diffeo_probe(&p, &params, &[0.0, 0.0]).unwrap();
        assert!((probe - lo).abs() < 1e-12);
        assert_eq!(probe > 0.0, alpha < 3.0);
    }
}
