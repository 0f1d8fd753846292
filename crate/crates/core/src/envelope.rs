//! The Davis-Yin envelope `phi^gamma`, its gradient, the variable metric
//! `A(z)`, and the envelope Hessian at critical points.
//!
//! With `x = prox_{gamma g}(z)`, `u = (z - x)/gamma`, `q = L^T grad h(Lx)` and
//! `s = z - 2 gamma u - gamma q`,
//!
//! ```text
//! phi^gamma(z) = g^gamma(z) - gamma ||u||^2 - gamma <q, u> + h(Lx)
//!                - (gamma/2) ||q||^2 + f^gamma(s)
//! ```
//!
//! `s` has Jacobian `A(z)`, so the chain rule gives
//! `grad phi^gamma(z) = -(1/gamma) A(z)^T w` with `w = prox_{gamma f}(s) - x`.
//! `A` is symmetric whenever `g = 0`, `h = 0`, or the two Hessians commute;
//! in general the transpose matters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, vec_ops, Lu, Mat, MAX_COND};
use crate::model::ProblemTriple;
use crate::moreau::prox_point;
use crate::splitting::{apply_t, dys_step, DysState, QEval, SplitParams};

/// Relative criticality tolerance for Hessian evaluation.
pub const CRITICAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub metric: Mat,
    /// Present only at critical points.
    pub hessian: Option<Mat>,
}

fn envelope_params(params: &SplitParams) -> SplitParams {
    SplitParams {
        q_eval: QEval::Prox,
        ..*params
    }
}

/// The six-term envelope, read off a step computed with `q` at the prox.
pub fn value_from_state(p: &ProblemTriple, gamma: f64, state: &DysState) -> Result<f64> {
    let x = &state.proxg;
    let zx = vec_ops::sub(&state.z, x);
    let u = vec_ops::scale(&zx, 1.0 / gamma);
    let s = state.prox_f_arg(gamma);
    let ps = vec_ops::sub(&state.p, &s);
    let fv = p.f.value(&state.p)?.expect_finite("f at prox_f")?;
    let value = p.g.value(x)? + vec_ops::dot(&zx, &zx) / (2.0 * gamma)
        - gamma * vec_ops::dot(&u, &u)
        - gamma * vec_ops::dot(&state.q, &u)
        + p.h.value(&p.l.apply(x))?
        - 0.5 * gamma * vec_ops::dot(&state.q, &state.q)
        + fv
        + vec_ops::dot(&ps, &ps) / (2.0 * gamma);
    if !value.is_finite() {
        return Err(Error::NonFiniteValue("envelope value".into()));
    }
    Ok(value)
}

/// `phi^gamma(z)`. Always uses `q` at `prox_{gamma g}(z)`, whatever
/// `params.q_eval` says.
pub fn env_value(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<f64> {
    let state = dys_step(p, &envelope_params(params), z)?;
    value_from_state(p, params.gamma, &state)
}

/// `(I + gamma hess g(x))^{-1}`, the Jacobian of `prox_{gamma g}`.
pub fn prox_g_jacobian(p: &ProblemTriple, gamma: f64, x: &[f64]) -> Result<Mat> {
    let n = p.n();
    if p.g.is_zero() {
        return Ok(Mat::identity(n));
    }
    p.g.hessian(x)?.scale(gamma).add_diag(1.0).inverse()
}

/// `L^T hess h(Lx) L`.
pub fn h_curvature(p: &ProblemTriple, x: &[f64]) -> Result<Mat> {
    if p.h.is_zero() {
        return Ok(Mat::zeros(p.n(), p.n()));
    }
    Ok(p.l.congruence(&p.h.hessian(&p.l.apply(x))?))
}

/// `A` at `z` given `x = prox_{gamma g}(z)`.
pub fn metric_at(p: &ProblemTriple, gamma: f64, x: &[f64]) -> Result<Mat> {
    let n = p.n();
    let b1 = prox_g_jacobian(p, gamma, x)?;
    // hess g^gamma = (I - B1)/gamma
    let hg_env = Mat::identity(n).sub(&b1).scale(1.0 / gamma);
    let hh = h_curvature(p, x)?;
    let id = Mat::identity(n);
    let a = id
        .sub(&hg_env.scale(2.0 * gamma))
        .sub(&hh.matmul(&id.sub(&hg_env.scale(gamma))).scale(gamma));
    check_metric(&a)?;
    Ok(a)
}

fn check_metric(a: &Mat) -> Result<()> {
    let cond = match Lu::factor(a) {
        Ok(lu) => lu.cond_inf().unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    if !(cond <= MAX_COND) {
        return Err(Error::MetricSingular(cond));
    }
    Ok(())
}

/// `A(z)`.
pub fn env_metric(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<Mat> {
    let x = prox_point(&p.g, params.gamma, z)?;
    metric_at(p, params.gamma, &x)
}

/// `grad phi^gamma(z) = -(1/gamma) A(z)^T (p(z) - prox_{gamma g}(z))`.
pub fn env_gradient(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<Vec<f64>> {
    let state = dys_step(p, &envelope_params(params), z)?;
    gradient_from_state(p, params.gamma, &state)
}

fn gradient_from_state(p: &ProblemTriple, gamma: f64, state: &DysState) -> Result<Vec<f64>> {
    let a = metric_at(p, gamma, &state.proxg)?;
    Ok(vec_ops::scale(&a.tr_mul_vec(&state.w), -1.0 / gamma))
}

/// The gradient assembled term by term from the six-term definition,
/// without factoring through `w`. Used as a cross-check of
/// [`env_gradient`].
pub fn gradient_by_terms(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<Vec<f64>> {
    let gamma = params.gamma;
    let n = p.n();
    let state = dys_step(p, &envelope_params(params), z)?;
    let x = &state.proxg;
    let u = vec_ops::scale(&vec_ops::sub(z, x), 1.0 / gamma);
    let q = &state.q;
    let s = state.prox_f_arg(gamma);
    // grad f^gamma(s)
    let gf_env = vec_ops::scale(&vec_ops::sub(&s, &state.p), 1.0 / gamma);

    let b1 = prox_g_jacobian(p, gamma, x)?;
    let du = Mat::identity(n).sub(&b1).scale(1.0 / gamma); // Jacobian of u
    let dx = Mat::identity(n).sub(&du.scale(gamma)); // Jacobian of x
    let dq = h_curvature(p, x)?.matmul(&dx); // Jacobian of q
    let ds = Mat::identity(n)
        .sub(&du.scale(2.0 * gamma))
        .sub(&dq.scale(gamma));

    let t_genv = u.clone();
    let t_unorm = vec_ops::scale(&du.tr_mul_vec(&u), -2.0 * gamma);
    let t_cross = vec_ops::scale(&vec_ops::add(&dq.tr_mul_vec(&u), &du.tr_mul_vec(q)), -gamma);
    let t_h = dx.tr_mul_vec(q);
    let t_qnorm = vec_ops::scale(&dq.tr_mul_vec(q), -gamma);
    let t_f = ds.tr_mul_vec(&gf_env);

    let mut g = vec![0.0; n];
    for t in [&t_genv, &t_unorm, &t_cross, &t_h, &t_qnorm, &t_f] {
        for (gi, ti) in g.iter_mut().zip(t.iter()) {
            *gi += ti;
        }
    }
    Ok(g)
}

fn critical_tol(z: &[f64]) -> f64 {
    CRITICAL_TOL * (1.0 + vec_ops::norm(z))
}

/// `grad^2 phi^gamma(z*) = -(1/gamma) A^T (I + gamma hess f(p))^{-1} A
///                         + (1/gamma) A^T (I + gamma hess g(x))^{-1}`
/// at a critical point `z*`.
pub fn env_hessian_at_critical(
    p: &ProblemTriple,
    params: &SplitParams,
    zstar: &[f64],
) -> Result<Mat> {
    let gamma = params.gamma;
    let state = dys_step(p, &envelope_params(params), zstar)?;
    let grad = gradient_from_state(p, gamma, &state)?;
    let gnorm = vec_ops::norm(&grad);
    let tol = critical_tol(zstar);
    if gnorm > tol {
        return Err(Error::NotCritical {
            grad_norm: gnorm,
            tol,
        });
    }
    hessian_from_state(p, gamma, &state)
}

fn hessian_from_state(p: &ProblemTriple, gamma: f64, state: &DysState) -> Result<Mat> {
    let hf = assumption_three(p, gamma, &state.p)?;
    let a = metric_at(p, gamma, &state.proxg)?;
    let b1 = prox_g_jacobian(p, gamma, &state.proxg)?;
    let b2 = hf.scale(gamma).add_diag(1.0).inverse()?;
    let at = a.transpose();
    let hess = at
        .matmul(&b1)
        .sub(&at.matmul(&b2).matmul(&a))
        .scale(1.0 / gamma);
    let asym = hess.asymmetry();
    if asym > 1e-8 * (1.0 + hess.max_abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(hess.symmetrize())
}

/// `hess f` at `x`, after checking it exists, respects the declared bound
/// `L_f`, and satisfies `gamma L_f < 1`.
pub fn assumption_three(p: &ProblemTriple, gamma: f64, x: &[f64]) -> Result<Mat> {
    if p.f.is_zero() {
        return Ok(Mat::zeros(p.n(), p.n()));
    }
    let hf = p.f.hessian(x).map_err(|e| {
        Error::AssumptionThreeViolated(format!("f is not twice differentiable at {x:?}: {e}"))
    })?;
    let norm = hf.spectral_norm()?;
    let bound = p.f.hessian_bound().unwrap_or(norm);
    if norm > bound * (1.0 + 1e-9) + 1e-9 {
        return Err(Error::AssumptionThreeViolated(format!(
            "||hess f|| = {norm} exceeds declared L_f = {bound}"
        )));
    }
    if gamma * bound >= 1.0 {
        return Err(Error::AssumptionThreeViolated(format!(
            "gamma = {gamma} is not below 1/L_f = {}",
            1.0 / bound
        )));
    }
    Ok(hf)
}

/// Value, gradient and metric, plus the Hessian if `z` is critical and the
/// Hessian exists there.
pub fn evaluate(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<EnvelopeEval> {
    let gamma = params.gamma;
    let state = dys_step(p, &envelope_params(params), z)?;
    let value = value_from_state(p, gamma, &state)?;
    let metric = metric_at(p, gamma, &state.proxg)?;
    let gradient = vec_ops::scale(&metric.tr_mul_vec(&state.w), -1.0 / gamma);
    let hessian = if vec_ops::norm(&gradient) <= critical_tol(z) {
        hessian_from_state(p, gamma, &state).ok()
    } else {
        None
    };
    Ok(EnvelopeEval {
        value,
        gradient,
        metric,
        hessian,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `||T(z) - (z - alpha gamma A^{-T} grad phi^gamma(z))||`.
    pub deviation: f64,
    /// Same with `A^{-1}` in place of `A^{-T}`; equal to `deviation` when
    /// `A` is symmetric.
    pub literal_deviation: f64,
    /// `||A - A^T||_max`.
    pub metric_asymmetry: f64,
}

/// Compares `T(z)` from the splitting with the variable-metric gradient step
/// on the envelope, the gradient being assembled term by term.
pub fn equivalence_check(
    p: &ProblemTriple,
    params: &SplitParams,
    z: &[f64],
) -> Result<EquivalenceReport> {
    let tz = apply_t(p, params, z)?;
    let grad = gradient_by_terms(p, params, z)?;
    let a = env_metric(p, params, z)?;
    let step = params.alpha * params.gamma;
    let via = |m: &Mat| -> Result<f64> {
        let d = solve_linear(m, &grad)?;
        Ok(vec_ops::dist(&tz, &vec_ops::axpy(z, -step, &d)))
    };
    Ok(EquivalenceReport {
        deviation: via(&a.transpose())?,
        literal_deviation: via(&a)?,
        metric_asymmetry: a.asymmetry(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{fd_gradient, try_fd_hessian};
    use crate::functions::Quadratic;
    use crate::model::{LinearMap, ProxableFn, SmoothFn};

    fn triple(f: ProxableFn, g: SmoothFn, h: SmoothFn) -> ProblemTriple {
        let n = g.dim();
        ProblemTriple::new("t", f, g, h, LinearMap::identity(n)).unwrap()
    }

    fn sq(n: usize, s: f64) -> Quadratic {
        Quadratic::scaled_norm(n, s)
    }

    fn h_only() -> ProblemTriple {
        triple(
            ProxableFn::zero(1),
            SmoothFn::zero(1),
            SmoothFn::new(sq(1, 1.0), 1.0),
        )
    }

    fn g_only() -> ProblemTriple {
        triple(
            ProxableFn::zero(1),
            SmoothFn::new(sq(1, 1.0), 1.0).with_weak_convexity(0.0),
            SmoothFn::zero(1),
        )
    }

    fn general() -> ProblemTriple {
        let qf = Mat::from_rows(&[vec![1.0, 0.3], vec![0.3, -0.4]]).unwrap();
        let qg = Mat::from_rows(&[vec![0.8, -0.2], vec![-0.2, 0.5]]).unwrap();
        let qh = Mat::from_rows(&[vec![0.1, 0.4], vec![0.4, 0.9]]).unwrap();
        triple(
            ProxableFn::new(Quadratic::new(qf, vec![0.2, -0.1], 0.0).unwrap(), 0.5),
            SmoothFn::new(Quadratic::new(qg, vec![0.0, 0.3], 0.0).unwrap(), 0.9),
            SmoothFn::new(Quadratic::new(qh, vec![-0.5, 0.0], 0.0).unwrap(), 1.1),
        )
    }

    #[test]
    fn zero_problem_envelope_is_zero() {
        let p = triple(ProxableFn::zero(2), SmoothFn::zero(2), SmoothFn::zero(2));
        let params = SplitParams::new(1.0, 1.0);
        assert_eq!(env_value(&p, &params, &[1.0, -4.0]).unwrap(), 0.0);
        assert!(
            env_metric(&p, &params, &[1.0, -4.0])
                .unwrap()
                .max_abs_diff(&Mat::identity(2))
                == 0.0
        );
    }

    #[test]
    fn spec_values() {
        let params = SplitParams::new(0.5, 1.0);
        assert!((env_value(&h_only(), &params, &[1.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((env_value(&g_only(), &params, &[1.0]).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(
            (env_metric(&g_only(), &params, &[1.0]).unwrap()[(0, 0)] - 1.0 / 3.0).abs() < 1e-15
        );
        assert!((env_metric(&h_only(), &params, &[1.0]).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((env_gradient(&h_only(), &params, &[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_fd_on_general_instance() {
        let p = general();
        let params = SplitParams::new(0.4, 1.0);
        for z in [[0.3, -1.2], [2.0, 0.5], [-1.0, -1.0]] {
            let g = env_gradient(&p, &params, &z).unwrap();
            let terms = gradient_by_terms(&p, &params, &z).unwrap();
            let fd = fd_gradient(|y| env_value(&p, &params, y).unwrap(), &z, None).unwrap();
            let scale = 1.0 + vec_ops::norm(&fd);
            assert!(vec_ops::dist(&g, &fd) <= 1e-6 * scale, "{g:?} vs {fd:?}");
            assert!(vec_ops::dist(&g, &terms) <= 1e-12 * scale);
        }
    }

    #[test]
    fn equivalence_holds_with_transpose() {
        let p = general();
        let params = SplitParams::new(0.4, 1.3);
        let r = equivalence_check(&p, &params, &[0.7, -0.2]).unwrap();
        assert!(r.deviation <= 1e-12, "{r:?}");
        assert!(r.metric_asymmetry > 1e-3);
    }

    #[test]
    fn saddle_hessian_example() {
        // f = x^T diag(1, -1) x / 2, g = h = 0, gamma = 0.5
        let f = Quadratic::new(Mat::from_diag(&[1.0, -1.0]), vec![0.0; 2], 0.0).unwrap();
        let p = triple(
            ProxableFn::new(f, 1.0).with_hessian_bound(1.0),
            SmoothFn::zero(2),
            SmoothFn::zero(2),
        );
        let params = SplitParams::new(0.5, 1.0);
        let h = env_hessian_at_critical(&p, &params, &[0.0, 0.0]).unwrap();
        let expected = Mat::from_diag(&[2.0 / 3.0, -2.0]);
        assert!(h.max_abs_diff(&expected) < 1e-14, "{h:?}");
    }

    #[test]
    fn hessian_matches_fd_at_drs_critical_point() {
        // f = (x-1)^2/2, g = x^2/2: critical z* = (1 + gamma) x*, x* = 1/2
        let f = Quadratic::new(Mat::identity(1), vec![-1.0], 0.5).unwrap();
        let p = triple(
            ProxableFn::new(f, 0.0).with_hessian_bound(1.0),
            SmoothFn::new(sq(1, 1.0), 1.0).with_weak_convexity(0.0),
            SmoothFn::zero(1),
        );
        let params = SplitParams::new(0.5, 1.0);
        let zstar = [0.75];
        let h = env_hessian_at_critical(&p, &params, &zstar).unwrap();
        let fd = try_fd_hessian(|y| env_value(&p, &params, y), &zstar, None).unwrap();
        assert!(
            h.max_abs_diff(&fd) <= 1e-4 * (1.0 + h.max_abs()),
            "{h:?} vs {fd:?}"
        );
    }

    #[test]
    fn hessian_requires_criticality() {
        let params = SplitParams::new(0.5, 1.0);
        assert!(matches!(
            env_hessian_at_critical(&h_only(), &params, &[1.0]),
            Err(Error::NotCritical { .. })
        ));
    }
}
