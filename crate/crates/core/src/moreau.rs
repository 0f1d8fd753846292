//! Proximal mappings and Moreau envelopes of weakly convex functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, GammaBound, Result};
use crate::linalg::{solve_linear, vec_ops, Mat};
use crate::model::{random_on_sphere, ExtReal, Proxable};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 200;

/// `prox_{gamma xi}(z)` with the envelope value and gradient at `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxResult {
    pub point: Vec<f64>,
    pub envelope_value: f64,
    pub envelope_gradient: Vec<f64>,
}

/// Rejects `gamma` outside `(0, 1/beta)`.
pub fn check_prox_gamma(beta: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::GammaOutOfRange {
            gamma,
            bound: GammaBound::Positive,
            limit: 0.0,
        });
    }
    if beta > 0.0 && gamma * beta >= 1.0 {
        return Err(Error::GammaOutOfRange {
            gamma,
            bound: GammaBound::Prox,
            limit: 1.0 / beta,
        });
    }
    Ok(())
}

/// The proximal point, envelope value and envelope gradient.
pub fn prox<P: Proxable + ?Sized>(xi: &P, gamma: f64, z: &[f64]) -> Result<ProxResult> {
    let point = prox_point(xi, gamma, z)?;
    assemble(xi, gamma, z, point)
}

/// Like [`prox`], but Newton starts from `start` when no closed form exists.
pub fn prox_from<P: Proxable + ?Sized>(
    xi: &P,
    gamma: f64,
    z: &[f64],
    start: &[f64],
) -> Result<ProxResult> {
    check_prox_gamma(xi.weak_convexity(), gamma)?;
    let point = match xi.function().closed_form_prox(gamma, z) {
        Some(p) => p,
        None => newton_prox(xi, gamma, z, start)?,
    };
    assemble(xi, gamma, z, point)
}

fn assemble<P: Proxable + ?Sized>(
    xi: &P,
    gamma: f64,
    z: &[f64],
    point: Vec<f64>,
) -> Result<ProxResult> {
    let diff = vec_ops::sub(z, &point);
    let fv = xi.function().value(&point).expect_finite("prox point")?;
    let envelope_value = fv + vec_ops::dot(&diff, &diff) / (2.0 * gamma);
    let envelope_gradient = vec_ops::scale(&diff, 1.0 / gamma);
    if !envelope_value.is_finite() {
        return Err(Error::NonFiniteValue("Moreau envelope".into()));
    }
    Ok(ProxResult {
        point,
        envelope_value,
        envelope_gradient,
    })
}

/// Just the proximal point.
pub fn prox_point<P: Proxable + ?Sized>(xi: &P, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
    check_prox_gamma(xi.weak_convexity(), gamma)?;
    if xi.function().dim() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "prox: function on R^{}, point in R^{}",
            xi.function().dim(),
            z.len()
        )));
    }
    if !vec_ops::all_finite(z) {
        return Err(Error::NonFiniteValue("prox argument".into()));
    }
    if xi.function().is_zero() {
        return Ok(z.to_vec());
    }
    let p = match xi.function().closed_form_prox(gamma, z) {
        Some(p) => p,
        None => newton_prox(xi, gamma, z, z)?,
    };
    if !vec_ops::all_finite(&p) {
        return Err(Error::NonFiniteValue("prox point".into()));
    }
    Ok(p)
}

/// Damped Newton on the convexified subproblem
/// `min_u xi(u) + (beta/2)||u||^2 + ||u - z'||^2 / (2 gamma')`,
/// `z' = z/(1 - gamma beta)`, `gamma' = gamma/(1 - gamma beta)`, whose
/// minimizer is `prox_{gamma xi}(z)`.
fn newton_prox<P: Proxable + ?Sized>(
    xi: &P,
    gamma: f64,
    z: &[f64],
    start: &[f64],
) -> Result<Vec<f64>> {
    let beta = xi.weak_convexity().max(0.0);
    let d = 1.0 - gamma * beta;
    let zc = vec_ops::scale(z, 1.0 / d);
    let gc = gamma / d;
    let func = xi.function();
    let curvature = beta + 1.0 / gc;

    let objective = |u: &[f64]| -> Option<f64> {
        let v = func.value(u).finite()?;
        let du = vec_ops::sub(u, &zc);
        let total = v + 0.5 * beta * vec_ops::dot(u, u) + vec_ops::dot(&du, &du) / (2.0 * gc);
        total.is_finite().then_some(total)
    };
    let gradient = |u: &[f64]| -> Result<Vec<f64>> {
        let g = func
            .gradient(u)
            .ok_or_else(|| Error::GradientUnavailable(format!("{func:?}")))?;
        let mut out = vec_ops::axpy(&g, beta, u);
        for ((o, ui), zi) in out.iter_mut().zip(u).zip(&zc) {
            *o += (ui - zi) / gc;
        }
        Ok(out)
    };
    let newton_dir = |u: &[f64], g: &[f64]| -> Vec<f64> {
        let h: Option<Mat> = xi.hessian_at(u).ok().map(|h| h.add_diag(curvature));
        let dir = h.and_then(|h| solve_linear(&h, g).ok());
        match dir {
            Some(dir) if vec_ops::dot(&dir, g) > 0.0 => vec_ops::scale(&dir, -1.0),
            _ => vec_ops::scale(g, -1.0 / curvature),
        }
    };

    let tol = NEWTON_TOL * (1.0 + vec_ops::norm(&zc) / gc).clamp(1.0, 1e6);
    let mut u = start.to_vec();
    let mut fu = objective(&u).ok_or_else(|| Error::InfiniteValue("prox start".into()))?;
    let mut g = gradient(&u)?;
    let mut gnorm = vec_ops::norm(&g);
    for _ in 0..NEWTON_MAX_ITER {
        if gnorm <= tol {
            // one extra full step to push the error to roundoff level
            let dir = newton_dir(&u, &g);
            let cand = vec_ops::add(&u, &dir);
            if let (Some(_), Ok(gc_)) = (objective(&cand), gradient(&cand)) {
                if vec_ops::norm(&gc_) <= gnorm {
                    u = cand;
                }
            }
            return Ok(u);
        }
        let dir = newton_dir(&u, &g);
        let slope = vec_ops::dot(&g, &dir);
        let mut t = 1.0;
        let mut accepted = None;
        // Below roundoff of the objective Armijo accepts anything, so rely
        // on the gradient test further down instead.
        let flat = -slope <= 1e-13 * (1.0 + fu.abs());
        for _ in 0..if flat { 0 } else { 60 } {
            let cand = vec_ops::axpy(&u, t, &dir);
            if let Some(fc) = objective(&cand) {
                if fc <= fu + 1e-4 * t * slope {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        let (next, fnext) = match accepted {
            Some(step) => step,
            None => {
                // Take the full step if it still shrinks the gradient.
                let cand = vec_ops::add(&u, &dir);
                let fc = objective(&cand);
                match (fc, gradient(&cand)) {
                    (Some(fc), Ok(gn)) if vec_ops::norm(&gn) < gnorm => (cand, fc),
                    _ => break,
                }
            }
        };
        u = next;
        fu = fnext;
        g = gradient(&u)?;
        gnorm = vec_ops::norm(&g);
    }
    if gnorm <= tol {
        return Ok(u);
    }
    Err(Error::SubproblemNotConverged {
        iterations: NEWTON_MAX_ITER,
        grad_norm: gnorm,
    })
}

/// Largest observed `||prox(z1) - prox(z2)|| / ||z1 - z2||` over `samples`
/// pairs drawn from `[-radius, radius]^n`.
pub fn prox_lipschitz_probe<P: Proxable + ?Sized>(
    xi: &P,
    gamma: f64,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<f64> {
    check_prox_gamma(xi.weak_convexity(), gamma)?;
    let n = xi.function().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let z1: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
        let z2 = if rng.random_bool(0.5) {
            (0..n).map(|_| rng.random_range(-radius..=radius)).collect()
        } else {
            vec_ops::add(&z1, &random_on_sphere(n, 1e-2 * radius, &mut rng))
        };
        let dz = vec_ops::dist(&z1, &z2);
        if dz == 0.0 {
            continue;
        }
        let p1 = prox_point(xi, gamma, &z1)?;
        let p2 = prox_point(xi, gamma, &z2)?;
        worst = worst.max(vec_ops::dist(&p1, &p2) / dz);
    }
    Ok(worst)
}

/// `min_u xi(u) + ||u - z||^2/(2 gamma)` as an extended real, for callers
/// that only need the value.
pub fn envelope_value<P: Proxable + ?Sized>(xi: &P, gamma: f64, z: &[f64]) -> Result<ExtReal> {
    let p = prox_point(xi, gamma, z)?;
    let d = vec_ops::dist(&p, z);
    Ok(xi.function().value(&p) + d * d / (2.0 * gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::fd_gradient;
    use crate::functions::{L1Norm, Quadratic, QuarticWell};
    use crate::model::{Function, ProxableFn, SmoothFn};
    use std::sync::Arc;

    /// Hides the closed form so the Newton path is exercised.
    #[derive(Debug)]
    struct NoClosedForm(Arc<dyn Function>);

    impl Function for NoClosedForm {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> ExtReal {
            self.0.value(x)
        }
        fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
            self.0.gradient(x)
        }
        fn hessian(&self, x: &[f64]) -> Option<Mat> {
            self.0.hessian(x)
        }
    }

    #[test]
    fn zero_prox_is_identity() {
        let r = prox(&ProxableFn::zero(2), 7.0, &[3.0, -1.0]).unwrap();
        assert_eq!(r.point, vec![3.0, -1.0]);
        assert_eq!(r.envelope_value, 0.0);
    }

    #[test]
    fn half_square_prox() {
        let xi = ProxableFn::new(Quadratic::scaled_norm(2, 1.0), 0.0);
        let r = prox(&xi, 1.0, &[2.0, 0.0]).unwrap();
        assert!(vec_ops::dist(&r.point, &[1.0, 0.0]) < 1e-14);
        assert!((r.envelope_value - 1.0).abs() < 1e-14);
        assert!(vec_ops::dist(&r.envelope_gradient, &[1.0, 0.0]) < 1e-14);
    }

    #[test]
    fn concave_quadratic_prox_by_newton() {
        let f = NoClosedForm(Arc::new(Quadratic::scaled_norm(1, -0.5)));
        let xi = ProxableFn::new(f, 0.5);
        let r = prox(&xi, 1.0, &[1.0]).unwrap();
        assert!((r.point[0] - 2.0).abs() < 1e-12, "{:?}", r.point);
    }

    #[test]
    fn gamma_at_weak_convexity_limit_is_rejected() {
        let xi = ProxableFn::new(Quadratic::scaled_norm(1, -0.5), 0.5);
        assert!(matches!(
            prox(&xi, 2.0, &[1.0]),
            Err(Error::GammaOutOfRange {
                bound: GammaBound::Prox,
                ..
            })
        ));
        assert!(matches!(
            prox(&xi, -1.0, &[1.0]),
            Err(Error::GammaOutOfRange {
                bound: GammaBound::Positive,
                ..
            })
        ));
    }

    #[test]
    fn newton_matches_closed_form_on_random_quadratic() {
        let q = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, -0.8]]).unwrap();
        let quad = Quadratic::new(q, vec![0.3, -0.1], 0.0).unwrap();
        let exact = quad.closed_form_prox(0.7, &[1.0, 2.0]).unwrap();
        let xi = ProxableFn::new(NoClosedForm(Arc::new(quad)), 0.8);
        let p = prox_point(&xi, 0.7, &[1.0, 2.0]).unwrap();
        assert!(vec_ops::dist(&p, &exact) < 1e-12);
    }

    #[test]
    fn envelope_gradient_matches_fd_for_quartic() {
        let xi = ProxableFn::new(QuarticWell::new(2, -0.5).unwrap(), 1.0);
        let gamma = 0.4;
        for z in [[0.3, -0.7], [1.5, 0.2], [-2.0, 1.0]] {
            let r = prox(&xi, gamma, &z).unwrap();
            let fd =
                fd_gradient(|y| prox(&xi, gamma, y).unwrap().envelope_value, &z, None).unwrap();
            let scale = 1.0 + vec_ops::norm(&fd);
            assert!(vec_ops::dist(&r.envelope_gradient, &fd) <= 1e-5 * scale);
        }
    }

    #[test]
    fn two_newton_starts_agree() {
        let xi = ProxableFn::new(QuarticWell::new(2, -0.5).unwrap(), 1.0);
        let z = [0.4, 0.9];
        let a = prox_from(&xi, 0.5, &z, &z).unwrap();
        let b = prox_from(&xi, 0.5, &z, &[0.0, 0.0]).unwrap();
        assert!(vec_ops::dist(&a.point, &b.point) < 1e-8);
    }

    #[test]
    fn lipschitz_probe_examples() {
        let zero = ProxableFn::zero(2);
        assert!(prox_lipschitz_probe(&zero, 1.0, 50, 2.0, 1).unwrap() <= 1.0 + 1e-12);
        let convex = ProxableFn::new(Quadratic::scaled_norm(2, 1.0), 0.0);
        assert!(prox_lipschitz_probe(&convex, 1.0, 50, 2.0, 1).unwrap() <= 0.5 + 1e-6);
        let concave = ProxableFn::new(Quadratic::scaled_norm(2, -0.5), 0.5);
        let r = prox_lipschitz_probe(&concave, 1.0, 50, 2.0, 1).unwrap();
        assert!(r <= 2.0 + 1e-6 && r > 2.0 - 1e-9, "{r}");
    }

    #[test]
    fn smooth_fn_is_proxable() {
        let g = SmoothFn::new(Quadratic::scaled_norm(1, 1.0), 1.0).with_weak_convexity(0.0);
        let r = prox(&g, 0.5, &[1.0]).unwrap();
        assert!((r.envelope_value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nonsmooth_without_closed_form_fails_cleanly() {
        let xi = ProxableFn::new(NoClosedForm(Arc::new(L1Norm::new(1, 1.0).unwrap())), 0.0);
        let err = prox(&xi, 0.5, &[0.2]);
        assert!(err.is_err());
    }
}
