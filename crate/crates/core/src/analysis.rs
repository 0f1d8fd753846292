//! Critical-point classification, the envelope/objective correspondence,
//! the Jacobian of `T`, and the step-size bounds under which `T` is a local
//! diffeomorphism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envelope::{
    self, h_curvature, metric_at, prox_g_jacobian, value_from_state, CRITICAL_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{lambda_min_sym, solve_linear, sym_eigen, vec_ops, Mat};
use crate::model::{phi_value, random_on_sphere, ExtReal, ProblemTriple};
use crate::splitting::{dys_step, DysState, Mode, QEval, SplitParams};

/// Eigenvalues within this band of zero are reported as indeterminate.
pub const EIG_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    NotCritical,
    /// Critical, but second-order classification is out of scope (general
    /// three-operator case on the envelope side).
    Critical,
    StrictSaddle,
    LocalMinCandidate,
    /// Critical with `|lambda_min| <= EIG_TOL`.
    Indeterminate,
}

fn by_curvature(lambda_min: f64) -> Class {
    if lambda_min < -EIG_TOL {
        Class::StrictSaddle
    } else if lambda_min > EIG_TOL {
        Class::LocalMinCandidate
    } else {
        Class::Indeterminate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub z: Vec<f64>,
    /// `prox_{gamma g}(z)`.
    pub x: Vec<f64>,
    pub mode: Mode,
    pub grad_env_norm: f64,
    pub lambda_min_env: Option<f64>,
    pub classification: Class,
    /// `None` where `phi` is not differentiable at `x`.
    pub phi_grad_norm: Option<f64>,
    pub lambda_min_phi: Option<f64>,
    pub phi_classification: Option<Class>,
    pub stationarity_agrees: bool,
    /// `None` when either side is indeterminate or unclassified.
    pub sign_agrees: Option<bool>,
}

impl PointReport {
    pub fn is_env_critical(&self) -> bool {
        self.classification != Class::NotCritical
    }

    /// Fails if the envelope and objective disagree.
    pub fn check(&self) -> Result<()> {
        if !self.stationarity_agrees {
            return Err(Error::CorrespondenceViolated(format!(
                "stationarity differs at z = {:?}: |grad env| = {:e}, |grad phi| = {:?}",
                self.z, self.grad_env_norm, self.phi_grad_norm
            )));
        }
        if self.sign_agrees == Some(false) {
            return Err(Error::CorrespondenceViolated(format!(
                "curvature sign differs at z = {:?}: lambda_min env = {:?}, phi = {:?}",
                self.z, self.lambda_min_env, self.lambda_min_phi
            )));
        }
        Ok(())
    }
}

fn envelope_state(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<DysState> {
    dys_step(
        p,
        &SplitParams {
            q_eval: QEval::Prox,
            ..*params
        },
        z,
    )
}

/// Whether the envelope Hessian's sign is meaningful (`g = 0` or `h = 0`).
fn second_order_in_scope(p: &ProblemTriple) -> bool {
    p.g.is_zero() || p.h.is_zero()
}

/// Classifies `z` as a point of the envelope and `prox_{gamma g}(z)` as a
/// point of `phi`, and records whether the two agree.
pub fn classify(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<PointReport> {
    let gamma = params.gamma;
    let state = envelope_state(p, params, z)?;
    let a = metric_at(p, gamma, &state.proxg)?;
    let grad = vec_ops::scale(&a.tr_mul_vec(&state.w), -1.0 / gamma);
    let grad_env_norm = vec_ops::norm(&grad);
    let env_critical = grad_env_norm <= CRITICAL_TOL * (1.0 + vec_ops::norm(z));
    let x = state.proxg.clone();
    let xscale = 1.0 + vec_ops::norm(&x);

    let (lambda_min_env, classification) = if env_critical {
        let h = envelope::env_hessian_at_critical(p, params, z)?;
        let lam = lambda_min_sym(&h)?;
        let class = if second_order_in_scope(p) {
            by_curvature(lam)
        } else {
            Class::Critical
        };
        (Some(lam), class)
    } else {
        (None, Class::NotCritical)
    };

    let phi_grad_norm = p.phi_gradient(&x).ok().map(|g| vec_ops::norm(&g));
    let (lambda_min_phi, phi_classification) = match phi_grad_norm {
        Some(gn) if gn <= 1e-6 * xscale => {
            let lam = lambda_min_sym(&p.phi_hessian(&x)?)?;
            (Some(lam), Some(by_curvature(lam)))
        }
        Some(_) => (None, Some(Class::NotCritical)),
        None => (None, None),
    };

    // Loose on one side, strict on the other, so that near-critical points
    // do not register as disagreements.
    let stationarity_agrees = match phi_grad_norm {
        None => true,
        Some(gn) if env_critical => gn <= 1e-6 * xscale,
        Some(gn) => gn > 1e-12 * xscale,
    };
    let decided = |c: Class| matches!(c, Class::StrictSaddle | Class::LocalMinCandidate);
    let sign_agrees = match (classification, phi_classification) {
        (e, Some(f)) if decided(e) && decided(f) => Some(e == f),
        _ => None,
    };

    Ok(PointReport {
        z: z.to_vec(),
        x,
        mode: params.resolve_mode(p),
        grad_env_norm,
        lambda_min_env,
        classification,
        phi_grad_norm,
        lambda_min_phi,
        phi_classification,
        stationarity_agrees,
        sign_agrees,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepBounds {
    /// DRS bound; present when `h = 0`.
    pub alpha1: Option<ExtReal>,
    /// FBS bound; present when `g = 0`.
    pub alpha2: Option<ExtReal>,
    /// Lower bound on `lambda_min(J_T)` at a fixed point for the given
    /// `alpha`, from the bound of the mode in use.
    #[serde(rename = "lambda_min_JT_probe")]
    pub lambda_min_jt_probe: f64,
    pub mode: Mode,
}

impl StepBounds {
    /// The bound that applies to `mode`.
    pub fn bound(&self) -> ExtReal {
        let pick = match self.mode {
            Mode::Drs => self.alpha1,
            Mode::Fbs | Mode::Gd => self.alpha2,
            _ => None,
        };
        pick.or(self.alpha1)
            .or(self.alpha2)
            .unwrap_or(ExtReal::PosInf)
    }
}

fn positive_ratio(num: f64, den: f64) -> ExtReal {
    if den <= 0.0 {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(num / den)
    }
}

/// `2 / (1 - ((1 - gamma L_g)/(1 + gamma L_g)) ((1 - gamma L_f)/(1 + gamma L_f)))`
pub fn alpha1(gamma: f64, l_g: f64, l_f: f64) -> ExtReal {
    let rg = (1.0 - gamma * l_g) / (1.0 + gamma * l_g);
    let rf = (1.0 - gamma * l_f) / (1.0 + gamma * l_f);
    positive_ratio(2.0, 1.0 - rg * rf)
}

/// `(1 + gamma L_f) / (gamma (L_h ||L||^2 + L_f))`
pub fn alpha2(gamma: f64, l_h: f64, l_norm: f64, l_f: f64) -> ExtReal {
    positive_ratio(1.0 + gamma * l_f, gamma * (l_h * l_norm * l_norm + l_f))
}

/// The step bounds for `params.gamma` and the lower bound on `lambda_min(J_T)`
/// at `params.alpha`.
pub fn step_bounds(p: &ProblemTriple, params: &SplitParams) -> Result<StepBounds> {
    let c = p.constants();
    let gamma = params.gamma;
    let mode = params.resolve_mode(p);
    let l_f = c.l_f.ok_or(Error::MissingConstant("L_f"))?;
    let drs = p.h.is_zero();
    let fbs = p.g.is_zero();
    if !drs && !fbs {
        return Err(Error::ModeMismatch(format!(
            "step bounds need h = 0 or g = 0; problem `{}` is in mode {mode}",
            p.name
        )));
    }
    let a1 = drs.then(|| alpha1(gamma, c.l_g, l_f));
    let a2 = fbs.then(|| alpha2(gamma, c.l_h, c.l_norm, l_f));
    let alpha = params.alpha;
    let drs_probe = || {
        1.0 - alpha / 2.0
            + alpha * (1.0 / (1.0 + gamma * l_f) - 0.5) * (2.0 / (1.0 + gamma * c.l_g) - 1.0)
    };
    let fbs_probe =
        || 1.0 - alpha + alpha * (1.0 - gamma * c.l_norm * c.l_norm * c.l_h) / (1.0 + gamma * l_f);
    let lambda_min_jt_probe = match mode {
        Mode::Drs => drs_probe(),
        Mode::Fbs | Mode::Gd => fbs_probe(),
        _ if fbs => fbs_probe(),
        _ => drs_probe(),
    };
    Ok(StepBounds {
        alpha1: a1,
        alpha2: a2,
        lambda_min_jt_probe,
        mode,
    })
}

/// `0.9 min(bound, 1)`, or `0.9` when no bound applies.
pub fn default_alpha(p: &ProblemTriple, gamma: f64, mode: Option<Mode>) -> f64 {
    let params = SplitParams {
        gamma,
        alpha: 1.0,
        mode,
        q_eval: QEval::Prox,
    };
    let cap = match step_bounds(p, &params) {
        Ok(b) => b.bound().min(ExtReal::Finite(1.0)).finite().unwrap_or(1.0),
        Err(_) => 1.0,
    };
    0.9 * cap
}

/// `J_T(z) = I + alpha (J_p(z) - J_prox(z))` with
/// `J_p = (I + gamma hess f(p))^{-1} J_s` and `J_prox = (I + gamma hess g(x))^{-1}`.
pub fn jacobian_t(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<Mat> {
    let state = dys_step(p, params, z)?;
    jacobian_from_state(p, params, &state)
}

fn jacobian_from_state(p: &ProblemTriple, params: &SplitParams, state: &DysState) -> Result<Mat> {
    let n = p.n();
    let gamma = params.gamma;
    let b1 = prox_g_jacobian(p, gamma, &state.proxg)?;
    let js = match params.q_eval {
        QEval::Prox => metric_at(p, gamma, &state.proxg)?,
        QEval::Z => b1
            .scale(2.0)
            .add_diag(-1.0)
            .sub(&h_curvature(p, &state.z)?.scale(gamma)),
    };
    let b2 = if p.f.is_zero() {
        Mat::identity(n)
    } else {
        p.f.hessian(&state.p)?
            .scale(gamma)
            .add_diag(1.0)
            .inverse()?
    };
    Ok(Mat::identity(n).add(&b2.matmul(&js).sub(&b1).scale(params.alpha)))
}

/// `J_w = J_p - J_prox`, the Jacobian of the fixed-point residual.
fn residual_jacobian(p: &ProblemTriple, params: &SplitParams, state: &DysState) -> Result<Mat> {
    let unit = SplitParams {
        alpha: 1.0,
        ..*params
    };
    Ok(jacobian_from_state(p, &unit, state)?.add_diag(-1.0))
}

/// Smallest eigenvalue of `J_T` at a fixed point.
///
/// When `g = 0` or `h = 0` the metric `A` is symmetric positive definite and
/// `A^{1/2} J_T A^{-1/2}` is symmetric, so its spectrum is exactly that of
/// `J_T`. Otherwise this returns `lambda_min` of the symmetric part of `J_T`,
/// a lower bound on the real parts of its eigenvalues.
pub fn diffeo_probe(p: &ProblemTriple, params: &SplitParams, zstar: &[f64]) -> Result<f64> {
    let state = envelope_state(p, params, zstar)?;
    let tol = CRITICAL_TOL * (1.0 + vec_ops::norm(zstar));
    let residual = state.residual();
    if residual > tol {
        return Err(Error::NotFixedPoint { residual, tol });
    }
    let params = SplitParams {
        q_eval: QEval::Prox,
        ..*params
    };
    let jt = jacobian_from_state(p, &params, &state)?;
    if second_order_in_scope(p) {
        let a = metric_at(p, params.gamma, &state.proxg)?;
        if a.is_symmetric() {
            let eig = sym_eigen(&a.symmetrize())?;
            if eig.min() > 0.0 {
                let root = eig.map(f64::sqrt);
                let inv_root = eig.map(|v| 1.0 / v.sqrt());
                let k = root.matmul(&jt).matmul(&inv_root);
                return lambda_min_sym(&k.symmetrize());
            }
        }
    }
    lambda_min_sym(&jt.symmetrize())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub x: Vec<f64>,
    pub envelope_value: f64,
    pub phi_value: f64,
    pub gap: f64,
    pub probes: usize,
    /// Largest `phi(x) - phi(x + r d)` over the probes; positive means descent.
    pub worst_descent: f64,
}

pub const CORRESPONDENCE_TOL: f64 = 1e-7;
pub const PROBE_DIRECTIONS: usize = 100;
pub const PROBE_RADIUS: f64 = 1e-3;

/// At a converged `zstar`: `phi^gamma(z*) = phi(prox_{gamma g}(z*))` and no
/// descent for `phi` around `prox_{gamma g}(z*)` along random directions.
pub fn minimizer_correspondence_check(
    p: &ProblemTriple,
    params: &SplitParams,
    zstar: &[f64],
) -> Result<CorrespondenceReport> {
    let state = envelope_state(p, params, zstar)?;
    let env = value_from_state(p, params.gamma, &state)?;
    let x = state.proxg;
    let phi = phi_value(p, &x)?.expect_finite("phi at prox_g(z*)")?;
    let gap = (env - phi).abs();
    if gap > CORRESPONDENCE_TOL {
        return Err(Error::CorrespondenceViolated(format!(
            "|phi^gamma(z*) - phi(x*)| = {gap:e} exceeds {CORRESPONDENCE_TOL:e}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let slack = 1e-12 * (1.0 + phi.abs());
    let mut worst_descent = f64::NEG_INFINITY;
    for _ in 0..PROBE_DIRECTIONS {
        let d = random_on_sphere(x.len(), PROBE_RADIUS, &mut rng);
        let y = vec_ops::add(&x, &d);
        let descent = match phi_value(p, &y)? {
            ExtReal::Finite(v) => phi - v,
            ExtReal::PosInf => f64::NEG_INFINITY,
        };
        worst_descent = worst_descent.max(descent);
        if descent > slack {
            return Err(Error::CorrespondenceViolated(format!(
                "phi decreases by {descent:e} at radius {PROBE_RADIUS} from x* = {x:?}"
            )));
        }
    }
    Ok(CorrespondenceReport {
        x,
        envelope_value: env,
        phi_value: phi,
        gap,
        probes: PROBE_DIRECTIONS,
        worst_descent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub envelope: f64,
    pub phi_at_p: f64,
    pub phi_at_x: f64,
    pub c1: f64,
    pub c2: f64,
    /// `||p(z) - prox_{gamma g}(z)||^2`
    pub w_sq: f64,
    /// `phi^gamma - (phi(p) + C1 ||w||^2)`; should be `>= 0`.
    pub lower_margin: f64,
    /// `phi(p) + C2 ||w||^2 - phi^gamma`; should be `>= 0`.
    pub upper_margin: f64,
    /// `phi(x) - phi^gamma`; should be `>= 0`.
    pub prox_margin: f64,
}

impl SandwichReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower_margin >= -slack && self.upper_margin >= -slack && self.prox_margin >= -slack
    }
}

/// `C1 = (1 - gamma L_h ||L||^2 - gamma L_g) / (2 gamma)` and
/// `C2 = (1 + gamma L_h ||L||^2 + gamma L_g) / (2 gamma)`.
pub fn sandwich_constants(p: &ProblemTriple, gamma: f64) -> (f64, f64) {
    let s = gamma * p.constants().smooth_part();
    ((1.0 - s) / (2.0 * gamma), (1.0 + s) / (2.0 * gamma))
}

/// Evaluates the three envelope inequalities at `z`.
pub fn sandwich_check(
    p: &ProblemTriple,
    params: &SplitParams,
    z: &[f64],
) -> Result<SandwichReport> {
    let state = envelope_state(p, params, z)?;
    let env = value_from_state(p, params.gamma, &state)?;
    let phi_p = phi_value(p, &state.p)?.expect_finite("phi at p(z)")?;
    let phi_x = phi_value(p, &state.proxg)?.expect_finite("phi at prox_g(z)")?;
    let (c1, c2) = sandwich_constants(p, params.gamma);
    let w_sq = vec_ops::dot(&state.w, &state.w);
    Ok(SandwichReport {
        envelope: env,
        phi_at_p: phi_p,
        phi_at_x: phi_x,
        c1,
        c2,
        w_sq,
        lower_margin: env - (phi_p + c1 * w_sq),
        upper_margin: phi_p + c2 * w_sq - env,
        prox_margin: phi_x - env,
    })
}

/// Box and multistart budget for [`discover_saddles`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub lo: f64,
    pub hi: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            lo: -2.0,
            hi: 2.0,
            starts: 64,
            seed: 0,
        }
    }
}

pub const CLUSTER_RADIUS: f64 = 1e-5;

/// Levenberg-Marquardt on `w(z) = 0` from random starts in `[lo, hi]^n` plus
/// the origin, then deduplication and [`classify`]. Plain iteration of `T`
/// is useless here because it avoids strict saddles.
pub fn discover_saddles(
    p: &ProblemTriple,
    params: &SplitParams,
    grid: &SearchGrid,
) -> Vec<PointReport> {
    let n = p.n();
    let params = SplitParams {
        q_eval: QEval::Prox,
        ..*params
    };
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut starts = vec![vec![0.0; n]];
    for _ in 0..grid.starts {
        starts.push(
            (0..n)
                .map(|_| rng.random_range(grid.lo..=grid.hi))
                .collect(),
        );
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    for z0 in starts {
        let Some(z) = levenberg_marquardt(p, &params, z0) else {
            continue;
        };
        if found.iter().all(|f| vec_ops::dist(f, &z) > CLUSTER_RADIUS) {
            found.push(z);
        }
    }
    found
        .into_iter()
        .filter_map(|z| classify(p, &params, &z).ok())
        .filter(PointReport::is_env_critical)
        .collect()
}

fn levenberg_marquardt(
    p: &ProblemTriple,
    params: &SplitParams,
    mut z: Vec<f64>,
) -> Option<Vec<f64>> {
    let mut state = dys_step(p, params, &z).ok()?;
    let mut res = state.residual();
    let mut mu = 1e-3;
    for _ in 0..200 {
        if res <= 1e-13 * (1.0 + vec_ops::norm(&z)) {
            return Some(z);
        }
        let j = residual_jacobian(p, params, &state).ok()?;
        let jt = j.transpose();
        let normal = jt.matmul(&j);
        let rhs = vec_ops::scale(&jt.mul_vec(&state.w), -1.0);
        let mut improved = false;
        for _ in 0..30 {
            let Ok(step) = solve_linear(&normal.add_diag(mu), &rhs) else {
                mu *= 4.0;
                continue;
            };
            let cand = vec_ops::add(&z, &step);
            if let Ok(s) = dys_step(p, params, &cand) {
                if s.residual() < res {
                    z = cand;
                    res = s.residual();
                    state = s;
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (res <= 1e-10 * (1.0 + vec_ops::norm(&z))).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::fd_jacobian;
    use crate::registry::make_json;
    use crate::splitting::apply_t;
    use serde_json::json;

    #[test]
    fn alpha_formulas() {
        assert_eq!(alpha1(0.5, 0.0, 0.0), ExtReal::PosInf);
        let a1 = alpha1(0.1, 1.0, 1.0).finite().unwrap();
        let r: f64 = 0.9 / 1.1;
        assert!((a1 - 2.0 / (1.0 - r * r)).abs() < 1e-12);
        assert!((a1 - 6.05).abs() < 1e-12);
        assert!((alpha2(0.1, 1.0, 1.0, 1.0).finite().unwrap() - 5.5).abs() < 1e-12);
    }

    #[test]
    fn saddle_quadratic_fbs_classification() {
        let p = make_json("saddle_quadratic", json!({})).unwrap();
        let params = SplitParams::new(0.5, 1.0);
        let r = classify(&p, &params, &[0.0, 0.0]).unwrap();
        assert_eq!(r.classification, Class::StrictSaddle);
        assert!((r.lambda_min_env.unwrap() + 2.0).abs() < 1e-12);
        assert!((r.lambda_min_phi.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(r.sign_agrees, Some(true));
        r.check().unwrap();
        let far = classify(&p, &params, &[0.3, 0.4]).unwrap();
        assert_eq!(far.classification, Class::NotCritical);
        far.check().unwrap();
    }

    #[test]
    fn step_bounds_require_a_reduced_mode() {
        let p = make_json("saddle_quadratic", json!({"split": "dys"})).unwrap();
        assert!(matches!(
            step_bounds(&p, &SplitParams::new(0.3, 1.0)),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn jacobian_matches_fd_for_zero_and_gd() {
        let zero = make_json("zero", json!({"n": 2})).unwrap();
        let params = SplitParams::new(0.5, 1.0);
        let j = jacobian_t(&zero, &params, &[1.0, 2.0]).unwrap();
        assert!(j.max_abs_diff(&Mat::identity(2)) == 0.0);

        let gd = make_json("quadratic", json!({"Q": [1.0], "assign": "h"})).unwrap();
        let params = SplitParams::new(0.5, 0.8);
        let j = jacobian_t(&gd, &params, &[1.0]).unwrap();
        assert!((j[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_fd_on_general_instance() {
        let p = make_json("quadratic", json!({"seed": 3, "n": 3})).unwrap();
        let params = SplitParams::new(0.5 * p.gamma_limit().finite().unwrap(), 1.1);
        let z = [0.3, -0.2, 0.9];
        let j = jacobian_t(&p, &params, &z).unwrap();
        let fd = fd_jacobian(|y| apply_t(&p, &params, y).unwrap(), &z, None).unwrap();
        assert!(j.max_abs_diff(&fd) < 1e-7, "{j:?} vs {fd:?}");
    }

    #[test]
    fn diffeo_probe_saddle_quadratic() {
        let p = make_json("saddle_quadratic", json!({})).unwrap();
        let gamma = 0.5;
        let b = step_bounds(&p, &SplitParams::new(gamma, 1.0).with_mode(Mode::Fbs)).unwrap();
        let a2 = b.alpha2.unwrap().finite().unwrap();
        assert!((a2 - 3.0).abs() < 1e-12);
        let inside = SplitParams::new(gamma, 0.9 * a2).with_mode(Mode::Fbs);
        let lam = diffeo_probe(&p, &inside, &[0.0, 0.0]).unwrap();
        // J_T = diag(1 + alpha(1/1.5 - 1), 1 + alpha(1/0.5 - 1))
        assert!((lam - (1.0 - 2.7 / 3.0)).abs() < 1e-12);
        let outside = SplitParams::new(gamma, 1.5 * a2).with_mode(Mode::Fbs);
        assert!(diffeo_probe(&p, &outside, &[0.0, 0.0]).unwrap() <= 0.0);
        assert!(matches!(
            diffeo_probe(&p, &inside, &[1.0, 0.0]),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn correspondence_at_convex_minimizer() {
        let p = make_json("quadratic", json!({"seed": 1, "n": 3, "parts": "fg"})).unwrap();
        let x = p.landmarks.minimizers[0].clone();
        let gamma = 0.5 * p.gamma_limit().finite().unwrap();
        let params = SplitParams::new(gamma, 1.0);
        // z* = x* + gamma grad g(x*)
        let zstar = vec_ops::axpy(&x, gamma, &p.g.gradient(&x).unwrap());
        let r = minimizer_correspondence_check(&p, &params, &zstar).unwrap();
        assert!(r.gap <= 1e-9, "{r:?}");
    }

    #[test]
    fn discover_finds_single_saddle() {
        let p = make_json("saddle_quadratic", json!({})).unwrap();
        let found = discover_saddles(&p, &SplitParams::new(0.5, 1.0), &SearchGrid::default());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].classification, Class::StrictSaddle);
        assert!(vec_ops::norm(&found[0].z) < 1e-10);
    }

    #[test]
    fn discover_matfac_landscape() {
        let p = make_json("matfac_toy", json!({})).unwrap();
        let found = discover_saddles(&p, &SplitParams::new(0.2, 0.9), &SearchGrid::default());
        let saddles = found
            .iter()
            .filter(|r| r.classification == Class::StrictSaddle)
            .count();
        let mins = found
            .iter()
            .filter(|r| r.classification == Class::LocalMinCandidate)
            .count();
        assert_eq!((saddles, mins), (3, 2), "{found:#?}");
        for r in &found {
            r.check().unwrap();
        }
    }
}
