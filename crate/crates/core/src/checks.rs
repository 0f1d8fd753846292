//! The invariant suite behind the `check` command. Each check reports a
//! measured quantity against its tolerance; numerical failures inside a check
//! are recorded as failures rather than aborting the suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify, diffeo_probe, minimizer_correspondence_check, sandwich_check, step_bounds,
};
use crate::envelope::{env_gradient, env_value, equivalence_check, gradient_by_terms};
use crate::error::{Error, Result};
use crate::fd::{fd_jacobian, try_fd_gradient};
use crate::linalg::vec_ops;
use crate::model::{lipschitz_ratio_probe, ExtReal, ProblemTriple, Proxable, SmoothFn};
use crate::moreau::{envelope_value, prox, prox_lipschitz_probe};
use crate::splitting::{
    apply_t, dys_step, run_with, validate_params, Keep, Mode, SplitParams, StopRule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check does not apply to this problem or mode.
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub problem: String,
    pub gamma: f64,
    pub alpha: f64,
    pub mode: Mode,
    pub seed: u64,
    pub samples: usize,
    pub results: Vec<CheckResult>,
    pub passed: bool,
}

impl CheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }

    /// Names the failed checks, if any.
    pub fn ensure_passed(&self) -> Result<()> {
        let failed: Vec<&str> = self.failures().map(|r| r.name.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::InvariantFailed(failed.join(", ")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Random points per pointwise check.
    pub samples: usize,
    /// Sampling box half-width.
    pub radius: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 20,
            radius: 2.0,
            seed: 0,
        }
    }
}

pub const LIPSCHITZ_PAIRS: usize = 1000;
pub const FD_TOL: f64 = 1e-5;
pub const EQUIVALENCE_TOL: f64 = 1e-9;
pub const SANDWICH_SLACK: f64 = 1e-8;
pub const REDUCTION_TOL: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-8;
pub const ARGMIN_TOL: f64 = 1e-6;

struct Suite<'a> {
    p: &'a ProblemTriple,
    params: SplitParams,
    points: Vec<Vec<f64>>,
    opts: &'a CheckOptions,
    results: Vec<CheckResult>,
}

fn smooth_parts(p: &ProblemTriple) -> [(&'static str, &SmoothFn, usize); 2] {
    [("g", &p.g, p.n()), ("h", &p.h, p.m())]
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    vec_ops::dist(a, b) / (1.0 + vec_ops::norm(b))
}

impl Suite<'_> {
    fn push(
        &mut self,
        name: &str,
        status: Status,
        measured: f64,
        tolerance: f64,
        note: Option<String>,
    ) {
        self.results.push(CheckResult {
            name: name.to_string(),
            status,
            measured,
            tolerance,
            note,
        });
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.push(name, Status::Skip, 0.0, 0.0, Some(why.to_string()));
    }

    /// Records `measured <= tolerance`, or a failure carrying the error.
    fn bound(&mut self, name: &str, tolerance: f64, measured: Result<f64>) {
        match measured {
            Ok(v) => {
                let status = if v <= tolerance {
                    Status::Pass
                } else {
                    Status::Fail
                };
                self.push(name, status, v, tolerance, None);
            }
            Err(e) => self.push(name, Status::Fail, f64::NAN, tolerance, Some(e.to_string())),
        }
    }

    fn worst<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        self.points
            .iter()
            .try_fold(0.0_f64, |acc, z| Ok(acc.max(f(z)?)))
    }

    fn lipschitz(&mut self) {
        let radius = self.opts.radius;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        for (name, func, _) in smooth_parts(self.p) {
            let check = format!("lipschitz_grad_{name}");
            if func.is_zero() {
                self.skip(&check, "zero part");
                continue;
            }
            let l = func.lipschitz_grad();
            let probe = lipschitz_ratio_probe(func, LIPSCHITZ_PAIRS, radius, &mut rng);
            self.bound(&check, l * (1.0 + 1e-9) + 1e-12, probe);
        }
    }

    fn gradients(&mut self) {
        let radius = self.opts.radius;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 1);
        for (name, func, dim) in smooth_parts(self.p) {
            let check = format!("gradient_fd_{name}");
            if func.is_zero() {
                self.skip(&check, "zero part");
                continue;
            }
            let pts: Vec<Vec<f64>> = (0..self.opts.samples)
                .map(|_| {
                    (0..dim)
                        .map(|_| rng.random_range(-radius..=radius))
                        .collect()
                })
                .collect();
            let worst = pts.iter().try_fold(0.0_f64, |acc, x| {
                let g = func.gradient(x)?;
                let fd = try_fd_gradient(|y| func.value(y), x, None)?;
                Ok::<_, Error>(acc.max(rel(&fd, &g)))
            });
            self.bound(&check, FD_TOL, worst);
        }
    }

    fn prox_layer(&mut self) {
        let gamma = self.params.gamma;
        let p = self.p;
        let (f, g) = (&p.f, &p.g);
        self.prox_checks("f", f, f.is_zero());
        self.prox_checks("g", g, g.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 2);
        let gammas = [0.25 * gamma, 0.5 * gamma, gamma];
        let bounded = f.looks_prox_bounded(&gammas, &mut rng);
        let status = if bounded { Status::Pass } else { Status::Fail };
        self.push(
            "prox_bounded_f",
            status,
            f64::from(u8::from(bounded)),
            1.0,
            None,
        );
    }

    fn prox_checks<P: Proxable + ?Sized>(&mut self, name: &str, xi: &P, zero: bool) {
        if zero {
            self.skip(&format!("prox_lipschitz_{name}"), "zero part");
            self.skip(&format!("moreau_gradient_fd_{name}"), "zero part");
            return;
        }
        let gamma = self.params.gamma;
        let limit = 1.0 / (1.0 - gamma * xi.weak_convexity()) + 1e-6;
        let probe = prox_lipschitz_probe(xi, gamma, 200, self.opts.radius, self.opts.seed);
        self.bound(&format!("prox_lipschitz_{name}"), limit, probe);
        let worst = self.worst(|z| moreau_gradient_gap(xi, gamma, z));
        self.bound(&format!("moreau_gradient_fd_{name}"), FD_TOL, worst);
    }

    fn envelope(&mut self) {
        let (p, params) = (self.p, self.params);
        let worst = self.worst(|z| {
            let r = equivalence_check(p, &params, z)?;
            Ok(r.deviation / (1.0 + vec_ops::norm(z)))
        });
        self.bound("equivalence", EQUIVALENCE_TOL, worst);
        let worst = self.worst(|z| {
            let g = env_gradient(p, &params, z)?;
            let fd = try_fd_gradient(|y| env_value(p, &params, y), z, None)?;
            Ok(rel(&fd, &g))
        });
        self.bound("envelope_gradient_fd", FD_TOL, worst);
        let worst = self.worst(|z| {
            let g = env_gradient(p, &params, z)?;
            Ok(rel(&gradient_by_terms(p, &params, z)?, &g))
        });
        self.bound("envelope_gradient_terms", 1e-8, worst);
        let worst = self.worst(|z| {
            let r = sandwich_check(p, &params, z)?;
            Ok(-(r.lower_margin.min(r.upper_margin).min(r.prox_margin)))
        });
        self.bound("sandwich", SANDWICH_SLACK, worst);
    }

    fn reductions(&mut self) {
        let (p, params) = (self.p, self.params);
        if !(p.f.is_zero() || p.g.is_zero() || p.h.is_zero()) {
            self.skip("reductions", "f, g and h are all nonzero");
            return;
        }
        let worst =
            self.worst(|z| Ok(crate::splitting::reduction_check(p, &params, z)?.max_deviation));
        self.bound("reductions", REDUCTION_TOL, worst);
    }

    fn jacobian(&mut self) {
        let (p, params) = (self.p, self.params);
        let worst = self.worst(|z| {
            let analytic = crate::analysis::jacobian_t(p, &params, z)?;
            let fd = fd_jacobian(
                |y| apply_t(p, &params, y).unwrap_or_else(|_| vec![f64::NAN; y.len()]),
                z,
                None,
            )?;
            Ok(analytic.max_abs_diff(&fd) / (1.0 + analytic.max_abs()))
        });
        match worst {
            Err(Error::HessianUnavailable(what)) => {
                self.skip("jacobian_t_fd", &format!("no Hessian for {what}"))
            }
            other => self.bound("jacobian_t_fd", FD_TOL, other),
        }
    }

    /// Fixed points built from the declared landmarks: `z* = x + gamma grad g(x)`.
    fn landmarks(&mut self) {
        let (p, params) = (self.p, self.params);
        let marks: Vec<(bool, Vec<f64>)> = p
            .landmarks
            .minimizers
            .iter()
            .map(|x| (true, x.clone()))
            .chain(p.landmarks.saddles.iter().map(|x| (false, x.clone())))
            .collect();
        if marks.is_empty() {
            self.skip("landmark_fixed_points", "no declared landmarks");
            return;
        }
        let zstars: Result<Vec<Vec<f64>>> = marks
            .iter()
            .map(|(_, x)| Ok(vec_ops::axpy(x, params.gamma, &p.g.gradient(x)?)))
            .collect();
        let zstars = match zstars {
            Ok(z) => z,
            Err(e) => {
                self.push(
                    "landmark_fixed_points",
                    Status::Fail,
                    f64::NAN,
                    FIXED_POINT_TOL,
                    Some(e.to_string()),
                );
                return;
            }
        };
        let residual = zstars.iter().try_fold(0.0_f64, |acc, z| {
            let s = dys_step(p, &params, z)?;
            Ok::<_, Error>(acc.max(s.residual() / (1.0 + vec_ops::norm(z))))
        });
        self.bound("landmark_fixed_points", FIXED_POINT_TOL, residual);

        let disagreements = zstars.iter().try_fold(0.0_f64, |acc, z| {
            let report = classify(p, &params, z)?;
            Ok::<_, Error>(acc + if report.check().is_ok() { 0.0 } else { 1.0 })
        });
        self.bound("landmark_classification", 0.0, disagreements);

        let minimizers: Vec<&Vec<f64>> = marks
            .iter()
            .zip(&zstars)
            .filter(|((m, _), _)| *m)
            .map(|(_, z)| z)
            .collect();
        if minimizers.is_empty() {
            self.skip("minimizer_correspondence", "no declared minimizers");
        } else {
            let gap = minimizers.iter().try_fold(0.0_f64, |acc, z| {
                Ok::<_, Error>(acc.max(minimizer_correspondence_check(p, &params, z)?.gap))
            });
            self.bound(
                "minimizer_correspondence",
                crate::analysis::CORRESPONDENCE_TOL,
                gap,
            );
        }

        match step_bounds(p, &params) {
            Ok(b) => {
                let in_range = match b.bound() {
                    ExtReal::Finite(v) => params.alpha < v,
                    ExtReal::PosInf => true,
                };
                if !in_range {
                    self.skip("jt_probe", "alpha is outside the step bound");
                    return;
                }
                // The probe must be positive and respect the analytic lower bound.
                let shortfall = zstars.iter().try_fold(f64::NEG_INFINITY, |acc, z| {
                    let probe = diffeo_probe(p, &params, z)?;
                    Ok::<_, Error>(acc.max(-probe).max(b.lambda_min_jt_probe - probe - 1e-8))
                });
                let note = Some(format!(
                    "analytic lower bound {:.6e}",
                    b.lambda_min_jt_probe
                ));
                match shortfall {
                    Ok(v) => {
                        let status = if v < 0.0 { Status::Pass } else { Status::Fail };
                        self.push("jt_probe", status, v, 0.0, note);
                    }
                    Err(e) => {
                        self.push("jt_probe", Status::Fail, f64::NAN, 0.0, Some(e.to_string()))
                    }
                }
            }
            Err(Error::ModeMismatch(_)) => self.skip("jt_probe", "step bounds need g = 0 or h = 0"),
            Err(e) => self.push("jt_probe", Status::Fail, f64::NAN, 0.0, Some(e.to_string())),
        }
    }

    /// Runs from a few of the sample points; converged ends must be
    /// consistent critical points, and a unique declared minimizer must be hit.
    fn solves(&mut self) {
        let (p, params) = (self.p, self.params);
        let stop = StopRule {
            tol: 1e-11,
            max_iter: 20_000,
            escape_radius: 1e8,
        };
        let unique = match (&p.landmarks.minimizers[..], p.landmarks.saddles.is_empty()) {
            ([x], true) => Some(x.clone()),
            _ => None,
        };
        let starts: Vec<Vec<f64>> = self.points.iter().take(5).cloned().collect();
        let mut converged = 0;
        let mut worst_gap = 0.0_f64;
        let mut failure = None;
        for z0 in &starts {
            match run_with(p, &params, z0, &stop, Keep::Endpoints) {
                Ok(t) if t.converged() => {
                    converged += 1;
                    match classify(p, &params, &t.final_z).and_then(|r| r.check()) {
                        // f not twice differentiable at the limit, e.g. a zero of an l1 term
                        Ok(()) | Err(Error::AssumptionThreeViolated(_)) => {}
                        Err(e) => failure = Some(e.to_string()),
                    }
                    if let Some(x) = &unique {
                        worst_gap = worst_gap.max(vec_ops::dist(&t.final_x, x));
                    }
                }
                Ok(_) => {}
                Err(e) => failure = Some(e.to_string()),
            }
        }
        let status = if failure.is_some() {
            Status::Fail
        } else {
            Status::Pass
        };
        let note = failure.or(Some(format!(
            "{converged} of {} runs converged",
            starts.len()
        )));
        self.push(
            "solve_critical_points",
            status,
            converged as f64,
            starts.len() as f64,
            note,
        );
        match unique {
            Some(_) if converged > 0 => self.bound("solve_argmin", ARGMIN_TOL, Ok(worst_gap)),
            Some(_) => self.push(
                "solve_argmin",
                Status::Fail,
                f64::NAN,
                ARGMIN_TOL,
                Some("no run converged".into()),
            ),
            None => self.skip("solve_argmin", "minimizer is not unique or not declared"),
        }
    }
}

/// `||(z - prox)/gamma - FD(xi^gamma)||`, relative.
fn moreau_gradient_gap<P: Proxable + ?Sized>(xi: &P, gamma: f64, z: &[f64]) -> Result<f64> {
    let analytic = prox(xi, gamma, z)?.envelope_gradient;
    let fd = try_fd_gradient(
        |y| envelope_value(xi, gamma, y)?.expect_finite("Moreau envelope"),
        z,
        None,
    )?;
    Ok(rel(&fd, &analytic))
}

/// Runs every check at `opts.samples` random points of `[-radius, radius]^n`.
/// Only invalid parameters are returned as errors.
pub fn run_checks(
    p: &ProblemTriple,
    params: SplitParams,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let validated = validate_params(p, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = p.n();
    let points = (0..opts.samples.max(1))
        .map(|_| {
            (0..n)
                .map(|_| rng.random_range(-opts.radius..=opts.radius))
                .collect()
        })
        .collect();
    let mut suite = Suite {
        p,
        params: validated.params,
        points,
        opts,
        results: Vec::new(),
    };
    suite.lipschitz();
    suite.gradients();
    suite.prox_layer();
    suite.envelope();
    suite.reductions();
    suite.jacobian();
    suite.landmarks();
    suite.solves();
    let passed = suite.results.iter().all(|r| r.status != Status::Fail);
    Ok(CheckReport {
        problem: p.name.clone(),
        gamma: params.gamma,
        alpha: params.alpha,
        mode: validated.mode,
        seed: opts.seed,
        samples: opts.samples,
        results: suite.results,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::default_alpha;
    use crate::registry::make_json;
    use serde_json::json;

    fn suite(name: &str, params: serde_json::Value) -> CheckReport {
        let p = make_json(name, params).unwrap();
        let gamma = 0.5 * p.gamma_limit().finite().unwrap_or(2.0);
        let alpha = default_alpha(&p, gamma, None);
        run_checks(&p, SplitParams::new(gamma, alpha), &CheckOptions::default()).unwrap()
    }

    fn assert_passes(r: &CheckReport) {
        let failed: Vec<_> = r.failures().collect();
        assert!(failed.is_empty(), "{}: {failed:#?}", r.problem);
    }

    #[test]
    fn quadratic_passes() {
        assert_passes(&suite("quadratic", json!({})));
    }

    #[test]
    fn saddle_quadratic_passes_both_splits() {
        assert_passes(&suite("saddle_quadratic", json!({"split": "fbs"})));
        assert_passes(&suite("saddle_quadratic", json!({"split": "drs"})));
    }

    #[test]
    fn nonconvex_registry_problems_pass() {
        assert_passes(&suite("matfac_toy", json!({})));
        assert_passes(&suite("quartic_well", json!({})));
        assert_passes(&suite("phase_toy", json!({})));
        assert_passes(&suite("logistic_smooth", json!({})));
        assert_passes(&suite("zero", json!({})));
    }

    #[test]
    fn report_round_trips() {
        let r = suite("quadratic", json!({"seed": 3, "n": 2}));
        let s = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.results.len(), r.results.len());
        assert!(r
            .results
            .iter()
            .any(|c| c.name == "equivalence" && c.status == Status::Pass));
    }
}
