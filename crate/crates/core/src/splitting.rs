//! The Davis-Yin operator `T`, its DRS/FBS/BFS/GD specializations, parameter
//! validation, and the fixed-point iteration driver.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::envelope;
use crate::error::{Error, GammaBound, Result};
use crate::linalg::vec_ops;
use crate::model::ProblemTriple;
use crate::moreau::prox_point;

/// Which specialization of the three-operator iteration is in play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All three parts present.
    Dys,
    /// `h = 0`: Douglas-Rachford.
    Drs,
    /// `g = 0`: forward-backward.
    Fbs,
    /// `f = 0`: backward-forward.
    Bfs,
    /// `f = g = 0`: gradient descent on `h(L.)`.
    Gd,
}

impl Mode {
    /// The most specific mode for the given zero pattern.
    pub fn detect(p: &ProblemTriple) -> Mode {
        match (p.f.is_zero(), p.g.is_zero(), p.h.is_zero()) {
            (true, true, _) => Mode::Gd,
            (true, false, _) => Mode::Bfs,
            (false, true, _) => Mode::Fbs,
            (false, false, true) => Mode::Drs,
            (false, false, false) => Mode::Dys,
        }
    }

    /// Whether the problem's zero pattern allows this mode.
    pub fn compatible_with(self, p: &ProblemTriple) -> bool {
        match self {
            Mode::Dys => true,
            Mode::Drs => p.h.is_zero(),
            Mode::Fbs => p.g.is_zero(),
            Mode::Bfs => p.f.is_zero(),
            Mode::Gd => p.f.is_zero() && p.g.is_zero(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dys => "dys",
            Mode::Drs => "drs",
            Mode::Fbs => "fbs",
            Mode::Bfs => "bfs",
            Mode::Gd => "gd",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "dys" => Ok(Mode::Dys),
            "drs" => Ok(Mode::Drs),
            "fbs" => Ok(Mode::Fbs),
            "bfs" => Ok(Mode::Bfs),
            "gd" => Ok(Mode::Gd),
            other => Err(Error::ModeMismatch(format!("unknown mode `{other}`"))),
        }
    }
}

/// Where `q = L^T grad h(L .)` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QEval {
    /// At `prox_{gamma g}(z)`; keeps `T` an exact variable-metric gradient
    /// step on the envelope.
    #[default]
    Prox,
    /// At `z` itself.
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub gamma: f64,
    pub alpha: f64,
    /// `None` means detect from the problem.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub q_eval: QEval,
}

impl SplitParams {
    pub fn new(gamma: f64, alpha: f64) -> Self {
        SplitParams {
            gamma,
            alpha,
            mode: None,
            q_eval: QEval::Prox,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_q_eval(mut self, q_eval: QEval) -> Self {
        self.q_eval = q_eval;
        self
    }

    pub fn resolve_mode(&self, p: &ProblemTriple) -> Mode {
        self.mode.unwrap_or_else(|| Mode::detect(p))
    }
}

/// Which standing assumptions the validated parameters satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    /// `gamma < 1/(L_g + L_h ||L||^2)`.
    pub smoothness: bool,
    /// `gamma < 1/beta_f`.
    pub weak_convexity: bool,
    /// `L_f` declared and `gamma < 1/L_f`.
    pub hessian_bound: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidatedParams {
    pub params: SplitParams,
    pub mode: Mode,
    pub assumptions: Assumptions,
}

fn gamma_bound(gamma: f64, constant: f64, bound: GammaBound) -> Result<()> {
    if constant > 0.0 && gamma * constant >= 1.0 {
        return Err(Error::GammaOutOfRange {
            gamma,
            bound,
            limit: 1.0 / constant,
        });
    }
    Ok(())
}

/// Checks `gamma` against every bound the envelope theory uses and resolves
/// the mode.
pub fn validate_params(p: &ProblemTriple, params: SplitParams) -> Result<ValidatedParams> {
    let gamma = params.gamma;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::GammaOutOfRange {
            gamma,
            bound: GammaBound::Positive,
            limit: 0.0,
        });
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::AlphaNonPositive(params.alpha));
    }
    let c = p.constants();
    gamma_bound(gamma, c.smooth_part(), GammaBound::Smoothness)?;
    gamma_bound(gamma, c.beta_f, GammaBound::WeakConvexity)?;
    if let Some(l_f) = c.l_f {
        gamma_bound(gamma, l_f, GammaBound::HessianBound)?;
    }
    let mode = params.resolve_mode(p);
    if !mode.compatible_with(p) {
        return Err(Error::ModeMismatch(format!(
            "mode {mode} requested but problem `{}` detects as {}",
            p.name,
            Mode::detect(p)
        )));
    }
    Ok(ValidatedParams {
        params: SplitParams {
            mode: Some(mode),
            ..params
        },
        mode,
        assumptions: Assumptions {
            smoothness: true,
            weak_convexity: true,
            hessian_bound: c.l_f.is_some(),
        },
    })
}

/// Intermediates of one application of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DysState {
    pub z: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub proxg: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    pub z_next: Vec<f64>,
}

impl DysState {
    pub fn residual(&self) -> f64 {
        vec_ops::norm(&self.w)
    }

    /// `r - gamma q`, the argument of `prox_{gamma f}`.
    pub fn prox_f_arg(&self, gamma: f64) -> Vec<f64> {
        vec_ops::axpy(&self.r, -gamma, &self.q)
    }
}

/// `L^T grad h(L x)`, or zero when `h` vanishes.
pub fn q_at(p: &ProblemTriple, x: &[f64]) -> Result<Vec<f64>> {
    if p.h.is_zero() {
        return Ok(vec![0.0; p.n()]);
    }
    Ok(p.l.adjoint(&p.h.gradient(&p.l.apply(x))?))
}

fn check_point(p: &ProblemTriple, z: &[f64]) -> Result<()> {
    if z.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "problem `{}` lives in R^{}, got a point in R^{}",
            p.name,
            p.n(),
            z.len()
        )));
    }
    if !vec_ops::all_finite(z) {
        return Err(Error::NonFiniteValue("iterate".into()));
    }
    Ok(())
}

/// One application of `T`, keeping every intermediate.
pub fn dys_step(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<DysState> {
    check_point(p, z)?;
    let gamma = params.gamma;
    let proxg = prox_point(&p.g, gamma, z)?;
    let q = match params.q_eval {
        QEval::Prox => q_at(p, &proxg)?,
        QEval::Z => q_at(p, z)?,
    };
    let r: Vec<f64> = proxg.iter().zip(z).map(|(x, z)| 2.0 * x - z).collect();
    let s = vec_ops::axpy(&r, -gamma, &q);
    let pf = prox_point(&p.f, gamma, &s)?;
    let w = vec_ops::sub(&pf, &proxg);
    let z_next = vec_ops::axpy(z, params.alpha, &w);
    Ok(DysState {
        z: z.to_vec(),
        q,
        r,
        proxg,
        p: pf,
        w,
        z_next,
    })
}

/// `T(z)` only.
pub fn apply_t(p: &ProblemTriple, params: &SplitParams, z: &[f64]) -> Result<Vec<f64>> {
    Ok(dys_step(p, params, z)?.z_next)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub max_iter: usize,
    /// Stop as diverged once `||z||` exceeds this.
    pub escape_radius: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            tol: 1e-9,
            max_iter: 100_000,
            escape_radius: 1e12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub z: Vec<f64>,
    pub residual: f64,
    pub envelope: f64,
    /// Seconds since the run started.
    pub elapsed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub status: RunStatus,
    /// Number of applications of `T`.
    pub iterations: usize,
    pub final_z: Vec<f64>,
    /// `prox_{gamma g}` of the final iterate.
    pub final_x: Vec<f64>,
    pub final_residual: f64,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged() {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.final_residual,
            })
        }
    }
}

/// How much of the trajectory [`run_with`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Every,
    /// The initial and terminal records only.
    Endpoints,
}

/// Iterates `z <- T z` until `||w|| <= tol (1 + ||z||)`, recording every
/// iteration.
pub fn run(
    p: &ProblemTriple,
    params: &SplitParams,
    z0: &[f64],
    stop: &StopRule,
) -> Result<Trajectory> {
    run_with(p, params, z0, stop, Keep::Every)
}

pub fn run_with(
    p: &ProblemTriple,
    params: &SplitParams,
    z0: &[f64],
    stop: &StopRule,
    keep: Keep,
) -> Result<Trajectory> {
    check_point(p, z0)?;
    let start = Instant::now();
    let mut records = Vec::new();
    let mut z = z0.to_vec();
    let mut k = 0;
    loop {
        let znorm = vec_ops::norm(&z);
        if !(znorm <= stop.escape_radius) {
            let x = z.clone();
            return Ok(finish(records, RunStatus::Diverged, k, z, x, f64::INFINITY));
        }
        let state = dys_step(p, params, &z)?;
        let residual = state.residual();
        let env = match params.q_eval {
            QEval::Prox => envelope::value_from_state(p, params.gamma, &state)?,
            QEval::Z => envelope::env_value(p, params, &z)?,
        };
        let done = residual <= stop.tol * (1.0 + znorm);
        let record = TrajectoryRecord {
            iteration: k,
            z: z.clone(),
            residual,
            envelope: env,
            elapsed: start.elapsed().as_secs_f64(),
        };
        let terminal = done || k >= stop.max_iter;
        if keep == Keep::Every || k == 0 || terminal {
            records.push(record);
        }
        if done {
            return Ok(finish(
                records,
                RunStatus::Converged,
                k,
                z,
                state.proxg,
                residual,
            ));
        }
        if k >= stop.max_iter {
            return Ok(finish(
                records,
                RunStatus::MaxIter,
                k,
                z,
                state.proxg,
                residual,
            ));
        }
        z = state.z_next;
        k += 1;
    }
}

fn finish(
    records: Vec<TrajectoryRecord>,
    status: RunStatus,
    iterations: usize,
    final_z: Vec<f64>,
    final_x: Vec<f64>,
    final_residual: f64,
) -> Trajectory {
    Trajectory {
        records,
        status,
        iterations,
        final_z,
        final_x,
        final_residual,
    }
}

/// CSV with header `iter,z_0..z_{n-1},resid,envelope`.
pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let n = records.first().map_or(0, |r| r.z.len());
    let mut out = String::from("iter");
    for i in 0..n {
        out.push_str(&format!(",z_{i}"));
    }
    out.push_str(",resid,envelope\n");
    for r in records {
        out.push_str(&r.iteration.to_string());
        for v in &r.z {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push_str(&format!(",{:.16e},{:.16e}\n", r.residual, r.envelope));
    }
    out
}

/// Deviation of the general step from one specialized formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionDeviation {
    pub mode: Mode,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub checks: Vec<ReductionDeviation>,
    pub max_deviation: f64,
}

/// Compares `T(z)` with every specialized formula the zero pattern allows,
/// each coded directly from its own closed expression.
pub fn reduction_check(
    p: &ProblemTriple,
    params: &SplitParams,
    z: &[f64],
) -> Result<ReductionReport> {
    let tz = apply_t(p, params, z)?;
    let (gamma, alpha) = (params.gamma, params.alpha);
    let q_point = |x: &[f64]| -> Result<Vec<f64>> {
        match params.q_eval {
            QEval::Prox => q_at(p, x),
            QEval::Z => q_at(p, z),
        }
    };
    let mut checks = Vec::new();
    let mut push = |mode: Mode, v: Vec<f64>| {
        checks.push(ReductionDeviation {
            mode,
            deviation: vec_ops::dist(&tz, &v),
        })
    };
    if p.h.is_zero() {
        // z + alpha (prox_f(2 prox_g z - z) - prox_g z)
        let xg = prox_point(&p.g, gamma, z)?;
        let refl: Vec<f64> = xg.iter().zip(z).map(|(a, b)| 2.0 * a - b).collect();
        let pf = prox_point(&p.f, gamma, &refl)?;
        let v: Vec<f64> = (0..z.len())
            .map(|i| z[i] + alpha * (pf[i] - xg[i]))
            .collect();
        push(Mode::Drs, v);
    }
    if p.g.is_zero() {
        // z + alpha (prox_f(z - gamma q) - z)
        let q = q_at(p, z)?;
        let pf = prox_point(&p.f, gamma, &vec_ops::axpy(z, -gamma, &q))?;
        let v: Vec<f64> = (0..z.len())
            .map(|i| z[i] + alpha * (pf[i] - z[i]))
            .collect();
        push(Mode::Fbs, v);
    }
    if p.f.is_zero() {
        // z + alpha (prox_g z - gamma q - z)
        let xg = prox_point(&p.g, gamma, z)?;
        let q = q_point(&xg)?;
        let v: Vec<f64> = (0..z.len())
            .map(|i| z[i] + alpha * (xg[i] - gamma * q[i] - z[i]))
            .collect();
        push(Mode::Bfs, v);
    }
    if p.f.is_zero() && p.g.is_zero() {
        // z - alpha gamma q
        let q = q_at(p, z)?;
        let v: Vec<f64> = (0..z.len()).map(|i| z[i] - alpha * gamma * q[i]).collect();
        push(Mode::Gd, v);
    }
    if checks.is_empty() {
        return Err(Error::ModeMismatch(
            "no reduction applies: f, g and h are all nonzero".into(),
        ));
    }
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(ReductionReport {
        checks,
        max_deviation,
    })
}
