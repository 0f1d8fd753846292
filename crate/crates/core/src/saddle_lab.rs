//! Monte-Carlo runs of the splitting from random starts, labeling where each
//! trajectory ends up relative to the known minimizers and strict saddles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::step_bounds;
use crate::error::{Error, Result};
use crate::linalg::vec_ops;
use crate::model::{ExtReal, ProblemTriple};
use crate::registry::{self, Params};
use crate::splitting::{
    run_with, validate_params, Keep, Mode, QEval, RunStatus, SplitParams, StopRule,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(flatten)]
    pub params: Params,
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>, params: serde_json::Value) -> Self {
        let params = match params {
            serde_json::Value::Object(m) => m,
            _ => Params::new(),
        };
        ProblemSpec {
            name: name.into(),
            params,
        }
    }

    pub fn build(&self) -> Result<ProblemTriple> {
        registry::make(&self.name, &self.params)
    }
}

/// Distribution of the initial `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitDist {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mean: f64,
        sigma: f64,
    },
    /// Every trial starts at this point.
    Point {
        z: Vec<f64>,
    },
}

impl Default for InitDist {
    fn default() -> Self {
        InitDist::Uniform { lo: -1.0, hi: 1.0 }
    }
}

impl InitDist {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            InitDist::Uniform { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                Err(Error::BadConfig(format!(
                    "uniform init needs lo < hi, got [{lo}, {hi}]"
                )))
            }
            InitDist::Gaussian { mean, sigma }
                if !(*sigma > 0.0) || !mean.is_finite() || !sigma.is_finite() =>
            {
                Err(Error::BadConfig(format!(
                    "gaussian init needs sigma > 0, got {sigma}"
                )))
            }
            InitDist::Point { z } if z.len() != n => Err(Error::BadConfig(format!(
                "init point has length {}, problem dimension is {n}",
                z.len()
            ))),
            _ => Ok(()),
        }
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            InitDist::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(*lo..*hi)).collect(),
            InitDist::Gaussian { mean, sigma } => {
                let d = Normal::new(*mean, *sigma).expect("validated");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            InitDist::Point { z } => z.clone(),
        }
    }
}

fn default_delta() -> f64 {
    1e-4
}

fn default_stop() -> StopRule {
    StopRule {
        tol: 1e-9,
        max_iter: 10_000,
        escape_radius: 1e6,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub problem: ProblemSpec,
    pub gamma: f64,
    pub alpha: f64,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub q_eval: QEval,
    pub trials: usize,
    #[serde(default)]
    pub init: InitDist,
    #[serde(default)]
    pub seed: u64,
    /// Strict saddles in x-space; defaults to the problem's landmarks.
    #[serde(default)]
    pub saddles: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_delta")]
    pub delta_saddle: f64,
    /// Minimizers in x-space; defaults to the problem's landmarks.
    #[serde(default)]
    pub minimizers: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_delta")]
    pub delta_min: f64,
    #[serde(default = "default_stop")]
    pub stop: StopRule,
    /// Worker threads; 0 picks the rayon default. Never affects results.
    #[serde(default)]
    pub workers: usize,
}

impl McConfig {
    pub fn new(problem: ProblemSpec, gamma: f64, alpha: f64, trials: usize) -> Self {
        McConfig {
            problem,
            gamma,
            alpha,
            mode: None,
            q_eval: QEval::Prox,
            trials,
            init: InitDist::default(),
            seed: 0,
            saddles: None,
            delta_saddle: default_delta(),
            minimizers: None,
            delta_min: default_delta(),
            stop: default_stop(),
            workers: 0,
        }
    }

    pub fn split_params(&self) -> SplitParams {
        SplitParams {
            gamma: self.gamma,
            alpha: self.alpha,
            mode: self.mode,
            q_eval: self.q_eval,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "label", content = "index", rename_all = "snake_case")]
pub enum Label {
    ConvergedToMin(usize),
    ConvergedToSaddle(usize),
    NotConverged,
    /// Diverged, or converged somewhere not on either list.
    Escaped,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::ConvergedToMin(_) => "converged_to_min",
            Label::ConvergedToSaddle(_) => "converged_to_saddle",
            Label::NotConverged => "not_converged",
            Label::Escaped => "escaped",
        }
    }

    pub fn target(&self) -> Option<usize> {
        match self {
            Label::ConvergedToMin(i) | Label::ConvergedToSaddle(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: usize,
    pub z0: Vec<f64>,
    /// `prox_{gamma g}` of the last iterate.
    pub x_final: Vec<f64>,
    pub label: Label,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub trials: usize,
    pub to_min: usize,
    pub to_saddle: usize,
    pub not_converged: usize,
    pub escaped: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    pub summary: McSummary,
    pub outcomes: Vec<TrialOutcome>,
}

struct Plan {
    problem: ProblemTriple,
    params: SplitParams,
    saddles: Vec<Vec<f64>>,
    minimizers: Vec<Vec<f64>>,
}

fn plan(cfg: &McConfig) -> Result<Plan> {
    if cfg.trials == 0 {
        return Err(Error::BadConfig("trials must be at least 1".into()));
    }
    if !(cfg.delta_saddle > 0.0 && cfg.delta_min > 0.0) {
        return Err(Error::BadConfig(
            "delta_saddle and delta_min must be positive".into(),
        ));
    }
    if !(cfg.stop.tol > 0.0) || cfg.stop.max_iter == 0 {
        return Err(Error::BadConfig(
            "stop.tol must be positive and stop.max_iter at least 1".into(),
        ));
    }
    let problem = cfg.problem.build()?;
    let n = problem.n();
    cfg.init.validate(n)?;
    let validated = validate_params(&problem, cfg.split_params())?;
    let params = validated.params;
    let bounds = step_bounds(&problem, &params).map_err(|e| match e {
        Error::ModeMismatch(m) => Error::BadConfig(format!(
            "saddle experiments need a DRS or FBS splitting: {m}"
        )),
        other => other,
    })?;
    if let ExtReal::Finite(b) = bounds.bound() {
        if cfg.alpha >= b {
            return Err(Error::BadConfig(format!(
                "alpha = {} is not below the step bound {b} for mode {}",
                cfg.alpha, validated.mode
            )));
        }
    }
    let saddles = cfg
        .saddles
        .clone()
        .unwrap_or_else(|| problem.landmarks.saddles.clone());
    let minimizers = cfg
        .minimizers
        .clone()
        .unwrap_or_else(|| problem.landmarks.minimizers.clone());
    for pt in saddles.iter().chain(&minimizers) {
        if pt.len() != n {
            return Err(Error::BadConfig(format!(
                "attractor {pt:?} does not have dimension {n}"
            )));
        }
    }
    for s in &saddles {
        for m in &minimizers {
            if vec_ops::dist(s, m) <= cfg.delta_saddle + cfg.delta_min {
                return Err(Error::BadConfig(format!(
                    "saddle {s:?} and minimizer {m:?} overlap at the declared radii"
                )));
            }
        }
    }
    Ok(Plan {
        problem,
        params,
        saddles,
        minimizers,
    })
}

fn nearest(points: &[Vec<f64>], x: &[f64], radius: f64) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, vec_ops::dist(p, x)))
        .filter(|(_, d)| *d <= radius)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// The generator for trial `index`: stream `index` of the seeded ChaCha8.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_trial(cfg: &McConfig, plan: &Plan, index: usize) -> Result<TrialOutcome> {
    let mut rng = trial_rng(cfg.seed, index);
    let z0 = cfg.init.sample(plan.problem.n(), &mut rng);
    let traj = run_with(&plan.problem, &plan.params, &z0, &cfg.stop, Keep::Endpoints)?;
    let label = match traj.status {
        RunStatus::Converged => {
            if let Some(i) = nearest(&plan.saddles, &traj.final_x, cfg.delta_saddle) {
                Label::ConvergedToSaddle(i)
            } else if let Some(i) = nearest(&plan.minimizers, &traj.final_x, cfg.delta_min) {
                Label::ConvergedToMin(i)
            } else {
                Label::Escaped
            }
        }
        RunStatus::MaxIter => Label::NotConverged,
        RunStatus::Diverged => Label::Escaped,
    };
    Ok(TrialOutcome {
        index,
        z0,
        x_final: traj.final_x,
        label,
        iterations: traj.iterations,
        residual: traj.final_residual,
    })
}

/// Runs all trials. Trial `i` depends only on `(seed, i)`, so the worker
/// count never changes the outcome.
pub fn mc_run(cfg: &McConfig) -> Result<McOutcome> {
    let plan = plan(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::BadConfig(format!("thread pool: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, &plan, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let count = |f: fn(&Label) -> bool| outcomes.iter().filter(|o| f(&o.label)).count();
    let summary = McSummary {
        trials: cfg.trials,
        to_min: count(|l| matches!(l, Label::ConvergedToMin(_))),
        to_saddle: count(|l| matches!(l, Label::ConvergedToSaddle(_))),
        not_converged: count(|l| matches!(l, Label::NotConverged)),
        escaped: count(|l| matches!(l, Label::Escaped)),
        seed: cfg.seed,
        gamma: Some(cfg.gamma),
        alpha: Some(cfg.alpha),
        mode: plan.params.mode,
    };
    Ok(McOutcome { summary, outcomes })
}

/// One row per trial: `trial,z0_*,x_*,label,target,iterations,residual`.
pub fn outcomes_csv(outcomes: &[TrialOutcome]) -> String {
    let n = outcomes.first().map_or(0, |o| o.z0.len());
    let mut out = String::from("trial");
    for i in 0..n {
        out.push_str(&format!(",z0_{i}"));
    }
    for i in 0..n {
        out.push_str(&format!(",x_{i}"));
    }
    out.push_str(",label,target,iterations,residual\n");
    for o in outcomes {
        out.push_str(&o.index.to_string());
        for v in o.z0.iter().chain(&o.x_final) {
            out.push_str(&format!(",{v:.16e}"));
        }
        let target = o.label.target().map_or(String::new(), |t| t.to_string());
        out.push_str(&format!(
            ",{},{target},{},{:.16e}\n",
            o.label.name(),
            o.iterations,
            o.residual
        ));
    }
    out
}
