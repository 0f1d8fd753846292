//! Strict JSON run configuration.

use std::path::PathBuf;

use dysenv::analysis::default_alpha;
use dysenv::saddle_lab::{InitDist, McConfig, ProblemSpec};
use dysenv::splitting::{validate_params, Keep};
use dysenv::{CheckOptions, Mode, ProblemTriple, QEval, SplitParams, StopRule};
use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingBlock {
    /// Defaults to half the admissible limit.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Defaults to `0.9 min(step bound, 1)`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Evaluate `q` at `z` instead of at `prox_{gamma g}(z)`.
    #[serde(default)]
    pub q_at_z: bool,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_iter() -> usize {
    100_000
}

fn default_escape() -> f64 {
    1e12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopBlock {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_escape")]
    pub escape_radius: f64,
}

impl Default for StopBlock {
    fn default() -> Self {
        StopBlock {
            tol: default_tol(),
            max_iter: default_max_iter(),
            escape_radius: default_escape(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeepRecords {
    #[default]
    Every,
    Endpoints,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Artifact directory; `--out` takes precedence.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub keep: KeepRecords,
    /// Write the per-trial CSV of `saddle-mc` next to its summary.
    #[serde(default = "yes")]
    pub per_trial_csv: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: None,
            keep: KeepRecords::Every,
            per_trial_csv: true,
        }
    }
}

fn default_trials() -> usize {
    1000
}

fn default_delta() -> f64 {
    1e-4
}

fn default_mc_iter() -> usize {
    10_000
}

fn default_mc_escape() -> f64 {
    1e6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub init: InitDist,
    #[serde(default)]
    pub saddles: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_delta")]
    pub delta_saddle: f64,
    #[serde(default)]
    pub minimizers: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_delta")]
    pub delta_min: f64,
    #[serde(default = "default_mc_iter")]
    pub max_iter: usize,
    #[serde(default = "default_mc_escape")]
    pub escape_radius: f64,
    #[serde(default)]
    pub workers: usize,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        ExperimentBlock {
            trials: default_trials(),
            init: InitDist::default(),
            saddles: None,
            delta_saddle: default_delta(),
            minimizers: None,
            delta_min: default_delta(),
            max_iter: default_mc_iter(),
            escape_radius: default_mc_escape(),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    #[serde(default = "CheckBlock::default_samples")]
    pub samples: usize,
    #[serde(default = "CheckBlock::default_radius")]
    pub radius: f64,
}

impl CheckBlock {
    fn default_samples() -> usize {
        20
    }

    fn default_radius() -> f64 {
        2.0
    }
}

impl Default for CheckBlock {
    fn default() -> Self {
        CheckBlock {
            samples: Self::default_samples(),
            radius: Self::default_radius(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub splitting: SplittingBlock,
    #[serde(default)]
    pub stop: StopBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub check: CheckBlock,
    /// Initial point for `solve`; zero by default.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    /// Evaluation points for `envelope`; `[start]` by default.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub seed: u64,
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::schema(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn at_least_one(key: &str, v: usize) -> CliResult<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(CliError::schema(key, "must be at least 1"))
    }
}

/// Parses and checks everything that does not need the problem itself.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            Category::Data => CliError::schema(key, inner.to_string()),
            _ => CliError::Parse {
                line: inner.line(),
                message: inner.to_string(),
            },
        }
    })?;
    de.end().map_err(|e| CliError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> CliResult<()> {
        if let Some(g) = self.splitting.gamma {
            positive("splitting.gamma", g)?;
        }
        if let Some(a) = self.splitting.alpha {
            positive("splitting.alpha", a)?;
        }
        positive("stop.tol", self.stop.tol)?;
        at_least_one("stop.max_iter", self.stop.max_iter)?;
        positive("stop.escape_radius", self.stop.escape_radius)?;
        let e = &self.experiment;
        at_least_one("experiment.trials", e.trials)?;
        positive("experiment.delta_saddle", e.delta_saddle)?;
        positive("experiment.delta_min", e.delta_min)?;
        at_least_one("experiment.max_iter", e.max_iter)?;
        positive("experiment.escape_radius", e.escape_radius)?;
        at_least_one("check.samples", self.check.samples)?;
        positive("check.radius", self.check.radius)?;
        Ok(())
    }

    pub fn build_problem(&self) -> CliResult<ProblemTriple> {
        Ok(self.problem.build()?)
    }

    /// Fills in `gamma` and `alpha` and revalidates against the problem.
    pub fn split_params(&self, p: &ProblemTriple, q_at_z: bool) -> CliResult<SplitParams> {
        let s = &self.splitting;
        let gamma = s
            .gamma
            .unwrap_or_else(|| 0.5 * p.gamma_limit().finite().unwrap_or(2.0));
        let alpha = s.alpha.unwrap_or_else(|| default_alpha(p, gamma, s.mode));
        let params = SplitParams {
            gamma,
            alpha,
            mode: s.mode,
            q_eval: if q_at_z || s.q_at_z {
                QEval::Z
            } else {
                QEval::Prox
            },
        };
        Ok(validate_params(p, params)?.params)
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            tol: self.stop.tol,
            max_iter: self.stop.max_iter,
            escape_radius: self.stop.escape_radius,
        }
    }

    pub fn keep(&self) -> Keep {
        match self.output.keep {
            KeepRecords::Every => Keep::Every,
            KeepRecords::Endpoints => Keep::Endpoints,
        }
    }

    pub fn start_point(&self, n: usize) -> CliResult<Vec<f64>> {
        let z = self.start.clone().unwrap_or_else(|| vec![0.0; n]);
        if z.len() != n {
            return Err(CliError::schema(
                "start",
                format!("has length {}, problem dimension is {n}", z.len()),
            ));
        }
        Ok(z)
    }

    pub fn eval_points(&self, n: usize) -> CliResult<Vec<Vec<f64>>> {
        let pts = match &self.points {
            Some(pts) => pts.clone(),
            None => vec![self.start_point(n)?],
        };
        if let Some(bad) = pts.iter().position(|z| z.len() != n) {
            return Err(CliError::schema(
                format!("points[{bad}]"),
                format!("problem dimension is {n}"),
            ));
        }
        Ok(pts)
    }

    pub fn check_options(&self, seed: u64) -> CheckOptions {
        CheckOptions {
            samples: self.check.samples,
            radius: self.check.radius,
            seed,
        }
    }

    pub fn mc_config(&self, params: SplitParams, seed: u64, workers: Option<usize>) -> McConfig {
        let e = &self.experiment;
        McConfig {
            problem: self.problem.clone(),
            gamma: params.gamma,
            alpha: params.alpha,
            mode: params.mode,
            q_eval: params.q_eval,
            trials: e.trials,
            init: e.init.clone(),
            seed,
            saddles: e.saddles.clone(),
            delta_saddle: e.delta_saddle,
            minimizers: e.minimizers.clone(),
            delta_min: e.delta_min,
            stop: StopRule {
                tol: self.stop.tol,
                max_iter: e.max_iter,
                escape_radius: e.escape_radius,
            },
            workers: workers.unwrap_or(e.workers),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(
            r#"{"problem": {"name": "zero", "n": 2}, "splitting": {"gamma": 0.5, "alpha": 1.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.problem.name, "zero");
        assert_eq!(cfg.stop, StopBlock::default());
        assert_eq!(cfg.experiment, ExperimentBlock::default());
        let p = cfg.build_problem().unwrap();
        let params = cfg.split_params(&p, false).unwrap();
        assert_eq!((params.gamma, params.alpha), (0.5, 1.0));
    }

    #[test]
    fn negative_gamma_names_the_key() {
        let err = parse_config(r#"{"problem": {"name": "zero"}, "splitting": {"gamma": -1}}"#)
            .unwrap_err();
        assert!(
            matches!(&err, CliError::Schema { key, .. } if key == "splitting.gamma"),
            "{err}"
        );
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_listed() {
        let err = parse_config(r#"{"problem": {"name": "zero"}, "splitting": {"gama": 0.5}}"#)
            .unwrap_err();
        match err {
            CliError::Schema { key, message } => {
                assert!(key.starts_with("splitting"), "{key}");
                assert!(message.contains("gama"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let err = parse_config("{\n  \"problem\": {\"name\": \"zero\"},\n  oops\n}").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = parse_config(r#"{"problem": {"name": "zero"}} trailing"#).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn gamma_is_revalidated_against_the_problem() {
        let cfg = parse_config(
            r#"{"problem": {"name": "saddle_quadratic"}, "splitting": {"gamma": 1.5}}"#,
        )
        .unwrap();
        let p = cfg.build_problem().unwrap();
        let err = cfg.split_params(&p, false).unwrap_err();
        assert!(matches!(
            err,
            CliError::Core(dysenv::Error::GammaOutOfRange { .. })
        ));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_round_trips() {
        let cfg = parse_config(
            r#"{"problem": {"name": "quadratic", "seed": 3}, "experiment": {"trials": 5}}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
