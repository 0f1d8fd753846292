use std::path::{Path, PathBuf};

use dysenv::envelope::{equivalence_check, evaluate};
use dysenv::saddle_lab::{mc_run, outcomes_csv, McSummary};
use dysenv::splitting::{run_with, trajectory_csv};
use dysenv::{
    run_checks, step_bounds, CheckReport, Constants, EnvelopeEval, EquivalenceReport, Mode, QEval,
    RunStatus, StepBounds,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{to_json, write_atomic};

/// Flags shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub q_at_z: bool,
}

/// What a command prints and whether it counts as success.
pub struct Emitted {
    pub json: String,
    pub exit_code: i32,
}

impl Emitted {
    fn ok(json: String) -> Self {
        Emitted { json, exit_code: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub mode: Mode,
    pub q_eval: QEval,
    pub status: RunStatus,
    pub iterations: usize,
    pub final_z: Vec<f64>,
    pub final_x: Vec<f64>,
    pub final_residual: f64,
    pub trajectory_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub z: Vec<f64>,
    pub eval: EnvelopeEval,
    pub equivalence: EquivalenceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub problem: String,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub mode: Mode,
    pub points: Vec<EnvelopePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub problem: String,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub constants: Constants,
    #[serde(flatten)]
    pub bounds: StepBounds,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    fn new(cfg: &RunConfig, o: &Overrides) -> Self {
        Ctx {
            seed: o.seed.unwrap_or(cfg.seed),
            out: o.out.clone().or_else(|| cfg.output.dir.clone()),
        }
    }

    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        if let Some(dir) = &self.out {
            write_atomic(&Path::new(dir).join(name), contents)?;
        }
        Ok(())
    }
}

pub fn solve(cfg: &RunConfig, o: &Overrides) -> CliResult<Emitted> {
    let ctx = Ctx::new(cfg, o);
    let p = cfg.build_problem()?;
    let params = cfg.split_params(&p, o.q_at_z)?;
    let z0 = cfg.start_point(p.n())?;
    let t = run_with(&p, &params, &z0, &cfg.stop_rule(), cfg.keep())?;
    let report = SolveReport {
        problem: p.name.clone(),
        seed: ctx.seed,
        gamma: params.gamma,
        alpha: params.alpha,
        mode: params.resolve_mode(&p),
        q_eval: params.q_eval,
        status: t.status,
        iterations: t.iterations,
        final_z: t.final_z.clone(),
        final_x: t.final_x.clone(),
        final_residual: t.final_residual,
        trajectory_rows: t.records.len(),
    };
    let json = to_json(&report);
    ctx.write("trajectory.csv", &trajectory_csv(&t.records))?;
    ctx.write("solve.json", &json)?;
    if let Err(e) = t.ensure_converged() {
        eprintln!("error: {e}");
        return Ok(Emitted { json, exit_code: 3 });
    }
    Ok(Emitted::ok(json))
}

pub fn envelope(cfg: &RunConfig, o: &Overrides) -> CliResult<Emitted> {
    let ctx = Ctx::new(cfg, o);
    let p = cfg.build_problem()?;
    let params = cfg.split_params(&p, o.q_at_z)?;
    let points = cfg
        .eval_points(p.n())?
        .into_iter()
        .map(|z| {
            Ok(EnvelopePoint {
                eval: evaluate(&p, &params, &z)?,
                equivalence: equivalence_check(&p, &params, &z)?,
                z,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = EnvelopeReport {
        problem: p.name.clone(),
        seed: ctx.seed,
        gamma: params.gamma,
        alpha: params.alpha,
        mode: params.resolve_mode(&p),
        points,
    };
    let json = to_json(&report);
    ctx.write("envelope.json", &json)?;
    Ok(Emitted::ok(json))
}

pub fn check(cfg: &RunConfig, o: &Overrides) -> CliResult<Emitted> {
    let ctx = Ctx::new(cfg, o);
    let p = cfg.build_problem()?;
    let params = cfg.split_params(&p, o.q_at_z)?;
    let report: CheckReport = run_checks(&p, params, &cfg.check_options(ctx.seed))?;
    let json = to_json(&report);
    ctx.write("check.json", &json)?;
    if let Err(e) = report.ensure_passed() {
        eprintln!("error: {e}");
        return Ok(Emitted { json, exit_code: 4 });
    }
    Ok(Emitted::ok(json))
}

pub fn saddle_mc(cfg: &RunConfig, o: &Overrides) -> CliResult<Emitted> {
    let ctx = Ctx::new(cfg, o);
    let p = cfg.build_problem()?;
    let params = cfg.split_params(&p, o.q_at_z)?;
    let mc = cfg.mc_config(params, ctx.seed, o.workers);
    let out = mc_run(&mc)?;
    let summary: &McSummary = &out.summary;
    let json = to_json(summary);
    ctx.write("mc_summary.json", &json)?;
    if cfg.output.per_trial_csv {
        ctx.write("mc_trials.csv", &outcomes_csv(&out.outcomes))?;
    }
    Ok(Emitted::ok(json))
}

pub fn bounds(cfg: &RunConfig, o: &Overrides) -> CliResult<Emitted> {
    let ctx = Ctx::new(cfg, o);
    let p = cfg.build_problem()?;
    let params = cfg.split_params(&p, o.q_at_z)?;
    let report = BoundsReport {
        problem: p.name.clone(),
        seed: ctx.seed,
        gamma: params.gamma,
        alpha: params.alpha,
        constants: p.constants(),
        bounds: step_bounds(&p, &params)?,
    };
    let json = to_json(&report);
    ctx.write("bounds.json", &json)?;
    Ok(Emitted::ok(json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn reports_round_trip() {
        let o = Overrides {
            seed: Some(9),
            ..Overrides::default()
        };
        let c = cfg(r#"{"problem": {"name": "quadratic", "seed": 1}, "start": [0.5, -0.5, 1.0]}"#);
        let s: SolveReport = serde_json::from_str(&solve(&c, &o).unwrap().json).unwrap();
        assert_eq!((s.seed, s.status), (9, RunStatus::Converged));
        let e: EnvelopeReport = serde_json::from_str(&envelope(&c, &o).unwrap().json).unwrap();
        assert_eq!(e.points.len(), 1);
        let k: CheckReport = serde_json::from_str(&check(&c, &o).unwrap().json).unwrap();
        assert!(k.passed);

        let c = cfg(
            r#"{"problem": {"name": "saddle_quadratic"}, "splitting": {"gamma": 0.5}, "experiment": {"trials": 20}}"#,
        );
        let m: McSummary = serde_json::from_str(&saddle_mc(&c, &o).unwrap().json).unwrap();
        assert_eq!((m.trials, m.seed, m.to_saddle), (20, 9, 0));
        let b: BoundsReport = serde_json::from_str(&bounds(&c, &o).unwrap().json).unwrap();
        assert_eq!(b.bounds.alpha2, Some(dysenv::ExtReal::Finite(3.0)));
    }
}
