//! Davis-Yin splitting for `f + g + h(L .)`, the Davis-Yin envelope, and
//! numerical checks of its strict-saddle avoidance properties.

pub mod analysis;
pub mod checks;
pub mod envelope;
pub mod error;
pub mod fd;
pub mod functions;
pub mod linalg;
pub mod model;
pub mod moreau;
pub mod registry;
pub mod saddle_lab;
pub mod splitting;

pub use analysis::{classify, step_bounds, Class, PointReport, StepBounds};
pub use checks::{run_checks, CheckOptions, CheckReport};
pub use envelope::{EnvelopeEval, EquivalenceReport};
pub use error::{Error, ErrorCategory, GammaBound, Result};
pub use linalg::{solve_linear, sym_eigen, Mat, SymEigen};
pub use model::{
    phi_value, Constants, ExtReal, Function, Landmarks, LinearMap, ProblemTriple, Proxable,
    ProxableFn, SmoothFn,
};
pub use moreau::{prox, ProxResult};
pub use saddle_lab::{mc_run, InitDist, Label, McConfig, McOutcome, McSummary, ProblemSpec};
pub use splitting::{
    apply_t, dys_step, run, run_with, validate_params, DysState, Keep, Mode, QEval, RunStatus,
    SplitParams, StopRule, Trajectory,
};
