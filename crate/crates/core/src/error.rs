use std::fmt;

/// Which admissible step-size bound a `gamma` violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaBound {
    /// `gamma > 0`.
    Positive,
    /// `gamma < 1/(L_g + L_h ||L||^2)`.
    Smoothness,
    /// `gamma < 1/beta_f`.
    WeakConvexity,
    /// `gamma < 1/L_f`.
    HessianBound,
    /// `gamma < 1/beta` for the function being proxed.
    Prox,
}

impl fmt::Display for GammaBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GammaBound::Positive => "gamma > 0",
            GammaBound::Smoothness => "gamma < 1/(L_g + L_h*||L||^2)",
            GammaBound::WeakConvexity => "gamma < 1/beta_f",
            GammaBound::HessianBound => "gamma < 1/L_f",
            GammaBound::Prox => "gamma < 1/beta",
        };
        f.write_str(s)
    }
}

/// Coarse error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Invariant,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("ill-conditioned matrix: condition estimate {0:e}")]
    IllConditioned(f64),

    #[error("matrix is not symmetric: asymmetry {0:e}")]
    NotSymmetric(f64),

    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error("function value is +inf at {0}")]
    InfiniteValue(String),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    EigenNotConverged(usize),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown parameter `{key}` for problem `{problem}`")]
    UnknownParam { problem: String, key: String },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("gamma = {gamma} out of range: requires {bound} (limit {limit})")]
    GammaOutOfRange {
        gamma: f64,
        bound: GammaBound,
        limit: f64,
    },

    #[error("alpha must be positive, got {0}")]
    AlphaNonPositive(f64),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("missing constant {0}")]
    MissingConstant(&'static str),

    #[error("gradient unavailable for {0}")]
    GradientUnavailable(String),

    #[error("hessian unavailable for {0}")]
    HessianUnavailable(String),

    #[error(
        "prox subproblem did not converge: {iterations} iterations, gradient norm {grad_norm:e}"
    )]
    SubproblemNotConverged { iterations: usize, grad_norm: f64 },

    #[error("iteration did not converge: {iterations} iterations, residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("metric A(z) is singular or ill-conditioned: condition estimate {0:e}")]
    MetricSingular(f64),

    #[error("point is not critical: gradient norm {grad_norm:e} exceeds {tol:e}")]
    NotCritical { grad_norm: f64, tol: f64 },

    #[error("second-order condition on f violated: {0}")]
    AssumptionThreeViolated(String),

    #[error("point is not a fixed point: residual {residual:e} exceeds {tol:e}")]
    NotFixedPoint { residual: f64, tol: f64 },

    #[error("correspondence violated: {0}")]
    CorrespondenceViolated(String),

    #[error("bad experiment config: {0}")]
    BadConfig(String),

    #[error("invariant checks failed: {0}")]
    InvariantFailed(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            UnknownProblem(_)
            | UnknownParam { .. }
            | BadParams(_)
            | GammaOutOfRange { .. }
            | AlphaNonPositive(_)
            | ModeMismatch(_)
            | MissingConstant(_)
            | DimensionMismatch(_)
            | BadConfig(_) => ErrorCategory::Config,
            CorrespondenceViolated(_) | AssumptionThreeViolated(_) | InvariantFailed(_) => {
                ErrorCategory::Invariant
            }
            _ => ErrorCategory::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
