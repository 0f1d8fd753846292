//! Fixtures shared by the benchmarks.

use dysenv::analysis::default_alpha;
use dysenv::registry::make_json;
use dysenv::{Mat, McConfig, ProblemSpec, ProblemTriple, SplitParams};
use serde_json::{json, Value};

/// A registry problem with `gamma` at half its limit and the default `alpha`.
pub fn instance(name: &str, params: Value) -> (ProblemTriple, SplitParams) {
    let p = make_json(name, params).expect("registry problem");
    let gamma = 0.5 * p.gamma_limit().finite().unwrap_or(2.0);
    let alpha = default_alpha(&p, gamma, None);
    (p, SplitParams::new(gamma, alpha))
}

/// The points `z` used by the step and envelope benchmarks.
pub fn point(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.3 + 0.17 * i as f64).collect()
}

/// A symmetric, well-separated `n x n` test matrix.
pub fn sym_matrix(n: usize) -> Mat {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0 + i as f64
                    } else {
                        1.0 / (1.0 + (i + j) as f64)
                    }
                })
                .collect()
        })
        .collect();
    Mat::from_rows(&rows).expect("square rows")
}

/// A small Monte-Carlo run on the saddle quadratic.
pub fn small_mc(trials: usize) -> McConfig {
    McConfig::new(
        ProblemSpec::new("saddle_quadratic", json!({})),
        0.5,
        2.7,
        trials,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (p, params) = instance("matfac_toy", json!({}));
        assert_eq!(point(p.n()).len(), p.n());
        assert!((params.gamma - 0.125).abs() < 1e-15);
        assert_eq!(sym_matrix(4).rows(), 4);
        assert_eq!(dysenv::mc_run(&small_mc(4)).unwrap().summary.trials, 4);
    }
}
