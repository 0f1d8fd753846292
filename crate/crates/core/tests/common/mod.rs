#![allow(dead_code)]

use dysenv::functions::Quadratic;
use dysenv::{LinearMap, Mat, ProblemTriple, ProxableFn, SmoothFn};

/// Minimizes `xi(u) + ||u - z||^2 / (2 gamma)` by repeated grid search on a
/// shrinking box centred at the incumbent. Independent of any prox code.
pub fn grid_prox(xi: impl Fn(&[f64]) -> f64, gamma: f64, z: &[f64], half_width: f64) -> Vec<f64> {
    let n = z.len();
    let obj = |u: &[f64]| {
        let d: f64 = u.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        xi(u) + d / (2.0 * gamma)
    };
    let per_axis: usize = match n {
        1 => 401,
        2 => 41,
        _ => 15,
    };
    let mut centre = z.to_vec();
    let mut width = half_width;
    while width > 1e-9 {
        let mut best = (obj(&centre), centre.clone());
        let total = per_axis.pow(n as u32);
        let mut u = vec![0.0; n];
        for k in 0..total {
            let mut idx = k;
            for (i, ui) in u.iter_mut().enumerate() {
                let j = idx % per_axis;
                idx /= per_axis;
                *ui = centre[i] + width * (2.0 * j as f64 / (per_axis - 1) as f64 - 1.0);
            }
            let v = obj(&u);
            if v < best.0 {
                best = (v, u.clone());
            }
        }
        centre = best.1;
        width *= 4.0 / (per_axis - 1) as f64;
    }
    centre
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn quad(diag: &[f64], b: &[f64]) -> Quadratic {
    Quadratic::new(Mat::from_diag(diag), b.to_vec(), 0.0).unwrap()
}

pub fn spectral(diag: &[f64]) -> f64 {
    diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()))
}

/// `f = (1/2) x^T diag(df) x + bf.x` as a prox part, `g`, `h` likewise, `L = I`.
pub fn diagonal_triple(df: &[f64], bf: &[f64], dg: &[f64], dh: &[f64]) -> ProblemTriple {
    let n = df.len();
    let beta = df.iter().fold(0.0_f64, |m, d| m.max(-d));
    let f = if df.iter().chain(bf).all(|v| *v == 0.0) {
        ProxableFn::zero(n)
    } else {
        ProxableFn::new(quad(df, bf), beta).with_hessian_bound(spectral(df))
    };
    let smooth = |d: &[f64]| {
        if d.iter().all(|v| *v == 0.0) {
            SmoothFn::zero(n)
        } else {
            SmoothFn::new(quad(d, &vec![0.0; n]), spectral(d))
                .with_weak_convexity(d.iter().fold(0.0_f64, |m, v| m.max(-v)))
        }
    };
    ProblemTriple::new(
        "diagonal",
        f,
        smooth(dg),
        smooth(dh),
        LinearMap::identity(n),
    )
    .unwrap()
}
