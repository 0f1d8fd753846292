//! Builtin test problems selectable by name and JSON parameters.
//!
//! Every nonconvex problem accepts `split` in `{"f", "fbs", "drs", "dys"}`
//! and a weight `c` (default 0.5). `"f"` puts the whole objective in `f`;
//! the others move `(c/2)||x||^2` into `h` (with `L = I`), into `g`, or into
//! both, subtracting the same amount from `f` so that `phi` is unchanged.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::functions::{
    L1Norm, LogisticLoss, MatFac, PhaseRetrieval, Quadratic, QuarticWell, Shifted,
};
use crate::linalg::{solve_linear, sym_eigen, vec_ops, Mat};
use crate::model::{Function, Landmarks, LinearMap, ProblemTriple, ProxableFn, SmoothFn};

pub type Params = serde_json::Map<String, Value>;

pub const NAMES: [&str; 7] = [
    "zero",
    "quadratic",
    "saddle_quadratic",
    "quartic_well",
    "logistic_smooth",
    "matfac_toy",
    "phase_toy",
];

/// Builds a registry problem.
pub fn make(name: &str, params: &Params) -> Result<ProblemTriple> {
    let mut r = Reader::new(name, params);
    let p = match name {
        "zero" => zero(&mut r)?,
        "quadratic" => quadratic(&mut r)?,
        "saddle_quadratic" => saddle_quadratic(&mut r)?,
        "quartic_well" => quartic_well(&mut r)?,
        "logistic_smooth" => logistic_smooth(&mut r)?,
        "matfac_toy" => matfac_toy(&mut r)?,
        "phase_toy" => phase_toy(&mut r)?,
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    r.finish()?;
    Ok(p)
}

/// Shorthand for building from a JSON object literal.
pub fn make_json(name: &str, params: Value) -> Result<ProblemTriple> {
    match params {
        Value::Object(m) => make(name, &m),
        Value::Null => make(name, &Params::new()),
        other => Err(Error::BadParams(format!(
            "params must be an object, got {other}"
        ))),
    }
}

struct Reader<'a> {
    problem: &'a str,
    map: &'a Params,
    used: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(problem: &'a str, map: &'a Params) -> Self {
        Reader {
            problem,
            map,
            used: BTreeSet::new(),
        }
    }

    fn bad(&self, key: &str, what: &str) -> Error {
        Error::BadParams(format!("{}.{key}: {what}", self.problem))
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.map.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.bad(key, "expected a finite number")),
        }
    }

    fn usize(&mut self, key: &'static str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| self.bad(key, "expected a non-negative integer")),
        }
    }

    fn u64(&mut self, key: &'static str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| self.bad(key, "expected a non-negative integer")),
        }
    }

    fn bool(&mut self, key: &'static str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| self.bad(key, "expected a boolean")),
        }
    }

    fn string(&mut self, key: &'static str, default: &str) -> Result<String> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(v) => v
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| self.bad(key, "expected a string")),
        }
    }

    fn vec(&mut self, key: &'static str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => numbers(v)
                .map(Some)
                .ok_or_else(|| self.bad(key, "expected an array of finite numbers")),
        }
    }

    /// A nested array of rows, or a flat array read as a diagonal.
    fn mat(&mut self, key: &'static str) -> Result<Option<Mat>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let err = || self.bad(key, "expected an array of rows or a diagonal");
        let arr = v.as_array().ok_or_else(err)?;
        if arr.iter().all(Value::is_array) && !arr.is_empty() {
            let rows: Option<Vec<Vec<f64>>> = arr.iter().map(numbers).collect();
            Mat::from_rows(&rows.ok_or_else(err)?).map(Some)
        } else {
            Ok(Some(Mat::from_diag(&numbers(v).ok_or_else(err)?)))
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.used.contains(key.as_str()) {
                return Err(Error::UnknownParam {
                    problem: self.problem.to_string(),
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?
        .iter()
        .map(|x| x.as_f64().filter(|x| x.is_finite()))
        .collect()
}

fn eigen_range(m: &Mat) -> Result<(f64, f64)> {
    if m.rows() == 0 {
        return Ok((0.0, 0.0));
    }
    let e = sym_eigen(m)?;
    Ok((e.min(), e.max()))
}

fn check_positive_dim(r: &Reader, key: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(r.bad(key, "dimension must be at least 1"));
    }
    Ok(())
}

fn zero(r: &mut Reader) -> Result<ProblemTriple> {
    let n = r.usize("n", 2)?;
    check_positive_dim(r, "n", n)?;
    ProblemTriple::new(
        "zero",
        ProxableFn::zero(n),
        SmoothFn::zero(n),
        SmoothFn::zero(n),
        LinearMap::identity(n),
    )
}

struct QuadPart {
    q: Mat,
    b: Vec<f64>,
}

impl QuadPart {
    fn zero(n: usize) -> Self {
        QuadPart {
            q: Mat::zeros(n, n),
            b: vec![0.0; n],
        }
    }
}

fn quadratic(r: &mut Reader) -> Result<ProblemTriple> {
    let convex = r.bool("convex", false)?;
    let (pf, pg, ph, l) = if r.has("seed") {
        random_quadratic(r)?
    } else if r.has("Qf") || r.has("Qg") || r.has("Qh") {
        explicit_quadratic(r)?
    } else {
        assigned_quadratic(r)?
    };
    let n = l.cols();
    for (part, name) in [(&pf, "f"), (&pg, "g"), (&ph, "h")] {
        if !part.q.is_symmetric() {
            return Err(r.bad(&format!("Q{name}"), "matrix must be symmetric"));
        }
        if part.q.rows() != part.b.len() {
            return Err(Error::DimensionMismatch(format!(
                "quadratic part {name}: Q is {}x{}, b has length {}",
                part.q.rows(),
                part.q.cols(),
                part.b.len()
            )));
        }
        if convex && eigen_range(&part.q)?.0 < -1e-12 {
            return Err(r.bad(
                &format!("Q{name}"),
                "not positive semidefinite but convex = true",
            ));
        }
    }
    if pf.q.rows() != n || pg.q.rows() != n || ph.q.rows() != l.rows() {
        return Err(Error::DimensionMismatch(format!(
            "quadratic: f on R^{}, g on R^{}, h on R^{}, L is {}x{}",
            pf.q.rows(),
            pg.q.rows(),
            ph.q.rows(),
            l.rows(),
            l.cols()
        )));
    }

    let (f_min, f_max) = eigen_range(&pf.q)?;
    let (g_min, g_max) = eigen_range(&pg.q)?;
    let (h_min, h_max) = eigen_range(&ph.q)?;
    let f_norm = f_min.abs().max(f_max.abs());

    // stationary point of phi: (Qf + Qg + L^T Qh L) x = -(bf + bg + L^T bh)
    let lmap = LinearMap::new(l.clone())?;
    let hess = pf.q.add(&pg.q).add(&lmap.congruence(&ph.q));
    let lin = vec_ops::add(&vec_ops::add(&pf.b, &pg.b), &lmap.adjoint(&ph.b));
    let mut landmarks = Landmarks::default();
    if let Ok(x) = solve_linear(&hess, &vec_ops::scale(&lin, -1.0)) {
        let (lo, _) = eigen_range(&hess)?;
        if lo > 1e-12 {
            landmarks.minimizers.push(x);
        } else if lo < -1e-12 {
            landmarks.saddles.push(x);
        }
    }

    let f = ProxableFn::new(Quadratic::new(pf.q, pf.b, 0.0)?, (-f_min).max(0.0))
        .with_hessian_bound(f_norm);
    let g = SmoothFn::new(
        Quadratic::new(pg.q, pg.b, 0.0)?,
        g_min.abs().max(g_max.abs()),
    )
    .with_weak_convexity((-g_min).max(0.0));
    let h = SmoothFn::new(
        Quadratic::new(ph.q, ph.b, 0.0)?,
        h_min.abs().max(h_max.abs()),
    );
    Ok(ProblemTriple::new("quadratic", f, g, h, lmap)?.with_landmarks(landmarks))
}

fn assigned_quadratic(r: &mut Reader) -> Result<(QuadPart, QuadPart, QuadPart, Mat)> {
    let q = r.mat("Q")?.unwrap_or_else(|| Mat::from_diag(&[2.0, 4.0]));
    if !q.is_square() {
        return Err(r.bad("Q", "must be square"));
    }
    let n = q.rows();
    check_positive_dim(r, "Q", n)?;
    let b = r.vec("b")?.unwrap_or_else(|| vec![0.0; n]);
    let part = QuadPart { q, b };
    let assign = r.string("assign", "g")?;
    let (f, g, h) = match assign.as_str() {
        "f" => (part, QuadPart::zero(n), QuadPart::zero(n)),
        "g" => (QuadPart::zero(n), part, QuadPart::zero(n)),
        "h" => (QuadPart::zero(n), QuadPart::zero(n), part),
        _ => return Err(r.bad("assign", "expected \"f\", \"g\" or \"h\"")),
    };
    Ok((f, g, h, Mat::identity(n)))
}

fn explicit_quadratic(r: &mut Reader) -> Result<(QuadPart, QuadPart, QuadPart, Mat)> {
    let qf = r.mat("Qf")?;
    let qg = r.mat("Qg")?;
    let qh = r.mat("Qh")?;
    let l = r.mat("L")?;
    let n = [&qf, &qg]
        .into_iter()
        .flatten()
        .map(Mat::rows)
        .next()
        .or_else(|| l.as_ref().map(Mat::cols))
        .or_else(|| qh.as_ref().map(Mat::rows))
        .unwrap_or(0);
    check_positive_dim(r, "Qf", n)?;
    let l = l.unwrap_or_else(|| Mat::identity(n));
    let m = l.rows();
    let part = |q: Option<Mat>, b: Option<Vec<f64>>, dim: usize| QuadPart {
        q: q.unwrap_or_else(|| Mat::zeros(dim, dim)),
        b: b.unwrap_or_else(|| vec![0.0; dim]),
    };
    let bf = r.vec("bf")?;
    let bg = r.vec("bg")?;
    let bh = r.vec("bh")?;
    Ok((part(qf, bf, n), part(qg, bg, n), part(qh, bh, m), l))
}

fn gaussian_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut *rng))
        .collect();
    Mat::from_row_major(rows, cols, data).expect("sizes match")
}

fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

/// `C^T C / n + shift I` with Gaussian `C`; generically not diagonal, so the
/// three Hessians do not commute.
fn random_spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> Mat {
    let c = gaussian_mat(n, n, rng);
    c.transpose()
        .matmul(&c)
        .scale(1.0 / n as f64)
        .add_diag(shift)
        .symmetrize()
}

fn random_quadratic(r: &mut Reader) -> Result<(QuadPart, QuadPart, QuadPart, Mat)> {
    let seed = r.u64("seed", 0)?;
    let n = r.usize("n", 3)?;
    check_positive_dim(r, "n", n)?;
    let m = r.usize("m", n)?;
    check_positive_dim(r, "m", m)?;
    let parts = r.string("parts", "fgh")?;
    if parts.is_empty() || !parts.chars().all(|c| "fgh".contains(c)) {
        return Err(r.bad("parts", "expected a non-empty subset of \"fgh\""));
    }
    let f_shift = r.f64("f_shift", 0.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |dim: usize, shift: f64, on: bool| {
        let q = random_spd(dim, shift, &mut rng);
        let b = gaussian_vec(dim, &mut rng);
        if on {
            QuadPart { q, b }
        } else {
            QuadPart::zero(dim)
        }
    };
    let f = draw(n, f_shift, parts.contains('f'));
    let g = draw(n, 0.0, parts.contains('g'));
    let h = draw(m, 0.0, parts.contains('h'));
    let l = if m == n && !parts.contains('h') {
        Mat::identity(n)
    } else {
        gaussian_mat(m, n, &mut rng).scale(1.0 / (n as f64).sqrt())
    };
    Ok((f, g, h, l))
}

enum Split {
    F,
    Fbs,
    Drs,
    Dys,
}

fn read_split(r: &mut Reader) -> Result<(Split, f64)> {
    let split = match r.string("split", "f")?.as_str() {
        "f" => Split::F,
        "fbs" => Split::Fbs,
        "drs" => Split::Drs,
        "dys" => Split::Dys,
        _ => return Err(r.bad("split", "expected \"f\", \"fbs\", \"drs\" or \"dys\"")),
    };
    let c = r.f64("c", 0.5)?;
    if !(c > 0.0) {
        return Err(r.bad("c", "must be positive"));
    }
    Ok((split, c))
}

/// Hessian data for `phi` needed to place the constants of the shifted `f`.
enum Curvature {
    /// Evaluate `hess phi` at every landmark.
    AtLandmarks,
    /// A known bound on `||hess phi||` at all critical points.
    Bound(f64),
}

/// Distributes `phi = inner` over `(f, g, h)` according to the split.
fn split_problem(
    name: &str,
    inner: Arc<dyn Function>,
    beta_phi: f64,
    landmarks: Landmarks,
    curvature: Curvature,
    split: Split,
    c: f64,
) -> Result<ProblemTriple> {
    let n = inner.dim();
    let shift = match split {
        Split::F => 0.0,
        Split::Fbs | Split::Drs => c,
        Split::Dys => 2.0 * c,
    };
    let l_f = match curvature {
        Curvature::Bound(b) => b + shift,
        Curvature::AtLandmarks => {
            let mut worst: f64 = 0.0;
            for x in landmarks.minimizers.iter().chain(&landmarks.saddles) {
                let h = inner
                    .hessian(x)
                    .ok_or_else(|| Error::HessianUnavailable(name.to_string()))?;
                let (lo, hi) = eigen_range(&h)?;
                worst = worst.max((lo - shift).abs()).max((hi - shift).abs());
            }
            worst
        }
    };
    let f_func: Arc<dyn Function> = if shift == 0.0 {
        inner
    } else {
        Arc::new(Shifted::new(inner, -shift))
    };
    let f = ProxableFn::from_arc(f_func, (beta_phi + shift).max(0.0)).with_hessian_bound(l_f);
    let half = || SmoothFn::new(Quadratic::scaled_norm(n, c), c).with_weak_convexity(0.0);
    let (g, h) = match split {
        Split::F => (SmoothFn::zero(n), SmoothFn::zero(n)),
        Split::Fbs => (SmoothFn::zero(n), half()),
        Split::Drs => (half(), SmoothFn::zero(n)),
        Split::Dys => (half(), half()),
    };
    Ok(ProblemTriple::new(name, f, g, h, LinearMap::identity(n))?.with_landmarks(landmarks))
}

fn saddle_quadratic(r: &mut Reader) -> Result<ProblemTriple> {
    let d = r.vec("d")?.unwrap_or_else(|| vec![1.0, -1.0]);
    check_positive_dim(r, "d", d.len())?;
    if d.contains(&0.0) {
        return Err(r.bad("d", "entries must be nonzero so the origin is isolated"));
    }
    let (split, c) = read_split(r)?;
    let n = d.len();
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let origin = vec![0.0; n];
    let landmarks = if dmin < 0.0 {
        Landmarks {
            minimizers: vec![],
            saddles: vec![origin],
        }
    } else {
        Landmarks {
            minimizers: vec![origin],
            saddles: vec![],
        }
    };
    let inner = Arc::new(Quadratic::new(Mat::from_diag(&d), vec![0.0; n], 0.0)?);
    split_problem(
        "saddle_quadratic",
        inner,
        (-dmin).max(0.0),
        landmarks,
        Curvature::AtLandmarks,
        split,
        c,
    )
}

fn quartic_well(r: &mut Reader) -> Result<ProblemTriple> {
    let n = r.usize("n", 2)?;
    check_positive_dim(r, "n", n)?;
    let s = r.f64("s", 1.0)?;
    if n > 1 && s == 0.0 {
        return Err(r.bad("s", "must be nonzero so critical points are isolated"));
    }
    let (split, c) = read_split(r)?;
    let e1 = |v: f64| {
        let mut x = vec![0.0; n];
        x[0] = v;
        x
    };
    let mut landmarks = Landmarks {
        minimizers: vec![e1(1.0), e1(-1.0)],
        saddles: vec![e1(0.0)],
    };
    if n > 1 && s < 0.0 {
        let mins = std::mem::take(&mut landmarks.minimizers);
        landmarks.saddles.extend(mins);
    }
    split_problem(
        "quartic_well",
        Arc::new(QuarticWell::new(n, s)?),
        1.0_f64.max(-s),
        landmarks,
        Curvature::AtLandmarks,
        split,
        c,
    )
}

fn logistic_smooth(r: &mut Reader) -> Result<ProblemTriple> {
    let n = r.usize("n", 3)?;
    check_positive_dim(r, "n", n)?;
    let m = r.usize("m", 8)?;
    check_positive_dim(r, "m", m)?;
    let seed = r.u64("seed", 0)?;
    let mu = r.f64("mu", 0.1)?;
    let lambda = r.f64("lambda", 1.0)?;
    if !(lambda > 0.0) {
        return Err(r.bad("lambda", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = gaussian_mat(m, n, &mut rng).scale(1.0 / (n as f64).sqrt());
    let labels: Vec<f64> = gaussian_vec(m, &mut rng)
        .into_iter()
        .map(|v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    let loss = LogisticLoss::new(labels);
    let l_h = loss.lipschitz_grad();
    ProblemTriple::new(
        "logistic_smooth",
        ProxableFn::new(L1Norm::new(n, mu)?, 0.0),
        SmoothFn::new(Quadratic::scaled_norm(n, lambda), lambda).with_weak_convexity(0.0),
        SmoothFn::new(loss, l_h).with_weak_convexity(0.0),
        LinearMap::new(data)?,
    )
}

fn matfac_toy(r: &mut Reader) -> Result<ProblemTriple> {
    let m = r.mat("M")?.unwrap_or_else(|| Mat::from_diag(&[2.0, 1.0]));
    if !m.is_square() || !m.is_symmetric() {
        return Err(r.bad("M", "must be square and symmetric"));
    }
    check_positive_dim(r, "M", m.rows())?;
    let (split, c) = read_split(r)?;
    let eig = sym_eigen(&m)?;
    let n = m.rows();
    let lmax = eig.max();
    if lmax <= 0.0 {
        return Err(r.bad("M", "needs a positive eigenvalue"));
    }
    let gap_tol = 1e-9 * (1.0 + lmax);
    if n > 1 && lmax - eig.values[n - 2] <= gap_tol {
        return Err(r.bad(
            "M",
            "top eigenvalue must be simple; otherwise the minimizers form a continuum",
        ));
    }
    // critical points: 0 and +-sqrt(lambda_i) v_i for each positive eigenvalue
    let mut landmarks = Landmarks {
        minimizers: vec![],
        saddles: vec![vec![0.0; n]],
    };
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam <= gap_tol {
            continue;
        }
        if i + 1 < n && eig.values[i + 1] - lam <= gap_tol {
            return Err(r.bad("M", "positive eigenvalues must be simple"));
        }
        let v = vec_ops::scale(&eig.vectors.col(i), lam.sqrt());
        let neg = vec_ops::scale(&v, -1.0);
        if i == n - 1 {
            landmarks.minimizers.extend([v, neg]);
        } else {
            landmarks.saddles.extend([v, neg]);
        }
    }
    split_problem(
        "matfac_toy",
        Arc::new(MatFac::new(m)?),
        lmax,
        landmarks,
        Curvature::AtLandmarks,
        split,
        c,
    )
}

fn phase_toy(r: &mut Reader) -> Result<ProblemTriple> {
    let xnat = r.vec("x_natural")?.unwrap_or_else(|| vec![1.0, 0.5]);
    let n = xnat.len();
    check_positive_dim(r, "x_natural", n)?;
    let a = r.mat("A")?.unwrap_or_else(|| Mat::identity(n));
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "phase_toy: A has {} columns, x_natural has length {n}",
            a.cols()
        )));
    }
    let (split, c) = read_split(r)?;
    let y: Vec<f64> = a.mul_vec(&xnat).iter().map(|t| t * t).collect();
    let sum_yaa = (0..a.rows()).fold(Mat::zeros(n, n), |acc, i| {
        acc.add(&Mat::outer(a.row(i), a.row(i)).scale(y[i]))
    });
    let beta_phi = eigen_range(&sum_yaa)?.1.max(0.0);

    let diagonal = a.is_square()
        && (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == 0.0))
        && a.diag().iter().all(|v| *v != 0.0);
    let (landmarks, curvature) = if diagonal {
        if xnat.contains(&0.0) {
            return Err(r.bad(
                "x_natural",
                "entries must be nonzero for isolated critical points",
            ));
        }
        if n > 8 {
            return Err(r.bad("x_natural", "landmark enumeration supports n <= 8"));
        }
        // separable: each coordinate sits at 0 or +-x_natural_i
        let mut landmarks = Landmarks::default();
        for code in 0..3usize.pow(n as u32) {
            let mut k = code;
            let mut x = vec![0.0; n];
            let mut has_zero = false;
            for (i, xi) in x.iter_mut().enumerate() {
                match k % 3 {
                    0 => has_zero = true,
                    1 => *xi = xnat[i],
                    _ => *xi = -xnat[i],
                }
                k /= 3;
            }
            if has_zero {
                landmarks.saddles.push(x);
            } else {
                landmarks.minimizers.push(x);
            }
        }
        (landmarks, Curvature::AtLandmarks)
    } else {
        let landmarks = Landmarks {
            minimizers: vec![xnat.clone(), vec_ops::scale(&xnat, -1.0)],
            saddles: vec![],
        };
        // At a critical point <grad phi(x), x> = 0 gives sum t_i^4 = sum y_i t_i^2
        // with t = Ax, so sqrt(sum t_i^4) <= ||y|| and
        // ||hess phi|| <= 3 ||y|| sqrt(sum ||a_i||^4) + sum y_i ||a_i||^2.
        let norms2: Vec<f64> = (0..a.rows())
            .map(|i| vec_ops::dot(a.row(i), a.row(i)))
            .collect();
        let ynorm = vec_ops::norm(&y);
        let bound = 3.0 * ynorm * norms2.iter().map(|v| v * v).sum::<f64>().sqrt()
            + y.iter().zip(&norms2).map(|(a, b)| a * b).sum::<f64>();
        (landmarks, Curvature::Bound(bound))
    };
    split_problem(
        "phase_toy",
        Arc::new(PhaseRetrieval::new(a, y)?),
        beta_phi,
        landmarks,
        curvature,
        split,
        c,
    )
}
