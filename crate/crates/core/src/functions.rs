//! Concrete [`Function`] implementations used by the problem registry.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, vec_ops, Mat};
use crate::model::{ExtReal, Function};

/// The zero function on `R^n`.
#[derive(Clone, Debug)]
pub struct Zero {
    n: usize,
}

impl Zero {
    pub fn new(n: usize) -> Self {
        Zero { n }
    }
}

impl Function for Zero {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _x: &[f64]) -> ExtReal {
        ExtReal::Finite(0.0)
    }
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.n])
    }
    fn hessian(&self, _x: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(self.n, self.n))
    }
    fn closed_form_prox(&self, _gamma: f64, z: &[f64]) -> Option<Vec<f64>> {
        Some(z.to_vec())
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `x^T Q x / 2 + b^T x + c` with symmetric `Q`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    q: Mat,
    b: Vec<f64>,
    c: f64,
}

impl Quadratic {
    pub fn new(q: Mat, b: Vec<f64>, c: f64) -> Result<Self> {
        if !q.is_square() || q.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "quadratic: Q is {}x{}, b has length {}",
                q.rows(),
                q.cols(),
                b.len()
            )));
        }
        if !q.is_symmetric() {
            return Err(Error::NotSymmetric(q.asymmetry()));
        }
        if !q.all_finite() || !vec_ops::all_finite(&b) || !c.is_finite() {
            return Err(Error::NonFiniteValue("quadratic coefficients".into()));
        }
        Ok(Quadratic {
            q: q.symmetrize(),
            b,
            c,
        })
    }

    /// `(s/2) ||x||^2`
    pub fn scaled_norm(n: usize, s: f64) -> Self {
        Quadratic {
            q: Mat::identity(n).scale(s),
            b: vec![0.0; n],
            c: 0.0,
        }
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl Function for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        let qx = self.q.mul_vec(x);
        ExtReal::Finite(0.5 * vec_ops::dot(x, &qx) + vec_ops::dot(&self.b, x) + self.c)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec_ops::add(&self.q.mul_vec(x), &self.b))
    }
    fn hessian(&self, _x: &[f64]) -> Option<Mat> {
        Some(self.q.clone())
    }
    fn closed_form_prox(&self, gamma: f64, z: &[f64]) -> Option<Vec<f64>> {
        // (I + gamma Q) u = z - gamma b
        let m = self.q.scale(gamma).add_diag(1.0);
        solve_linear(&m, &vec_ops::axpy(z, -gamma, &self.b)).ok()
    }
    fn is_zero(&self) -> bool {
        self.q.max_abs() == 0.0 && vec_ops::norm_inf(&self.b) == 0.0 && self.c == 0.0
    }
}

/// `mu ||x||_1`
#[derive(Clone, Debug)]
pub struct L1Norm {
    n: usize,
    mu: f64,
}

impl L1Norm {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::BadParams(format!(
                "l1 weight must be >= 0, got {mu}"
            )));
        }
        Ok(L1Norm { n, mu })
    }
}

impl Function for L1Norm {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        ExtReal::Finite(self.mu * x.iter().map(|v| v.abs()).sum::<f64>())
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        if self.mu > 0.0 && x.contains(&0.0) {
            return None;
        }
        Some(x.iter().map(|v| self.mu * v.signum()).collect())
    }
    fn hessian(&self, x: &[f64]) -> Option<Mat> {
        self.gradient(x).map(|_| Mat::zeros(self.n, self.n))
    }
    fn closed_form_prox(&self, gamma: f64, z: &[f64]) -> Option<Vec<f64>> {
        let t = gamma * self.mu;
        Some(
            z.iter()
                .map(|v| v.signum() * (v.abs() - t).max(0.0))
                .collect(),
        )
    }
    fn is_zero(&self) -> bool {
        self.mu == 0.0
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Logistic loss `sum_i log(1 + exp(-y_i t_i))` on margins `t`.
#[derive(Clone, Debug)]
pub struct LogisticLoss {
    labels: Vec<f64>,
}

impl LogisticLoss {
    pub fn new(labels: Vec<f64>) -> Self {
        LogisticLoss { labels }
    }

    /// `max_i y_i^2 / 4`
    pub fn lipschitz_grad(&self) -> f64 {
        self.labels.iter().map(|y| y * y).fold(0.0, f64::max) / 4.0
    }
}

impl Function for LogisticLoss {
    fn dim(&self) -> usize {
        self.labels.len()
    }
    fn value(&self, t: &[f64]) -> ExtReal {
        ExtReal::Finite(
            self.labels
                .iter()
                .zip(t)
                .map(|(y, t)| softplus(-y * t))
                .sum(),
        )
    }
    fn gradient(&self, t: &[f64]) -> Option<Vec<f64>> {
        Some(
            self.labels
                .iter()
                .zip(t)
                .map(|(y, t)| -y * sigmoid(-y * t))
                .collect(),
        )
    }
    fn hessian(&self, t: &[f64]) -> Option<Mat> {
        let d: Vec<f64> = self
            .labels
            .iter()
            .zip(t)
            .map(|(y, t)| {
                let s = sigmoid(y * t);
                y * y * s * (1.0 - s)
            })
            .collect();
        Some(Mat::from_diag(&d))
    }
}

/// `(x_1^2 - 1)^2 / 4 + (s/2) sum_{i>=2} x_i^2`: a double well in the first
/// coordinate with a strict saddle at the origin.
#[derive(Clone, Debug)]
pub struct QuarticWell {
    n: usize,
    s: f64,
}

impl QuarticWell {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParams("quartic_well needs n >= 1".into()));
        }
        Ok(QuarticWell { n, s })
    }
}

impl Function for QuarticWell {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        let w = x[0] * x[0] - 1.0;
        let tail: f64 = x[1..].iter().map(|v| v * v).sum();
        ExtReal::Finite(0.25 * w * w + 0.5 * self.s * tail)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g: Vec<f64> = x.iter().map(|v| self.s * v).collect();
        g[0] = x[0] * x[0] * x[0] - x[0];
        Some(g)
    }
    fn hessian(&self, x: &[f64]) -> Option<Mat> {
        let mut d = vec![self.s; self.n];
        d[0] = 3.0 * x[0] * x[0] - 1.0;
        Some(Mat::from_diag(&d))
    }
}

/// `||x x^T - M||_F^2 / 4` for symmetric `M`.
#[derive(Clone, Debug)]
pub struct MatFac {
    m: Mat,
}

impl MatFac {
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(
                "matfac target must be square".into(),
            ));
        }
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric(m.asymmetry()));
        }
        Ok(MatFac { m: m.symmetrize() })
    }
}

impl Function for MatFac {
    fn dim(&self) -> usize {
        self.m.rows()
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        let r = Mat::outer(x, x).sub(&self.m);
        let fro = r.norm_fro();
        ExtReal::Finite(0.25 * fro * fro)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        // (x x^T - M) x
        let nx2 = vec_ops::dot(x, x);
        Some(vec_ops::sub(&vec_ops::scale(x, nx2), &self.m.mul_vec(x)))
    }
    fn hessian(&self, x: &[f64]) -> Option<Mat> {
        let nx2 = vec_ops::dot(x, x);
        Some(Mat::outer(x, x).scale(2.0).add_diag(nx2).sub(&self.m))
    }
}

/// `sum_i ((a_i^T x)^2 - y_i)^2 / 4` with sensing vectors `a_i` as rows.
#[derive(Clone, Debug)]
pub struct PhaseRetrieval {
    a: Mat,
    y: Vec<f64>,
}

impl PhaseRetrieval {
    pub fn new(a: Mat, y: Vec<f64>) -> Result<Self> {
        if a.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "phase retrieval: {} sensing vectors, {} measurements",
                a.rows(),
                y.len()
            )));
        }
        Ok(PhaseRetrieval { a, y })
    }

    pub fn sensing(&self) -> &Mat {
        &self.a
    }

    pub fn measurements(&self) -> &[f64] {
        &self.y
    }
}

impl Function for PhaseRetrieval {
    fn dim(&self) -> usize {
        self.a.cols()
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        let ax = self.a.mul_vec(x);
        ExtReal::Finite(
            0.25 * ax
                .iter()
                .zip(&self.y)
                .map(|(t, y)| (t * t - y).powi(2))
                .sum::<f64>(),
        )
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let ax = self.a.mul_vec(x);
        let c: Vec<f64> = ax
            .iter()
            .zip(&self.y)
            .map(|(t, y)| (t * t - y) * t)
            .collect();
        Some(self.a.tr_mul_vec(&c))
    }
    fn hessian(&self, x: &[f64]) -> Option<Mat> {
        let n = self.dim();
        let ax = self.a.mul_vec(x);
        let mut h = Mat::zeros(n, n);
        for (i, (t, y)) in ax.iter().zip(&self.y).enumerate() {
            h = h.add(&Mat::outer(self.a.row(i), self.a.row(i)).scale(3.0 * t * t - y));
        }
        Some(h)
    }
}

/// `inner(x) + (c/2) ||x||^2`
#[derive(Clone, Debug)]
pub struct Shifted {
    inner: Arc<dyn Function>,
    c: f64,
}

impl Shifted {
    pub fn new(inner: Arc<dyn Function>, c: f64) -> Self {
        Shifted { inner, c }
    }
}

impl Function for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        self.inner.value(x) + 0.5 * self.c * vec_ops::dot(x, x)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.gradient(x).map(|g| vec_ops::axpy(&g, self.c, x))
    }
    fn hessian(&self, x: &[f64]) -> Option<Mat> {
        self.inner.hessian(x).map(|h| h.add_diag(self.c))
    }
    fn closed_form_prox(&self, gamma: f64, z: &[f64]) -> Option<Vec<f64>> {
        // prox_{gamma (xi + c/2 ||.||^2)}(z) = prox_{gamma' xi}(z / (1 + gamma c))
        let d = 1.0 + gamma * self.c;
        if d <= 0.0 {
            return None;
        }
        self.inner
            .closed_form_prox(gamma / d, &vec_ops::scale(z, 1.0 / d))
    }
    fn is_zero(&self) -> bool {
        self.c == 0.0 && self.inner.is_zero()
    }
}
