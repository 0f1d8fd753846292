//! Objective components `f`, `g`, `h` and the linear map `L` of
//! `phi(x) = f(x) + g(x) + h(Lx)`, with the constants the step-size rules need.

use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{vec_ops, Mat};

/// A real number or `+inf`, never stored as a floating infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, or an [`Error::InfiniteValue`] naming `what`.
    pub fn expect_finite(self, what: &str) -> Result<f64> {
        self.finite()
            .ok_or_else(|| Error::InfiniteValue(what.to_string()))
    }

    /// Maps a float to `Finite`, treating `+inf` as `PosInf`. NaN and `-inf`
    /// are rejected.
    pub fn from_f64(v: f64) -> Result<ExtReal> {
        if v.is_finite() {
            Ok(ExtReal::Finite(v))
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else {
            Err(Error::NonFiniteValue(format!("extended real {v}")))
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.min(b)),
            (ExtReal::PosInf, x) | (x, ExtReal::PosInf) => x,
        }
    }

    /// `self > v`, with `+inf` above everything.
    pub fn gt(self, v: f64) -> bool {
        match self {
            ExtReal::Finite(a) => a > v,
            ExtReal::PosInf => true,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) if s == "+inf" || s == "inf" => Ok(ExtReal::PosInf),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"+inf\", got {s:?}"
            ))),
        }
    }
}

/// A real function on `R^dim` with optional derivative information.
pub trait Function: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> ExtReal;

    /// `None` where the function is not differentiable.
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>>;

    fn hessian(&self, _x: &[f64]) -> Option<Mat> {
        None
    }

    /// `argmin_u f(u) + ||u - z||^2 / (2 gamma)` when known in closed form.
    fn closed_form_prox(&self, _gamma: f64, _z: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Identically zero; lets the splitting skip a component exactly.
    fn is_zero(&self) -> bool {
        false
    }
}

fn check_dim(expected: usize, x: &[f64], what: &str) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} expects dimension {expected}, got {}",
            x.len()
        )))
    }
}

fn hessian_or_fd(func: &dyn Function, x: &[f64], what: &str) -> Result<Mat> {
    if let Some(h) = func.hessian(x) {
        return Ok(h);
    }
    let jac = fd::try_fd_jacobian(
        |y| {
            func.gradient(y)
                .ok_or_else(|| Error::HessianUnavailable(what.to_string()))
        },
        x,
        None,
    )?;
    Ok(jac.symmetrize())
}

/// Functions whose proximal mapping [`crate::moreau::prox`] can evaluate.
pub trait Proxable {
    fn function(&self) -> &dyn Function;
    /// `beta >= 0` with `xi + (beta/2)||.||^2` convex.
    fn weak_convexity(&self) -> f64;
    fn hessian_at(&self, x: &[f64]) -> Result<Mat>;
}

/// A Lipschitz-differentiable component (`g` or `h`).
#[derive(Clone, Debug)]
pub struct SmoothFn {
    func: Arc<dyn Function>,
    lipschitz_grad: f64,
    weak_convexity: f64,
}

impl SmoothFn {
    /// Weak convexity defaults to the gradient Lipschitz constant, which is
    /// always a valid bound.
    pub fn new(func: impl Function + 'static, lipschitz_grad: f64) -> Self {
        Self::from_arc(Arc::new(func), lipschitz_grad)
    }

    pub fn from_arc(func: Arc<dyn Function>, lipschitz_grad: f64) -> Self {
        SmoothFn {
            func,
            lipschitz_grad,
            weak_convexity: lipschitz_grad,
        }
    }

    pub fn with_weak_convexity(mut self, beta: f64) -> Self {
        self.weak_convexity = beta;
        self
    }

    pub fn zero(n: usize) -> Self {
        SmoothFn::new(crate::functions::Zero::new(n), 0.0).with_weak_convexity(0.0)
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_zero()
    }

    pub fn lipschitz_grad(&self) -> f64 {
        self.lipschitz_grad
    }

    pub fn function(&self) -> &dyn Function {
        self.func.as_ref()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x, "smooth function")?;
        let v = self.func.value(x).expect_finite("smooth function")?;
        if v.is_nan() {
            return Err(Error::NonFiniteValue("smooth function value".into()));
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x, "smooth function")?;
        let g = self
            .func
            .gradient(x)
            .ok_or_else(|| Error::GradientUnavailable(format!("{:?}", self.func)))?;
        if !vec_ops::all_finite(&g) {
            return Err(Error::NonFiniteValue("smooth function gradient".into()));
        }
        Ok(g)
    }

    /// Analytic Hessian when provided, otherwise a symmetrized finite
    /// difference of the gradient.
    pub fn hessian(&self, x: &[f64]) -> Result<Mat> {
        check_dim(self.dim(), x, "smooth function")?;
        hessian_or_fd(self.func.as_ref(), x, "smooth function")
    }

    pub fn has_analytic_hessian(&self, x: &[f64]) -> bool {
        self.func.hessian(x).is_some()
    }
}

impl Proxable for SmoothFn {
    fn function(&self) -> &dyn Function {
        self.func.as_ref()
    }
    fn weak_convexity(&self) -> f64 {
        self.weak_convexity
    }
    fn hessian_at(&self, x: &[f64]) -> Result<Mat> {
        self.hessian(x)
    }
}

/// The possibly nonsmooth, weakly convex component `f`.
#[derive(Clone, Debug)]
pub struct ProxableFn {
    func: Arc<dyn Function>,
    weak_convexity: f64,
    lipschitz_hess: Option<f64>,
}

impl ProxableFn {
    pub fn new(func: impl Function + 'static, weak_convexity: f64) -> Self {
        Self::from_arc(Arc::new(func), weak_convexity)
    }

    pub fn from_arc(func: Arc<dyn Function>, weak_convexity: f64) -> Self {
        ProxableFn {
            func,
            weak_convexity,
            lipschitz_hess: None,
        }
    }

    /// Declares `L_f`, a bound on `||hess f||` at the critical points.
    pub fn with_hessian_bound(mut self, l_f: f64) -> Self {
        self.lipschitz_hess = Some(l_f);
        self
    }

    pub fn zero(n: usize) -> Self {
        ProxableFn::new(crate::functions::Zero::new(n), 0.0).with_hessian_bound(0.0)
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_zero()
    }

    pub fn hessian_bound(&self) -> Option<f64> {
        self.lipschitz_hess
    }

    pub fn function(&self) -> &dyn Function {
        self.func.as_ref()
    }

    pub fn value(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim(), x, "f")?;
        let v = self.func.value(x);
        if matches!(v, ExtReal::Finite(a) if a.is_nan()) {
            return Err(Error::NonFiniteValue("f value".into()));
        }
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x, "f")?;
        self.func
            .gradient(x)
            .ok_or_else(|| Error::GradientUnavailable(format!("{:?}", self.func)))
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Mat> {
        check_dim(self.dim(), x, "f")?;
        hessian_or_fd(self.func.as_ref(), x, "f")
    }

    /// Probe-based prox-boundedness check: `f(u) + ||u||^2/(2 gamma)` must not
    /// keep decreasing on shells of growing radius, for each `gamma` probed.
    pub fn looks_prox_bounded<R: Rng>(&self, gammas: &[f64], rng: &mut R) -> bool {
        let n = self.dim();
        let radii = [1.0, 10.0, 100.0, 1000.0];
        gammas.iter().all(|&gamma| {
            let shell_min: Vec<f64> = radii
                .iter()
                .map(|&r| {
                    (0..64)
                        .map(|_| {
                            let u = random_on_sphere(n, r, rng);
                            match self.func.value(&u) {
                                ExtReal::Finite(v) => v + r * r / (2.0 * gamma),
                                ExtReal::PosInf => f64::INFINITY,
                            }
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            shell_min[3] >= shell_min[2] - 1e-9 * (1.0 + shell_min[2].abs())
        })
    }
}

impl Proxable for ProxableFn {
    fn function(&self) -> &dyn Function {
        self.func.as_ref()
    }
    fn weak_convexity(&self) -> f64 {
        self.weak_convexity
    }
    fn hessian_at(&self, x: &[f64]) -> Result<Mat> {
        self.hessian(x)
    }
}

pub(crate) fn random_on_sphere<R: Rng>(n: usize, r: f64, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let nv = vec_ops::norm(&v);
        if nv > 1e-12 {
            return vec_ops::scale(&v, r / nv);
        }
    }
}

/// The linear map `L: R^n -> R^m` with its operator norm.
#[derive(Clone, Debug)]
pub struct LinearMap {
    matrix: Mat,
    op_norm: f64,
}

impl LinearMap {
    pub fn new(matrix: Mat) -> Result<Self> {
        let op_norm = matrix.spectral_norm()?;
        Ok(LinearMap { matrix, op_norm })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            matrix: Mat::identity(n),
            op_norm: if n == 0 { 0.0 } else { 1.0 },
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn range_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.matrix.tr_mul_vec(y)
    }

    /// `L^T M L`
    pub fn congruence(&self, m: &Mat) -> Mat {
        self.matrix.transpose().matmul(m).matmul(&self.matrix)
    }
}

/// Known critical points of `phi`, in x-space.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Landmarks {
    pub minimizers: Vec<Vec<f64>>,
    pub saddles: Vec<Vec<f64>>,
}

/// Constants entering the step-size rules.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Constants {
    pub l_g: f64,
    pub l_h: f64,
    pub l_norm: f64,
    pub beta_f: f64,
    pub l_f: Option<f64>,
}

impl Constants {
    /// `L_g + L_h ||L||^2`
    pub fn smooth_part(&self) -> f64 {
        self.l_g + self.l_h * self.l_norm * self.l_norm
    }
}

/// `phi(x) = f(x) + g(x) + h(Lx)`.
#[derive(Clone, Debug)]
pub struct ProblemTriple {
    pub name: String,
    pub f: ProxableFn,
    pub g: SmoothFn,
    pub h: SmoothFn,
    pub l: LinearMap,
    pub landmarks: Landmarks,
}

impl ProblemTriple {
    pub fn new(
        name: impl Into<String>,
        f: ProxableFn,
        g: SmoothFn,
        h: SmoothFn,
        l: LinearMap,
    ) -> Result<Self> {
        let n = g.dim();
        if f.dim() != n || l.domain_dim() != n || h.dim() != l.range_dim() {
            return Err(Error::DimensionMismatch(format!(
                "f: R^{}, g: R^{}, L: R^{} -> R^{}, h: R^{}",
                f.dim(),
                n,
                l.domain_dim(),
                l.range_dim(),
                h.dim()
            )));
        }
        Ok(ProblemTriple {
            name: name.into(),
            f,
            g,
            h,
            l,
            landmarks: Landmarks::default(),
        })
    }

    pub fn with_landmarks(mut self, landmarks: Landmarks) -> Self {
        self.landmarks = landmarks;
        self
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    pub fn m(&self) -> usize {
        self.h.dim()
    }

    pub fn constants(&self) -> Constants {
        Constants {
            l_g: self.g.lipschitz_grad(),
            l_h: self.h.lipschitz_grad(),
            l_norm: self.l.op_norm(),
            beta_f: self.f.weak_convexity,
            l_f: self.f.hessian_bound(),
        }
    }

    /// Supremum of admissible `gamma` (`+inf` when nothing binds).
    pub fn gamma_limit(&self) -> ExtReal {
        let c = self.constants();
        [Some(c.smooth_part()), Some(c.beta_f), c.l_f]
            .into_iter()
            .flatten()
            .filter(|v| *v > 0.0)
            .map(|v| ExtReal::Finite(1.0 / v))
            .fold(ExtReal::PosInf, ExtReal::min)
    }

    pub fn phi_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let gf = self.f.gradient(x)?;
        let gg = self.g.gradient(x)?;
        let gh = self.l.adjoint(&self.h.gradient(&self.l.apply(x))?);
        Ok(vec_ops::add(&vec_ops::add(&gf, &gg), &gh))
    }

    /// `hess f + hess g + L^T hess h L`
    pub fn phi_hessian(&self, x: &[f64]) -> Result<Mat> {
        let hf = self.f.hessian(x)?;
        let hg = self.g.hessian(x)?;
        let hh = self.l.congruence(&self.h.hessian(&self.l.apply(x))?);
        Ok(hf.add(&hg).add(&hh))
    }
}

/// `f(x) + g(x) + h(Lx)`
pub fn phi_value(p: &ProblemTriple, x: &[f64]) -> Result<ExtReal> {
    let fv = p.f.value(x)?;
    let gv = p.g.value(x)?;
    let hv = p.h.value(&p.l.apply(x))?;
    Ok(fv + gv + hv)
}

/// Largest observed `||grad(x) - grad(y)|| / ||x - y||` over random pairs in
/// the box `[-radius, radius]^n`.
pub fn lipschitz_ratio_probe<R: Rng>(
    func: &SmoothFn,
    pairs: usize,
    radius: f64,
    rng: &mut R,
) -> Result<f64> {
    let n = func.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
        let y: Vec<f64> = if rng.random_bool(0.5) {
            (0..n).map(|_| rng.random_range(-radius..=radius)).collect()
        } else {
            // nearby pairs catch local curvature peaks
            let d = random_on_sphere(n, 1e-3 * radius, rng);
            vec_ops::add(&x, &d)
        };
        let dx = vec_ops::dist(&x, &y);
        if dx == 0.0 {
            continue;
        }
        let dg = vec_ops::dist(&func.gradient(&x)?, &func.gradient(&y)?);
        worst = worst.max(dg / dx);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Quadratic;

    fn half_sq(n: usize, scale: f64) -> Quadratic {
        Quadratic::new(Mat::identity(n).scale(scale), vec![0.0; n], 0.0).unwrap()
    }

    #[test]
    fn phi_of_zero_triple() {
        let p = ProblemTriple::new(
            "zero",
            ProxableFn::zero(3),
            SmoothFn::zero(3),
            SmoothFn::zero(3),
            LinearMap::identity(3),
        )
        .unwrap();
        assert_eq!(
            phi_value(&p, &[1.0, -2.0, 5.0]).unwrap(),
            ExtReal::Finite(0.0)
        );
    }

    #[test]
    fn phi_of_quadratic_f() {
        let p = ProblemTriple::new(
            "q",
            ProxableFn::new(half_sq(2, 1.0), 0.0),
            SmoothFn::zero(2),
            SmoothFn::zero(2),
            LinearMap::identity(2),
        )
        .unwrap();
        assert_eq!(phi_value(&p, &[1.0, 1.0]).unwrap(), ExtReal::Finite(1.0));
    }

    #[test]
    fn phi_with_linear_map() {
        // 0.5 * 1 + 0.5 * (2 * 1)^2
        let p = ProblemTriple::new(
            "q",
            ProxableFn::zero(1),
            SmoothFn::new(half_sq(1, 1.0), 1.0),
            SmoothFn::new(half_sq(1, 1.0), 1.0),
            LinearMap::new(Mat::from_diag(&[2.0])).unwrap(),
        )
        .unwrap();
        assert_eq!(phi_value(&p, &[1.0]).unwrap(), ExtReal::Finite(2.5));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = ProblemTriple::new(
            "bad",
            ProxableFn::zero(2),
            SmoothFn::zero(3),
            SmoothFn::zero(3),
            LinearMap::identity(3),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ext_real_arithmetic() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(1.0) + 2.0, ExtReal::Finite(3.0));
        assert_eq!(
            ExtReal::PosInf.min(ExtReal::Finite(4.0)),
            ExtReal::Finite(4.0)
        );
        assert!(ExtReal::from_f64(f64::NAN).is_err());
        let s = serde_json::to_string(&[ExtReal::Finite(0.5), ExtReal::PosInf]).unwrap();
        assert_eq!(s, r#"[0.5,"+inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![ExtReal::Finite(0.5), ExtReal::PosInf]);
    }

    #[test]
    fn gamma_limit_takes_tightest_bound() {
        let p = ProblemTriple::new(
            "q",
            ProxableFn::new(half_sq(1, -0.5), 0.5),
            SmoothFn::new(half_sq(1, 1.0), 1.0),
            SmoothFn::zero(1),
            LinearMap::identity(1),
        )
        .unwrap();
        assert_eq!(p.gamma_limit(), ExtReal::Finite(1.0));
    }
}
