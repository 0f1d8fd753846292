//! Central finite differences, used as test oracles for analytic derivatives.

use crate::error::{Error, Result};
use crate::linalg::{vec_ops, Mat};

/// `eps^(1/3) * (1 + ||z||)`, balancing truncation against roundoff for
/// first-order central differences.
pub fn default_step(z: &[f64]) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + vec_ops::norm(z))
}

/// `eps^(1/4) * (1 + ||z||)`, the analogous balance for second differences.
pub fn default_second_step(z: &[f64]) -> f64 {
    f64::EPSILON.powf(0.25) * (1.0 + vec_ops::norm(z))
}

fn check(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue("finite-difference probe".into()))
    }
}

/// Central-difference gradient of a fallible scalar field.
pub fn try_fd_gradient<F>(mut f: F, z: &[f64], h: Option<f64>) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let h = h.unwrap_or_else(|| default_step(z));
    let mut x = z.to_vec();
    let mut g = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        x[i] = z[i] + h;
        let fp = check(f(&x)?)?;
        x[i] = z[i] - h;
        let fm = check(f(&x)?)?;
        x[i] = z[i];
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

/// Central-difference gradient, componentwise `(f(z + h e_i) - f(z - h e_i)) / 2h`.
pub fn fd_gradient<F>(f: F, z: &[f64], h: Option<f64>) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    try_fd_gradient(|x| Ok(f(x)), z, h)
}

/// Central-difference Jacobian of a fallible vector field; column `j` holds
/// the derivative along `e_j`.
pub fn try_fd_jacobian<F>(mut map: F, z: &[f64], h: Option<f64>) -> Result<Mat>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let h = h.unwrap_or_else(|| default_step(z));
    let n = z.len();
    let mut x = z.to_vec();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        x[j] = z[j] + h;
        let fp = map(&x)?;
        x[j] = z[j] - h;
        let fm = map(&x)?;
        x[j] = z[j];
        if fp.len() != fm.len() {
            return Err(Error::DimensionMismatch("map output length changed".into()));
        }
        if !vec_ops::all_finite(&fp) || !vec_ops::all_finite(&fm) {
            return Err(Error::NonFiniteValue("finite-difference probe".into()));
        }
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    Mat::from_cols(&cols)
}

pub fn fd_jacobian<F>(map: F, z: &[f64], h: Option<f64>) -> Result<Mat>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    try_fd_jacobian(|x| Ok(map(x)), z, h)
}

/// Second-order central-difference Hessian from function values only.
pub fn try_fd_hessian<F>(mut f: F, z: &[f64], h: Option<f64>) -> Result<Mat>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let h = h.unwrap_or_else(|| default_second_step(z));
    let n = z.len();
    let mut hess = Mat::zeros(n, n);
    let mut x = z.to_vec();
    let f0 = check(f(z)?)?;
    for i in 0..n {
        x[i] = z[i] + h;
        let fp = check(f(&x)?)?;
        x[i] = z[i] - h;
        let fm = check(f(&x)?)?;
        x[i] = z[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut probe = |si: f64, sj: f64| -> Result<f64> {
                x[i] = z[i] + si * h;
                x[j] = z[j] + sj * h;
                let v = check(f(&x)?);
                x[i] = z[i];
                x[j] = z[j];
                v
            };
            let fpp = probe(1.0, 1.0)?;
            let fpm = probe(1.0, -1.0)?;
            let fmp = probe(-1.0, 1.0)?;
            let fmm = probe(-1.0, -1.0)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_half_square_norm() {
        let g = fd_gradient(|x| 0.5 * vec_ops::dot(x, x), &[1.0, 2.0], None).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-6 && (g[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = fd_gradient(|_| 7.5, &[0.3, -4.0, 2.0], None).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cubic_central_difference_error_is_second_order() {
        // (f(1+h) - f(1-h)) / 2h = 3 + h^2 exactly for f = x^3
        let h = 1e-5;
        let g = fd_gradient(|x| x[0].powi(3), &[1.0], Some(h)).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9, "{}", g[0] - 3.0);
    }

    #[test]
    fn nan_probe_is_an_error() {
        let err = fd_gradient(|x| if x[0] > 0.0 { f64::NAN } else { 0.0 }, &[0.0], None);
        assert!(matches!(err, Err(Error::NonFiniteValue(_))));
    }

    #[test]
    fn jacobian_of_identity() {
        let j = fd_jacobian(|x| x.to_vec(), &[0.5, -2.0, 3.0], None).unwrap();
        assert!(j.max_abs_diff(&Mat::identity(3)) < 1e-10);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let a = Mat::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0], vec![4.0, 0.0]]).unwrap();
        let j = fd_jacobian(|x| a.mul_vec(x), &[1.0, 1.0], None).unwrap();
        assert!(j.max_abs_diff(&a) < 1e-6);
    }

    #[test]
    fn jacobian_of_quadratic_map() {
        let j = fd_jacobian(|x| vec![x[0] * x[0], x[0] * x[1]], &[1.0, 1.0], None).unwrap();
        let expected = Mat::from_rows(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(j.max_abs_diff(&expected) < 1e-5);
    }

    #[test]
    fn hessian_of_cubic_polynomial() {
        // f = x^2 y + y^3 ; H = [[2y, 2x], [2x, 6y]]
        let f = |x: &[f64]| Ok(x[0] * x[0] * x[1] + x[1].powi(3));
        let h = try_fd_hessian(f, &[1.5, -0.5], None).unwrap();
        let expected = Mat::from_rows(&[vec![-1.0, 3.0], vec![3.0, -3.0]]).unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-5, "{h:?}");
    }
}
