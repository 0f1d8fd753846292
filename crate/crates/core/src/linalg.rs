//! Dense real vectors and matrices.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; the helpers in [`vec_ops`] cover
//! the handful of BLAS-1 operations the solvers need. [`Mat`] is a row-major
//! dense matrix with LU (partial pivoting) solves and a cyclic Jacobi
//! eigensolver for symmetric matrices. Everything here targets desk-scale
//! problems (n up to a few hundred).

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a factorization is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;
/// Condition-number ceiling for [`solve_linear`].
pub const MAX_COND: f64 = 1e12;
/// Symmetry tolerance, relative to `1 + ||M||_inf`.
pub const SYM_TOL: f64 = 1e-10;

pub mod vec_ops {
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm(a: &[f64]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn norm_inf(a: &[f64]) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
        a.iter().map(|x| x * s).collect()
    }

    /// `a + s * b`
    pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    }

    pub fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(a: &[f64]) -> bool {
        a.iter().all(|x| x.is_finite())
    }
}

use vec_ops::*;

/// Row-major dense matrix. Serializes as an array of rows.
#[derive(Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&rows)
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    /// `u v^T`
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        let mut m = Mat::zeros(u.len(), v.len());
        for i in 0..u.len() {
            for j in 0..v.len() {
                m[(i, j)] = u[i] * v[j];
            }
        }
        m
    }

    /// Matrix whose columns are `cols`.
    pub fn from_cols(cols: &[Vec<f64>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Mat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(Error::DimensionMismatch("ragged columns".into()));
            }
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_mul_vec dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: add(&self.data, &other.data),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: scale(&self.data, s),
        }
    }

    /// `self + s I`
    pub fn add_diag(&self, s: f64) -> Mat {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += s;
        }
        m
    }

    /// `(M + M^T) / 2`
    pub fn symmetrize(&self) -> Mat {
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    /// `max |M_ij - M_ji|`
    pub fn asymmetry(&self) -> f64 {
        let mut a: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                a = a.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        a
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.asymmetry() <= SYM_TOL * (1.0 + self.norm_inf())
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn all_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<Mat> {
        self.lu()?.inverse()
    }

    /// Spectral norm via the eigenvalues of `M^T M`.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(0.0);
        }
        let gram = self.transpose().matmul(self).symmetrize();
        let eig = sym_eigen(&gram)?;
        Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Mat,
    perm: Vec<usize>,
    norm_inf: f64,
}

impl Lu {
    pub fn factor(m: &Mat) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                m.rows, m.cols
            )));
        }
        if !m.all_finite() {
            return Err(Error::NonFiniteValue("matrix entries".into()));
        }
        let n = m.rows;
        let norm_inf = m.norm_inf();
        let threshold = PIVOT_TOL * norm_inf;
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::SingularMatrix { pivot, threshold });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
            }
            let akk = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / akk;
                a[(i, k)] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    a.data[i * n + j] -= l * a.data[k * n + j];
                }
            }
        }
        Ok(Lu {
            n,
            lu: a,
            perm,
            norm_inf,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve dimension mismatch");
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> Result<Mat> {
        let n = self.n;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        if !inv.all_finite() {
            return Err(Error::NonFiniteValue("matrix inverse".into()));
        }
        Ok(inv)
    }

    /// `||M||_inf * ||M^-1||_inf`, computed from the explicit inverse.
    pub fn cond_inf(&self) -> Result<f64> {
        Ok(self.norm_inf * self.inverse()?.norm_inf())
    }
}

/// Solves `M y = b` by partial-pivot LU with one step of iterative refinement.
pub fn solve_linear(m: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} system",
            b.len(),
            m.rows,
            m.cols
        )));
    }
    if !all_finite(b) {
        return Err(Error::NonFiniteValue("right-hand side".into()));
    }
    let lu = m.lu()?;
    let cond = lu.cond_inf()?;
    if cond > MAX_COND {
        return Err(Error::IllConditioned(cond));
    }
    let mut y = lu.solve(b);
    let r = sub(b, &m.mul_vec(&y));
    let dy = lu.solve(&r);
    for (yi, d) in y.iter_mut().zip(&dy) {
        *yi += d;
    }
    if !all_finite(&y) {
        return Err(Error::NonFiniteValue("solution".into()));
    }
    Ok(y)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Mat,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Lambda) V^T`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.len();
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Symmetric eigensolver by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12 * ||M||_F`.
pub fn sym_eigen(m: &Mat) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigen of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    if !m.all_finite() {
        return Err(Error::NonFiniteValue("matrix entries".into()));
    }
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric(m.asymmetry()));
    }
    let n = m.rows;
    let mut a = m.symmetrize();
    let mut v = Mat::identity(n);
    let target = 1e-12 * a.norm_fro();

    let off = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNotConverged(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J on rows/cols p, q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn lambda_min_sym(m: &Mat) -> Result<f64> {
    Ok(sym_eigen(&m.symmetrize())?.min())
}
