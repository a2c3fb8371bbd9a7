//! Dense real linear algebra for the problem sizes used here (a few hundred
//! rows at most): a row-major `Matrix`, slice-based vector helpers, a cyclic
//! Jacobi eigensolver for symmetric matrices, a one-sided Jacobi SVD,
//! minimum-norm least squares and Haar-distributed orthogonal sampling.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Singular values below `PINV_RTOL * sigma_max` are treated as zero by
/// pseudoinverse solves and rank decisions.
pub const PINV_RTOL: f64 = 1e-10;

/// Relative tolerance for the symmetry precondition of [`sym_eigen`].
pub const SYMMETRY_RTOL: f64 = 1e-12;

const JACOBI_OFF_RTOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract("matrix dimensions must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor for literals; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entrywise `self += other`.
    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `(M + Mᵀ) / 2` for a square matrix.
    pub fn symmetric_part(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let mut s = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                s[(r, c)] = 0.5 * (self[(r, c)] + self[(c, r)]);
            }
        }
        s
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = M x`, row dot products accumulated left to right.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x);
        }
    }

    /// Writes `m` into the block starting at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, m: &Matrix) {
        for r in 0..m.rows {
            for c in 0..m.cols {
                self[(r0 + r, c0 + c)] = m[(r, c)];
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc + (x - y) * (x - y))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over all `(p, q)` pairs, annihilating each off-diagonal entry with a
/// plane rotation, until the off-diagonal Frobenius mass drops below
/// `1e-13 * ||M||_F`. Gives up after 100 sweeps.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::contract(format!(
            "sym_eigen needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::contract("sym_eigen input has non-finite entries"));
    }
    let n = m.rows;
    let scale = m.frobenius_norm();
    let asym = m.sub(&m.transpose()).frobenius_norm();
    if asym > SYMMETRY_RTOL * scale {
        return Err(Error::contract(format!(
            "sym_eigen input is not symmetric (||M - Mt|| = {asym:e}, ||M|| = {scale:e})"
        )));
    }

    let mut a = m.symmetric_part();
    let mut v = Matrix::identity(n);
    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[(r, c)] * a[(r, c)];
                }
            }
        }
        s.sqrt()
    };

    let target = JACOBI_OFF_RTOL * scale;
    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged || off(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate_columns(&mut a, p, q, c, s);
                rotate_rows(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    if !converged {
        let residual = off(&a);
        if residual > target {
            return Err(Error::Numerical {
                what: format!("Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"),
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.rows {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = c * mp - s * mq;
        m[(k, q)] = s * mp + c * mq;
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.cols {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = c * mp - s * mq;
        m[(q, k)] = s * mp + c * mq;
    }
}

/// Thin singular value decomposition `M = U diag(sigma) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x r`, orthonormal columns (zero columns for zero singular values).
    pub u: Matrix,
    /// Descending, length `r = min(rows, cols)`.
    pub sigma: Vec<f64>,
    /// `cols x r` when `rows >= cols`; for wide inputs `cols x rows`.
    pub v: Matrix,
}

impl Svd {
    /// Singular values above the pseudoinverse cutoff.
    pub fn rank(&self) -> usize {
        let cutoff = PINV_RTOL * self.sigma.first().copied().unwrap_or(0.0);
        self.sigma
            .iter()
            .filter(|&&s| s > cutoff && s > 0.0)
            .count()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalises the columns of `M` by plane rotations accumulated into
/// `V`; singular values are the final column norms. Small singular values
/// keep full relative accuracy, which the rank decisions downstream rely on.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::contract("svd input has non-finite entries"));
    }
    if m.rows < m.cols {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let (rows, cols) = (m.rows, m.cols);
    // column-major working copy
    let mut u: Vec<Vec<f64>> = (0..cols).map(|c| m.column(c)).collect();
    let mut v = Matrix::identity(cols);
    let eps = 1e-15;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = norm_sq(&u[p]);
                let beta = norm_sq(&u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = u.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical {
            what: format!("one-sided Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps"),
            residual: f64::NAN,
        });
    }

    let mut sigma: Vec<f64> = u.iter().map(|col| norm(col)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let mut um = Matrix::zeros(rows, cols);
    let mut vm = Matrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        for r in 0..rows {
            um[(r, dst)] = if s > 0.0 { u[src][r] / s } else { 0.0 };
        }
        for r in 0..cols {
            vm[(r, dst)] = v[(r, src)];
        }
    }
    sigma = order.iter().map(|&i| sigma[i]).collect();
    Ok(Svd {
        u: um,
        sigma,
        v: vm,
    })
}

/// Descending singular values, `min(rows, cols)` of them.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.sigma)
}

/// Minimum-norm minimiser of `||M x - v||`, truncating singular values below
/// `PINV_RTOL * sigma_max`.
pub fn least_squares_min_norm(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.rows {
        return Err(Error::contract(format!(
            "right-hand side has length {}, matrix has {} rows",
            v.len(),
            m.rows
        )));
    }
    let dec = svd(m)?;
    Ok(pinv_apply(&dec, v))
}

pub(crate) fn pinv_apply(dec: &Svd, v: &[f64]) -> Vec<f64> {
    let n = dec.v.rows();
    let mut x = vec![0.0; n];
    for j in 0..dec.rank() {
        let coef = dec
            .u
            .column(j)
            .iter()
            .zip(v)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / dec.sigma[j];
        for (r, xr) in x.iter_mut().enumerate() {
            *xr += coef * dec.v[(r, j)];
        }
    }
    x
}

/// Haar-distributed orthogonal matrix: Householder QR of a standard normal
/// matrix, with each column of Q multiplied by the sign of `R`'s diagonal.
pub fn random_orthogonal(d: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if d == 0 {
        return Err(Error::param(
            "orthogonal matrix dimension must be at least 1",
        ));
    }
    let mut a = Matrix::from_row_major(d, d, rng.normal_vec(d * d))?;
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut r_diag = vec![0.0; d];

    for k in 0..d {
        let x: Vec<f64> = (k..d).map(|r| a[(r, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            reflectors.push(vec![0.0; d - k]);
            r_diag[k] = 0.0;
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut vk = x;
        vk[0] -= alpha;
        let vn = norm(&vk);
        for e in vk.iter_mut() {
            *e /= vn;
        }
        for c in k..d {
            let proj: f64 = (k..d).map(|r| vk[r - k] * a[(r, c)]).sum();
            for r in k..d {
                a[(r, c)] -= 2.0 * vk[r - k] * proj;
            }
        }
        r_diag[k] = a[(k, k)];
        reflectors.push(vk);
    }

    // Q = H_0 H_1 ... H_{d-1}
    let mut q = Matrix::identity(d);
    for k in (0..d).rev() {
        let vk = &reflectors[k];
        for c in 0..d {
            let proj: f64 = (k..d).map(|r| vk[r - k] * q[(r, c)]).sum();
            for r in k..d {
                q[(r, c)] -= 2.0 * vk[r - k] * proj;
            }
        }
    }
    for (c, &rd) in r_diag.iter().enumerate() {
        if rd < 0.0 {
            for r in 0..d {
                q[(r, c)] = -q[(r, c)];
            }
        }
    }
    Ok(q)
}
