//! Dense matrix kernels: column-major storage, `vec`/Kronecker algebra,
//! Cholesky factorization with cached log-determinant, and SPD solves.
//!
//! Storage is column-major so that [`Matrix::vec`] is a plain copy of the
//! backing buffer: entry `(i, j)` of an `n x n` matrix sits at `j * n + i`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Inverse of [`Matrix::vec`]: reshapes a length-`n²` column stack.
    pub fn unvec(n: usize, v: &[f64]) -> Result<Self> {
        Matrix::from_col_major(n, n, v.to_vec())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major backing buffer.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Column stacking: entry `(i, j)` lands at position `j * rows + i`.
    pub fn vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_mut(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add_diag(&mut self, s: f64) {
        let k = self.rows.min(self.cols);
        for i in 0..k {
            self[(i, i)] += s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrize(&self) -> Matrix {
        debug_assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// Symmetric within `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                for (o, a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "tr_matmul dimension mismatch");
        Matrix::from_fn(self.cols, other.cols, |i, j| {
            self.column(i)
                .iter()
                .zip(other.column(j))
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (k, &x) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(k)) {
                *o += a * x;
            }
        }
        out
    }

    /// Kronecker product: block `(i, j)` of the result is `a_ij · B`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (p, q) = other.shape();
        Matrix::from_fn(self.rows * p, self.cols * q, |r, c| {
            self[(r / p, c / q)] * other[(r % p, c % q)]
        })
    }

    /// `tr(selfᵀ · other)`, i.e. the Frobenius inner product.
    pub fn frobenius_dot(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "frobenius_dot shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

/// Lower Cholesky factor of an SPD matrix together with its log-determinant.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    lower: Matrix,
    log_det: f64,
}

/// Factors `m = L Lᵀ`. Only the lower triangle of `m` is read.
pub fn spd_factor(m: &Matrix) -> Result<SpdFactor> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: (m.rows, m.rows),
            found: m.shape(),
        });
    }
    let n = m.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { dim: n, pivot: j });
        }
        let djj = sqrt(d);
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    let log_det = 2.0 * (0..n).map(|i| ln(l[(i, i)])).sum::<f64>();
    Ok(SpdFactor { lower: l, log_det })
}

/// Relative size of the diagonal jitter added after a failed factorization.
pub const JITTER_SCALE: f64 = 1e-10;

/// [`spd_factor`] with one retry after adding `1e-10 · mean(diag) · I`.
pub fn spd_factor_jittered(m: &Matrix) -> Result<SpdFactor> {
    match spd_factor(m) {
        Ok(f) => Ok(f),
        Err(Error::NotPositiveDefinite { .. }) => spd_factor(&jittered(m)),
        Err(e) => Err(e),
    }
}

pub(crate) fn jittered(m: &Matrix) -> Matrix {
    let n = m.nrows().max(1);
    let mean_diag = m.trace() / n as f64;
    let mut out = m.clone();
    out.add_diag(JITTER_SCALE * mean_diag.abs().max(f64::MIN_POSITIVE));
    out
}

/// Solves `M X = rhs` given the factor of `M`.
pub fn spd_solve(factor: &SpdFactor, rhs: &Matrix) -> Result<Matrix> {
    factor.solve(rhs)
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Reconstructs `L Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.lower.matmul(&self.lower.transpose())
    }

    fn check_rows(&self, rhs: &Matrix) -> Result<()> {
        if rhs.rows != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: (self.dim(), rhs.cols),
                found: rhs.shape(),
            });
        }
        Ok(())
    }

    /// `L⁻¹ v` in place.
    pub fn forward_in_place(&self, v: &mut [f64]) {
        let l = &self.lower;
        let n = self.dim();
        for i in 0..n {
            let mut s = v[i];
            for k in 0..i {
                s -= l[(i, k)] * v[k];
            }
            v[i] = s / l[(i, i)];
        }
    }

    /// `L⁻ᵀ v` in place.
    pub fn backward_in_place(&self, v: &mut [f64]) {
        let l = &self.lower;
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = v[i];
            for k in i + 1..n {
                s -= l[(k, i)] * v[k];
            }
            v[i] = s / l[(i, i)];
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim(), "solve_vec dimension mismatch");
        let mut x = b.to_vec();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        x
    }

    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_rows(rhs)?;
        let mut out = rhs.clone();
        let n = self.dim();
        for j in 0..rhs.cols {
            let col = &mut out.data[j * n..(j + 1) * n];
            self.forward_in_place(col);
            self.backward_in_place(col);
        }
        Ok(out)
    }

    /// `L⁻¹ · rhs`.
    pub fn solve_lower(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_rows(rhs)?;
        let mut out = rhs.clone();
        let n = self.dim();
        for j in 0..rhs.cols {
            self.forward_in_place(&mut out.data[j * n..(j + 1) * n]);
        }
        Ok(out)
    }

    /// `L⁻ᵀ · rhs`.
    pub fn solve_upper(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_rows(rhs)?;
        let mut out = rhs.clone();
        let n = self.dim();
        for j in 0..rhs.cols {
            self.backward_in_place(&mut out.data[j * n..(j + 1) * n]);
        }
        Ok(out)
    }

    /// Symmetric inverse `M⁻¹`.
    pub fn inverse(&self) -> Matrix {
        let id = Matrix::identity(self.dim());
        // dims conform by construction
        self.solve(&id).expect("square identity").symmetrize()
    }

    /// `tr(M⁻¹ A)`.
    pub fn trace_solve(&self, a: &Matrix) -> Result<f64> {
        Ok(self.solve(a)?.trace())
    }

    /// Quadratic form `vᵀ M⁻¹ v`.
    pub fn inv_quad(&self, v: &[f64]) -> f64 {
        let mut w = v.to_vec();
        self.forward_in_place(&mut w);
        w.iter().map(|x| x * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> Matrix {
        // xorshift so the unit tests need no RNG plumbing
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        Matrix::from_fn(n, n, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    fn random_spd(n: usize, seed: u64) -> Matrix {
        let a = random_matrix(n, seed);
        let mut m = a.matmul(&a.transpose());
        m.add_diag(n as f64 * 0.5);
        m
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(m.vec(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(Matrix::identity(2).vec(), vec![1.0, 0.0, 0.0, 1.0]);
        let n = 3;
        let m = random_matrix(n, 4);
        let v = m.vec();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(v[j * n + i], m[(i, j)]);
            }
        }
        assert_eq!(Matrix::unvec(n, &v).unwrap(), m);
    }

    #[test]
    fn vec_kron_identity() {
        for seed in 0..20 {
            let a = random_matrix(3, seed);
            let x = random_matrix(3, seed + 100);
            let b = random_matrix(3, seed + 200);
            let lhs = a.matmul(&x).matmul(&b).vec();
            let rhs = b.transpose().kron(&a).mul_vec(&x.vec());
            for (l, r) in lhs.iter().zip(&rhs) {
                assert!((l - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kron_examples() {
        assert_eq!(Matrix::identity(2).kron(&Matrix::identity(2)), Matrix::identity(4));
        let m = random_matrix(3, 7);
        let c = Matrix::from_rows(&[&[2.5]]);
        assert_eq!(c.kron(&m), m.scale(2.5));
        let (a, b, c, d) = (
            random_matrix(2, 1),
            random_matrix(2, 2),
            random_matrix(2, 3),
            random_matrix(2, 4),
        );
        let lhs = a.kron(&b).matmul(&c.kron(&d));
        let rhs = a.matmul(&c).kron(&b.matmul(&d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        assert_eq!(Matrix::zeros(2, 3).kron(&Matrix::zeros(4, 5)).shape(), (8, 15));
    }

    #[test]
    fn factor_examples() {
        let f = spd_factor(&Matrix::identity(3)).unwrap();
        assert_eq!(f.lower(), &Matrix::identity(3));
        assert_eq!(f.log_det(), 0.0);

        let f = spd_factor(&Matrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(f.lower(), &Matrix::from_diag(&[2.0, 3.0]));
        assert!((f.log_det() - 36f64.ln()).abs() < 1e-14);

        let bad = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(spd_factor(&bad), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn factor_reconstructs() {
        for seed in 0..10 {
            let m = random_spd(5, seed);
            let f = spd_factor(&m).unwrap();
            let rel = (&f.reconstruct() - &m).frobenius_norm() / m.frobenius_norm();
            assert!(rel < 1e-8);
            let logdet: f64 = 2.0 * f.lower().diag().iter().map(|d| d.ln()).sum::<f64>();
            assert!((logdet - f.log_det()).abs() < 1e-14 * logdet.abs().max(1.0));
        }
    }

    #[test]
    fn solve_examples() {
        let b = random_matrix(3, 9);
        let f = spd_factor(&Matrix::identity(3)).unwrap();
        assert_eq!(spd_solve(&f, &b).unwrap(), b);

        let f = spd_factor(&Matrix::from_diag(&[2.0, 3.0])).unwrap();
        let x = spd_solve(&f, &Matrix::identity(2)).unwrap();
        assert!(x.max_abs_diff(&Matrix::from_diag(&[0.5, 1.0 / 3.0])) < 1e-15);

        let f = spd_factor(&Matrix::identity(2)).unwrap();
        assert!(matches!(
            spd_solve(&f, &Matrix::zeros(3, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solve_residual() {
        for seed in 0..10 {
            let m = random_spd(4, seed + 50);
            let rhs = random_matrix(4, seed + 60);
            let x = spd_solve(&spd_factor(&m).unwrap(), &rhs).unwrap();
            let res = (&m.matmul(&x) - &rhs).frobenius_norm() / rhs.frobenius_norm();
            assert!(res < 1e-8);
        }
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        // rank-one PSD matrix: exact pivot hits zero, jitter makes it PD
        let v = [1.0, 2.0, 3.0];
        let m = Matrix::from_fn(3, 3, |i, j| v[i] * v[j]);
        assert!(spd_factor(&m).is_err());
        assert!(spd_factor_jittered(&m).is_ok());
        let bad = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(spd_factor_jittered(&bad).is_err());
    }
}
