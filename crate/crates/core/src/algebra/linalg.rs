use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut m = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Solve the square system `self · x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        let mut lu = self.clone();
        let mut x = b.to_vec();
        lu_solve_in_place(&mut lu.data, self.rows, &mut x)?;
        Ok(x)
    }

    /// Minimum-norm least-squares solution, for any shape.
    pub fn solve_least_squares(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        if self.rows == self.cols {
            if let Ok(x) = self.solve(b) {
                return Ok(x);
            }
        }
        let svd = self.to_nalgebra().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let rhs = nalgebra::DVector::from_column_slice(b);
        let x = svd.solve(&rhs, smax * 1e-13).map_err(|e| Error::Inconsistent(e.to_string()))?;
        Ok(x.iter().copied().collect())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.cols + c]
    }
}

/// In-place LU solve of an `n×n` row-major system; `a` is destroyed.
pub fn lu_solve_in_place(a: &mut [Complex], n: usize, b: &mut [Complex]) -> Result<()> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    // equilibrate rows so the pivot test is relative to each equation
    for r in 0..n {
        let row = &mut a[r * n..(r + 1) * n];
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::SingularJacobian);
        }
        row.iter_mut().for_each(|z| *z /= m);
        b[r] /= m;
    }
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for r in k + 1..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best <= 1e-15 {
            return Err(Error::SingularJacobian);
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            b.swap(k, p);
        }
        let piv = a[k * n + k];
        for r in k + 1..n {
            let f = a[r * n + k] / piv;
            if f == Complex::new(0.0, 0.0) {
                continue;
            }
            for c in k + 1..n {
                let t = a[k * n + c];
                a[r * n + c] -= f * t;
            }
            let bk = b[k];
            b[r] -= f * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}

/// Number of singular values above `rel_tol · σ_max`; 0 for the zero matrix.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = m.singular_values();
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}
