use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;

/// Dense row-major matrix with at most 6 rows and 6 columns.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::DimensionMismatch(format!(
                "matrix dims must be in 1..={MAX_DIM}, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: [0.0; MAX_DIM * MAX_DIM],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        Ok(m)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut m = Self::zeros(r, c)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("non-finite entry at ({i},{j})")));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len(), values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        Ok(m)
    }

    /// Block-diagonal matrix; total dimension must stay within the size cap.
    pub fn block_diag(blocks: &[SmallMatrix]) -> Result<Self> {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols)?;
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
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
        &self.data[i * MAX_DIM..i * MAX_DIM + self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows).expect("dims already valid");
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &SmallMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for j in 0..other.cols {
                out[(i, j)] = (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum();
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    /// `A · M · Aᵀ`, the congruence used by delta-method covariances.
    pub fn sandwich(&self, middle: &SmallMatrix) -> Result<Self> {
        self.matmul(middle)?.matmul(&self.transpose())
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.rows)
            .flat_map(|i| self.row(i).iter().copied())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Determinant by elimination with partial pivoting.
    pub fn determinant(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = *self;
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .expect("nonempty range");
            if a[(piv, col)] == 0.0 {
                return Ok(0.0);
            }
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        Ok(det)
    }

    /// Sylvester's criterion: every leading principal minor is positive.
    pub fn leading_minors_positive(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        (1..=self.rows).all(|k| {
            let mut sub = Self::zeros(k, k).expect("k within bounds");
            for i in 0..k {
                for j in 0..k {
                    sub[(i, j)] = self[(i, j)];
                }
            }
            sub.determinant().is_ok_and(|d| d > 0.0)
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * MAX_DIM + c, b * MAX_DIM + c);
        }
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl From<SmallMatrix> for Vec<Vec<f64>> {
    fn from(m: SmallMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SmallMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SmallMatrix::from_rows(&rows)
    }
}

/// Gauss-Jordan inverse with partial pivoting. A pivot smaller than
/// `1e-12 * max|m_ij|` is reported as singular.
pub fn invert_matrix(m: &SmallMatrix) -> Result<SmallMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let tol = 1e-12 * m.max_abs();
    let mut a = *m;
    let mut inv = SmallMatrix::identity(n)?;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
            .expect("nonempty range");
        let pivot = a[(piv, col)];
        if pivot.abs() < tol || pivot.is_nan() || pivot == 0.0 {
            return Err(Error::Singular { pivot: pivot.abs() });
        }
        if piv != col {
            a.swap_rows(piv, col);
            inv.swap_rows(piv, col);
        }
        let p = a[(col, col)];
        for c in 0..n {
            a[(col, c)] /= p;
            inv[(col, c)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                let av = a[(col, c)];
                let iv = inv[(col, c)];
                a[(r, c)] -= f * av;
                inv[(r, c)] -= f * iv;
            }
        }
    }
    Ok(inv)
}

/// `vᵀ Θ v`.
pub fn quadratic_form(v: &[f64], theta: &SmallMatrix) -> Result<f64> {
    if !theta.is_square() || theta.rows() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against {}x{} matrix",
            v.len(),
            theta.rows(),
            theta.cols()
        )));
    }
    let mut total = 0.0;
    for (i, vi) in v.iter().enumerate() {
        let row: f64 = theta.row(i).iter().zip(v).map(|(t, vj)| t * vj).sum();
        total += vi * row;
    }
    Ok(total)
}
