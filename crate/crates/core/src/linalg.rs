//! Dense complex matrices and the handful of factorizations the diagnostics
//! need: singular values, smallest right singular vectors, determinants and
//! inverses. Factorizations are delegated to `nalgebra`.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative threshold under which a smallest singular value is treated as an
/// exact zero.
pub const NUMERICAL_ZERO_REL: f64 = 1e-12;

const SVD_MAX_ITER: usize = 10_000;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    /// Row-major `[re, im]` pairs.
    data: Vec<C64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        ComplexMatrix::from_row_major(r.rows, r.cols, r.data).map_err(serde::de::Error::custom)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar_identity(n, C64::new(1.0, 0.0))
    }

    pub fn scalar_identity(n: usize, c: C64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let data: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&data).expect("rectangular literal")
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn column(entries: &[C64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn column_is_exact_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| {
            let z = self[(i, j)];
            z.re == 0.0 && z.im == 0.0
        })
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise maximum modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference in modulus.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)])
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, block: &ComplexMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row0 + i, col0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> ComplexMatrix {
        ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Singular values in descending order. For a wide matrix only the
    /// `rows` nonzero-capable values are returned.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        if self.data.is_empty() {
            return Ok(Vec::new());
        }
        let svd = self
            .to_nalgebra()
            .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
            .ok_or(Error::SvdFailed)?;
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// `min ||A v||_2` over unit vectors `v`. Zero for wide matrices, whose
    /// kernel is always nontrivial.
    pub fn smallest_singular_value(&self) -> Result<f64> {
        let sv = self.singular_values()?;
        if self.cols > self.rows {
            return Ok(0.0);
        }
        Ok(sv.last().copied().unwrap_or(0.0))
    }

    pub fn op_norm(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Smallest singular value together with a unit right singular vector
    /// attaining it. The vector's first component above `1e-12` in modulus
    /// is rotated to be real positive.
    ///
    /// When the matrix has an exactly zero column the corresponding
    /// canonical basis vector is returned, since it lies in the kernel
    /// without rounding.
    pub fn min_right_singular_vector(&self) -> Result<(f64, Vec<C64>)> {
        self.check_finite()?;
        let n = self.cols;
        if n == 0 {
            return Err(Error::Shape("matrix without columns".into()));
        }
        if let Some(j) = (0..n).find(|&j| self.column_is_exact_zero(j)) {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[j] = C64::new(1.0, 0.0);
            return Ok((0.0, v));
        }
        // Pad wide matrices with zero rows so the SVD returns a full basis
        // of right singular vectors.
        let padded = if self.rows < n {
            let mut p = DMatrix::<C64>::zeros(n, n);
            for i in 0..self.rows {
                for j in 0..n {
                    p[(i, j)] = self[(i, j)];
                }
            }
            p
        } else {
            self.to_nalgebra()
        };
        let svd = padded
            .try_svd(false, true, f64::EPSILON, SVD_MAX_ITER)
            .ok_or(Error::SvdFailed)?;
        let v_t = svd.v_t.ok_or(Error::SvdFailed)?;
        let (idx, &sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(Error::SvdFailed)?;
        let mut v: Vec<C64> = (0..n).map(|j| v_t[(idx, j)].conj()).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            for z in v.iter_mut() {
                *z *= phase;
            }
        }
        Ok((sigma, v))
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        self.check_finite()?;
        if self.rows == 0 {
            return Ok(C64::new(1.0, 0.0));
        }
        Ok(self.to_nalgebra().lu().determinant())
    }

    /// `ln |det A|` from the LU factors; `-inf` for singular matrices.
    pub fn log_abs_determinant(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        self.check_finite()?;
        if self.rows == 0 {
            return Ok(0.0);
        }
        let u = self.to_nalgebra().lu().u();
        Ok((0..self.rows).map(|i| u[(i, i)].norm().ln()).sum())
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        self.check_finite()?;
        self.to_nalgebra()
            .lu()
            .try_inverse()
            .map(|m| ComplexMatrix::from_nalgebra(&m))
            .ok_or_else(|| Error::Undefined("singular matrix".into()))
    }

    /// Stack the columns of `blocks` vertically.
    pub fn vstack(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::Shape("vstack of blocks with different widths".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = ComplexMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            out.set_block(r0, 0, b);
            r0 += b.rows;
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// True when `value` should be reported as an exact zero relative to `scale`.
pub fn is_numerical_zero(value: f64, scale: f64) -> bool {
    value < NUMERICAL_ZERO_REL * scale.max(1.0)
}
