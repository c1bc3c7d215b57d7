//! Matrices of rational functions sharing the complex frequency variable `s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::linalg::CMatrix;
use crate::rational::RationalC;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransferRepr", into = "TransferRepr")]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    /// Row-major.
    entries: Vec<RationalC>,
}

#[derive(Serialize, Deserialize)]
struct TransferRepr {
    rows: usize,
    cols: usize,
    entries: Vec<RationalC>,
}

impl TryFrom<TransferRepr> for TransferMatrix {
    type Error = QeqError;
    fn try_from(t: TransferRepr) -> Result<Self> {
        TransferMatrix::new(t.rows, t.cols, t.entries)
    }
}

impl From<TransferMatrix> for TransferRepr {
    fn from(t: TransferMatrix) -> Self {
        TransferRepr {
            rows: t.rows,
            cols: t.cols,
            entries: t.entries,
        }
    }
}

impl TransferMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalC>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QeqError::DimensionMismatch(format!(
                "transfer matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(QeqError::DimensionMismatch(format!(
                "{rows}x{cols} transfer matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(TransferMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RationalC) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        TransferMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn scalar(r: RationalC) -> Self {
        TransferMatrix {
            rows: 1,
            cols: 1,
            entries: vec![r],
        }
    }

    pub fn constant(k: &CMatrix) -> Self {
        Self::from_fn(k.nrows(), k.ncols(), |i, j| RationalC::constant(k[(i, j)]))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                RationalC::one()
            } else {
                RationalC::zero()
            }
        })
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

    pub fn entries(&self) -> &[RationalC] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalC {
        &self.entries[i * self.cols + j]
    }

    /// Entrywise evaluation at `s`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.get(i, j).eval(s)?;
            }
        }
        Ok(out)
    }

    pub fn eval_iw(&self, omega: f64) -> Result<CMatrix> {
        self.eval(Complex64::new(0.0, omega))
    }

    /// `T~(s) = [T(-conj(s))]^†`
    pub fn para_conjugate(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).para_conjugate())
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<Self> {
        if row0 + rows > self.rows || col0 + cols > self.cols || rows == 0 || cols == 0 {
            return Err(QeqError::DimensionMismatch(format!(
                "block {rows}x{cols} at ({row0},{col0}) exceeds {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| {
            self.get(row0 + i, col0 + j).clone()
        }))
    }

    pub fn try_mul(&self, rhs: &TransferMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(QeqError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(RationalC::zero(), |acc, k| {
                &acc + &(self.get(i, k) * rhs.get(k, j))
            })
        }))
    }

    fn zip_with(
        &self,
        rhs: &TransferMatrix,
        f: impl Fn(&RationalC, &RationalC) -> RationalC,
    ) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(QeqError::DimensionMismatch(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(TransferMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &TransferMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &TransferMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        TransferMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.scale(k)).collect(),
        }
    }

    /// Poles of all entries; repeated occurrences across entries are merged.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let mut out: Vec<Complex64> = Vec::new();
        for e in &self.entries {
            for p in e.poles()? {
                if !out
                    .iter()
                    .any(|q| (p - q).norm() <= 1e-9 * q.norm().max(1.0))
                {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.iter().all(|p| p.re < 0.0))
    }
}
