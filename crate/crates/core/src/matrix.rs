//! Dense square complex matrices stored row-major.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-square or
    /// non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::NotSquare { rows: dim, len: data.len() });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / dim, col: k % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::NotSquare { rows: dim, len: dim * r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        let n = u.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            let row = &mut m.data[i * n..(i + 1) * n];
            for (j, vj) in v.iter().enumerate() {
                row[j] = u[i] * vj.conj();
            }
        }
        m
    }

    /// Circulant matrix whose first column is `col`: `M[i][j] = col[(i - j) mod n]`.
    pub fn circulant(col: &[C64]) -> Self {
        let n = col.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = col[(i + n - j) % n];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.data[i * self.dim + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            let row = self.row(i);
            for (j, a) in row.iter().enumerate() {
                acc += a * other.data[j * n + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// AB − BA
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// max |M − M†| entrywise
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                r = r.max(d.norm());
            }
        }
        r
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_nan_and_ragged_input() {
        let err = ComplexMatrix::from_row_major(2, vec![ONE, ZERO, c(f64::NAN, 0.0), ONE]);
        assert_eq!(err, Err(Error::NonFinite { row: 1, col: 0 }));
        assert!(matches!(
            ComplexMatrix::from_row_major(2, vec![ONE; 3]),
            Err(Error::NotSquare { .. })
        ));
        assert!(ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ONE]]).is_err());
    }

    #[test]
    fn product_trace_and_adjoint() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.0, -1.0), c(3.0, 0.5)]])
            .unwrap();
        let b = a.adjoint();
        assert_eq!(b[(0, 1)], c(0.0, 1.0));
        let ab = a.matmul(&b);
        let direct = ab.trace();
        assert!((a.trace_product(&b) - direct).norm() < 1e-14);
        assert!((direct.re - a.frobenius_norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn circulant_layout() {
        let m = ComplexMatrix::circulant(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(m[(0, 0)], c(1.0, 0.0));
        assert_eq!(m[(1, 0)], c(2.0, 0.0));
        assert_eq!(m[(0, 1)], c(3.0, 0.0));
        assert_eq!(m[(2, 1)], c(2.0, 0.0));
    }
}
