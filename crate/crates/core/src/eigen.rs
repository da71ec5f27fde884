//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)`. For complex
//! input the pair is first rotated to a real value by a diagonal phase, after
//! which the classic real Jacobi rotation applies. Real symmetric input runs
//! through the same code with `f64` scalars, which is about four times
//! cheaper than the complex path.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub const MAX_SWEEPS: usize = 50;

/// Relative off-diagonal norm at which the iteration stops.
const CONVERGED: f64 = 1e-15;

pub(crate) trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn re(self) -> f64;
    fn from_re(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> C64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> C64 {
        self
    }
}

/// Unsorted eigenpairs: `values[k]` belongs to column `k` of `vectors`.
pub(crate) struct RawEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Diagonalizes a Hermitian matrix. The input must already be exactly
/// Hermitian (symmetrized).
pub(crate) fn jacobi_hermitian(m: &ComplexMatrix) -> Result<RawEigen> {
    let n = m.dim();
    if m.is_real() {
        let a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
        jacobi(n, a)
    } else {
        jacobi(n, m.as_slice().to_vec())
    }
}

fn off_norm<S: Scalar>(n: usize, a: &[S]) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let x = a[p * n + q].abs();
            s += x * x;
        }
    }
    s.sqrt()
}

fn jacobi<S: Scalar>(n: usize, mut a: Vec<S>) -> Result<RawEigen> {
    // vt holds V transposed so that the rotation touches contiguous rows
    let mut vt = vec![S::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = S::one();
    }
    let scale = a.iter().map(|z| z.abs() * z.abs()).sum::<f64>().sqrt();
    let target = CONVERGED * scale;

    let mut converged = n < 2 || scale == 0.0;
    let mut off = 0.0;
    let mut sweep = 0;
    while !converged {
        off = off_norm(n, &a);
        if off <= target {
            converged = true;
            break;
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        // Early sweeps only rotate the larger elements.
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.abs();
                if mag == 0.0 || mag < threshold {
                    continue;
                }
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                if sweep > 3 && mag * 1e18 < app.abs().min(aqq.abs()) {
                    a[p * n + q] = S::zero();
                    a[q * n + p] = S::zero();
                    continue;
                }
                rotate(n, &mut a, &mut vt, p, q, apq, mag, app, aqq);
            }
        }
        sweep += 1;
    }
    if !converged {
        return Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS, off_norm: off });
    }

    let values = (0..n).map(|i| a[i * n + i].re()).collect();
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for i in 0..n {
            data[i * n + k] = vt[k * n + i].to_complex();
        }
    }
    let vectors = ComplexMatrix::from_row_major(n, data)?;
    Ok(RawEigen { values, vectors })
}

fn row_pair<S>(m: &mut [S], n: usize, p: usize, q: usize) -> (&mut [S], &mut [S]) {
    let (head, tail) = m.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate<S: Scalar>(
    n: usize,
    a: &mut [S],
    vt: &mut [S],
    p: usize,
    q: usize,
    apq: S,
    mag: f64,
    app: f64,
    aqq: f64,
) {
    // phase e = apq / |apq|; the rotation is W = diag(1, ē) · R(θ)
    let e = apq.scale(1.0 / mag);
    let ec = e.conj();
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // rows p, q of W†·A; the columns follow by Hermitian symmetry
    let se = e.scale(s);
    let ce = e.scale(c);
    {
        let (rp, rq) = row_pair(a, n, p, q);
        for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
            let (apk, aqk) = (*x, *y);
            *x = apk.scale(c) - se * aqk;
            *y = apk.scale(s) + ce * aqk;
        }
    }
    for k in 0..n {
        if k != p && k != q {
            a[k * n + p] = a[p * n + k].conj();
            a[k * n + q] = a[q * n + k].conj();
        }
    }
    a[p * n + p] = S::from_re(app - t * mag);
    a[q * n + q] = S::from_re(aqq + t * mag);
    a[p * n + q] = S::zero();
    a[q * n + p] = S::zero();

    let sec = ec.scale(s);
    let cec = ec.scale(c);
    let (vp, vq) = row_pair(vt, n, p, q);
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (vkp, vkq) = (*x, *y);
        *x = vkp.scale(c) - sec * vkq;
        *y = vkp.scale(s) + cec * vkq;
    }
}
