//! Hermitian operators, their spectral decompositions, and the derived
//! objects used throughout the engine: spectral projectors, the commutator
//! operator `C = −i(AB − BA)`, and unitary exponentials.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::eigen::jacobi_hermitian;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, I, ZERO};

/// Default Hermiticity tolerance, relative to the largest entry magnitude.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative degeneracy grouping tolerance; scaled by `max(1, |a_max|)`.
pub const GROUP_TOL: f64 = 1e-8;

/// A validated observable. The stored matrix is exactly Hermitian.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    label: String,
    residual: f64,
    spectrum: OnceLock<Result<SpectralDecomposition>>,
}

impl HermitianOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max |M − M†|` of the matrix this operator was built from.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Spectral decomposition at the default grouping tolerance, computed on
    /// first use and shared afterwards.
    pub fn spectrum(&self) -> Result<&SpectralDecomposition> {
        self.spectrum
            .get_or_init(|| spectral_decompose(self, None))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(dim), "I")
    }

    pub fn zeros(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::zeros(dim), "0")
    }

    pub fn from_real_diagonal(diag: &[f64], label: impl Into<String>) -> Self {
        Self::trusted(ComplexMatrix::real_diagonal(diag), label)
    }

    /// Real linear combination Σ cᵢAᵢ; Hermitian by construction.
    pub fn linear_combination(terms: &[(f64, &HermitianOperator)], label: impl Into<String>) -> Result<Self> {
        let first = terms.first().ok_or(Error::InvalidDimension(0))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim);
        for (c, op) in terms {
            check_dims(dim, op.dim())?;
            acc = &acc + &op.matrix.scale_real(*c);
        }
        Ok(Self::trusted(acc, label))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::trusted(self.matrix.scale_real(s), self.label.clone())
    }

    /// Matrix that is Hermitian by construction; symmetrized to remove
    /// rounding asymmetry.
    pub(crate) fn trusted(matrix: ComplexMatrix, label: impl Into<String>) -> Self {
        let residual = matrix.hermitian_residual();
        Self {
            matrix: symmetrize(&matrix),
            label: label.into(),
            residual,
            spectrum: OnceLock::new(),
        }
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Validates `m` as an observable: accepted when `max|M − M†| ≤ tol·max|M|`,
/// then symmetrized to `(M + M†)/2`.
pub fn hermitian_from_matrix(m: ComplexMatrix, tol: f64) -> Result<HermitianOperator> {
    let n = m.dim();
    if let Some(k) = m.as_slice().iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { row: k / n, col: k % n });
    }
    let residual = m.hermitian_residual();
    let tolerance = tol * m.max_abs();
    if residual > tolerance {
        return Err(Error::NotHermitian { residual, tolerance });
    }
    Ok(HermitianOperator::trusted(m, ""))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    /// Representative eigenvalue aₙ (mean of the members).
    pub value: f64,
    pub indices: Vec<usize>,
}

impl EigenGroup {
    pub fn degeneracy(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    groups: Vec<EigenGroup>,
}

impl SpectralDecomposition {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index of the group whose representative eigenvalue is nearest `value`.
    pub fn nearest_group(&self, value: f64) -> usize {
        self.groups
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.value - value).abs().total_cmp(&(b.1.value - value).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// V f(Λ) V†
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(i, k)] * fl[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// V Λ V†
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|l| C64::new(l, 0.0))
    }

    /// exp(−i t H / ħ) for the operator this decomposition belongs to.
    pub fn propagator(&self, t: f64, hbar: f64) -> UnitaryMatrix {
        if t == 0.0 {
            return UnitaryMatrix { matrix: ComplexMatrix::identity(self.dim()) };
        }
        let matrix = self.apply_function(|l| (-I * (t * l / hbar)).exp());
        UnitaryMatrix { matrix }
    }
}

/// Eigen-decomposition with ascending eigenvalues, a deterministic phase
/// convention, and degeneracy groups. `group_tol` defaults to
/// `1e-8·max(1, |a_max|)`.
pub fn spectral_decompose(a: &HermitianOperator, group_tol: Option<f64>) -> Result<SpectralDecomposition> {
    let raw = jacobi_hermitian(&a.matrix)?;
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw.values[i].total_cmp(&raw.values[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw.values[k]).collect();

    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (new_k, &old_k) in order.iter().enumerate() {
        let mut col = raw.vectors.column(old_k);
        fix_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            eigenvectors[(i, new_k)] = z;
        }
    }

    let a_max = eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let tol = group_tol.unwrap_or(GROUP_TOL * a_max.max(1.0));
    let groups = group_eigenvalues(&eigenvalues, tol);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, groups })
}

/// Largest-magnitude component made real and positive. Ties within a
/// relative 1e-12 resolve to the lowest index.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Chains adjacent eigenvalues closer than `tol` into one group.
fn group_eigenvalues(sorted: &[f64], tol: f64) -> Vec<EigenGroup> {
    let mut groups: Vec<EigenGroup> = Vec::new();
    for (k, &l) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if l - sorted[k - 1] <= tol => g.indices.push(k),
            _ => groups.push(EigenGroup { value: l, indices: vec![k] }),
        }
    }
    for g in &mut groups {
        g.value = g.indices.iter().map(|&k| sorted[k]).sum::<f64>() / g.indices.len() as f64;
    }
    groups
}

/// Aₙ = Σᵢ |αₙ⁽ⁱ⁾⟩⟨αₙ⁽ⁱ⁾| over one eigenvalue group.
pub fn spectral_projector(d: &SpectralDecomposition, group_index: usize) -> Result<HermitianOperator> {
    let group = d
        .groups
        .get(group_index)
        .ok_or(Error::IndexOutOfRange { index: group_index, len: d.groups.len() })?;
    let n = d.dim();
    let mut m = ComplexMatrix::zeros(n);
    for &k in &group.indices {
        let v = d.eigenvector(k);
        m = &m + &ComplexMatrix::outer(&v, &v);
    }
    Ok(HermitianOperator::trusted(m, format!("P[{}]", group.value)))
}

/// C = −i(AB − BA), so that AB − BA = iC.
pub fn c_operator(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    check_dims(a.dim(), b.dim())?;
    let c = a.matrix.commutator(&b.matrix).scale(-I);
    // rounding in AB − BA scales with |A||B|, not with |C|
    let scale = c.max_abs().max(a.matrix.max_abs() * b.matrix.max_abs() * a.dim() as f64);
    let residual = c.hermitian_residual();
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { residual, tolerance: HERMITIAN_TOL * scale });
    }
    Ok(HermitianOperator::trusted(c, format!("C[{},{}]", a.label, b.label)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    /// ‖U†U − I‖_F
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.matrix.adjoint().matmul(&self.matrix);
        (&p - &ComplexMatrix::identity(self.matrix.dim())).frobenius_norm()
    }

    /// Product `self · other`, itself unitary.
    pub fn then_after(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { matrix: self.matrix.matmul(&other.matrix) }
    }

    /// U M U†
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.matmul(m).matmul(&self.matrix.adjoint())
    }
}

/// U = exp(−i t H / ħ) through the spectral decomposition of `H`.
pub fn unitary_exp(h: &HermitianOperator, t: f64, hbar: f64) -> Result<UnitaryMatrix> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::ConfigInvalid(format!("hbar must be positive, got {hbar}")));
    }
    if t == 0.0 {
        return Ok(UnitaryMatrix::identity(h.dim()));
    }
    Ok(h.spectrum()?.propagator(t, hbar))
}

/// Pauli matrices and spin-½ helpers.
pub mod pauli {
    use super::*;

    pub fn x() -> HermitianOperator {
        HermitianOperator::trusted(
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            "sigma_x",
        )
    }

    pub fn y() -> HermitianOperator {
        let m = ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap();
        HermitianOperator::trusted(m, "sigma_y")
    }

    pub fn z() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0], "sigma_z")
    }
}
