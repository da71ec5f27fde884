//! Density operators: projectors, statistical mixtures, operators that are
//! not projectors at all, and the many mixtures that yield one matrix.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{norm, ComplexMatrix};
use crate::operator::{check_dims, spectral_decompose, HermitianOperator, HERMITIAN_TOL};
use crate::rng;

/// Eigenvalues in `(−NEG_CLAMP, 0)` are rounded up to zero.
pub const NEG_CLAMP: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-10;
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Classification {
    Projector,
    NonProjector,
}

#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    classification: Classification,
    purity: f64,
    // unit vector ψ with ρ = |ψ⟩⟨ψ|, kept when known exactly
    pure_state: Option<Vec<C64>>,
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityOperator {
    /// Validates a matrix as a density operator: Hermitian, unit trace,
    /// positive after clamping eigenvalues within `NEG_CLAMP` of zero.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        let residual = m.hermitian_residual();
        if residual > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { residual, tolerance: HERMITIAN_TOL });
        }
        let h = HermitianOperator::trusted(m, "rho");
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {trace} differs from 1")));
        }
        let d = spectral_decompose(&h, None)?;
        let min = d.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -NEG_CLAMP {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        let matrix = if min < 0.0 {
            let clamped_sum: f64 = d.eigenvalues().iter().map(|l| l.max(0.0)).sum();
            d.apply_function(|l| C64::new(l.max(0.0) / clamped_sum, 0.0))
        } else {
            h.matrix().clone()
        };
        Ok(Self::assemble(matrix, None))
    }

    /// Matrix known to satisfy the density-operator axioms (convex
    /// combinations, unitary conjugates).
    pub(crate) fn trusted(matrix: ComplexMatrix, pure_state: Option<Vec<C64>>) -> Self {
        let h = HermitianOperator::trusted(matrix, "rho");
        Self::assemble(h.matrix().clone(), pure_state)
    }

    fn assemble(matrix: ComplexMatrix, pure_state: Option<Vec<C64>>) -> Self {
        let purity = matrix.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let classification = if (purity - 1.0).abs() <= PROJECTOR_TOL {
            Classification::Projector
        } else {
            Classification::NonProjector
        };
        Self { matrix, classification, purity, pure_state }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64), None)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    pub fn is_projector(&self) -> bool {
        self.classification == Classification::Projector
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn pure_state(&self) -> Option<&[C64]> {
        self.pure_state.as_deref()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = HermitianOperator::trusted(self.matrix.clone(), "rho");
        Ok(spectral_decompose(&h, None)?.eigenvalues().to_vec())
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator::trusted(self.matrix.clone(), "rho")
    }
}

/// ρ = |ψ⟩⟨ψ| for a vector normalized within `tol`.
pub fn projector_from_vector(psi: &[C64], tol: f64) -> Result<DensityOperator> {
    if psi.is_empty() {
        return Err(Error::InvalidDimension(0));
    }
    let n = norm(psi);
    if !n.is_finite() || (n - 1.0).abs() > tol {
        return Err(Error::NotNormalized { norm: n, tolerance: tol });
    }
    let unit: Vec<C64> = psi.iter().map(|z| z / n).collect();
    let m = ComplexMatrix::outer(&unit, &unit);
    Ok(DensityOperator::trusted(m, Some(unit)))
}

#[derive(Clone, Debug)]
pub struct MixtureSpec {
    pub components: Vec<(f64, DensityOperator)>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(f64, DensityOperator)>) -> Self {
        Self { components }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.0).collect()
    }
}

/// ρ = Σ αᵢ ρᵢ
pub fn mixture(spec: &MixtureSpec) -> Result<DensityOperator> {
    let first = spec
        .components
        .first()
        .ok_or_else(|| Error::WeightsInvalid("empty mixture".into()))?;
    let dim = first.1.dim();
    let mut total = 0.0;
    for (w, rho) in &spec.components {
        if !(*w >= 0.0) || !w.is_finite() {
            return Err(Error::WeightsInvalid(format!("weight {w} is negative or not finite")));
        }
        check_dims(dim, rho.dim())?;
        total += w;
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightsInvalid(format!("weights sum to {total}")));
    }
    let mut acc = ComplexMatrix::zeros(dim);
    let mut active = spec.components.iter().filter(|c| c.0 > 0.0);
    let single = match (active.next(), active.next()) {
        (Some(only), None) if only.0 == 1.0 => Some(only.1.clone()),
        _ => None,
    };
    if let Some(rho) = single {
        return Ok(rho);
    }
    for (w, rho) in &spec.components {
        if *w > 0.0 {
            acc = &acc + &rho.matrix.scale_real(*w);
        }
    }
    Ok(DensityOperator::trusted(acc, None))
}

/// Deterministic ρ of exactly `rank` nonzero eigenvalues: ρ = GG†/Tr(GG†)
/// for a complex Gaussian `dim × rank` matrix G drawn from `seed`.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let mut r = rng::stream(seed, 0);
    let cols = rng::ginibre_columns(&mut r, dim, rank);
    if rank == 1 {
        let n = norm(&cols[0]);
        let unit: Vec<C64> = cols[0].iter().map(|z| z / n).collect();
        return projector_from_vector(&unit, 1e-12);
    }
    let mut m = ComplexMatrix::zeros(dim);
    for c in &cols {
        m = &m + &ComplexMatrix::outer(c, c);
    }
    let tr = m.trace().re;
    Ok(DensityOperator::trusted(m.scale_real(1.0 / tr), None))
}

/// Weighted eigenvectors above this threshold take part in decompositions.
const SUPPORT_TOL: f64 = 1e-14;

/// Returns `count` mixtures that all reproduce `rho`. The first is the
/// eigen-decomposition; the second mixes the weighted eigenvectors with the
/// discrete Fourier matrix; the rest use seeded Haar-random unitaries.
pub fn alternative_decompositions(rho: &DensityOperator, count: usize, seed: u64) -> Result<Vec<MixtureSpec>> {
    if count == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let h = rho.as_operator();
    let d = spectral_decompose(&h, None)?;
    let support: Vec<(f64, Vec<C64>)> = d
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > SUPPORT_TOL)
        .map(|(k, &l)| (l, d.eigenvector(k)))
        .collect();
    let rank = support.len();
    let total: f64 = support.iter().map(|s| s.0).sum();

    let spectral = MixtureSpec::new(
        support
            .iter()
            .map(|(l, v)| (l / total, DensityOperator::trusted(ComplexMatrix::outer(v, v), Some(v.clone()))))
            .collect(),
    );
    let mut out = vec![spectral];
    let mut r = rng::stream(seed, 1);
    for k in 1..count {
        let u = if k == 1 { fourier_matrix(rank) } else { rng::random_unitary(&mut r, rank) };
        out.push(mix_with(&support, &u, total));
    }
    Ok(out)
}

fn fourier_matrix(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    let s = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        for k in 0..n {
            let angle = 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
            m[(j, k)] = C64::from_polar(s, angle);
        }
    }
    m
}

/// |ṽⱼ⟩ = Σᵢ Uⱼᵢ √λᵢ |vᵢ⟩, split into weight ‖ṽⱼ‖² and unit projector.
fn mix_with(support: &[(f64, Vec<C64>)], u: &ComplexMatrix, total: f64) -> MixtureSpec {
    let rank = support.len();
    let dim = support[0].1.len();
    let mut components = Vec::with_capacity(rank);
    for j in 0..rank {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for (i, (l, e)) in support.iter().enumerate() {
            let coef = u[(j, i)] * l.sqrt();
            for (x, y) in v.iter_mut().zip(e) {
                *x += coef * y;
            }
        }
        let w = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if w <= 0.0 {
            continue;
        }
        let unit: Vec<C64> = v.iter().map(|z| z / w.sqrt()).collect();
        let proj = DensityOperator::trusted(ComplexMatrix::outer(&unit, &unit), Some(unit));
        components.push((w / total, proj));
    }
    MixtureSpec::new(components)
}
