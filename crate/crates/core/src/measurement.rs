//! Measurement statistics of a density operator: expectation values,
//! variances, outcome distributions over an observable's spectrum,
//! uncertainty products, and the linear map between a state and the
//! expectation values of `n² − 1` independent observables.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::density::{DensityOperator, NEG_CLAMP};
use crate::error::{Error, Result};
use crate::matrix::{inner, ComplexMatrix, I, ONE};
use crate::operator::{c_operator, check_dims, spectral_decompose, HermitianOperator};

/// Probabilities in `(−PROB_CLAMP, 0)` are rounded up to zero.
pub const PROB_CLAMP: f64 = 1e-12;
/// Variances in `(−VARIANCE_CLAMP, 0)` are rounded up to zero.
pub const VARIANCE_CLAMP: f64 = 1e-10;
/// The uncertainty relation counts as satisfied while `product − bound`
/// stays above `−UNCERTAINTY_SLACK`.
pub const UNCERTAINTY_SLACK: f64 = 1e-9;

/// ⟨A⟩ = Tr[ρA]
pub fn expectation(rho: &DensityOperator, a: &HermitianOperator) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    let value = match rho.pure_state() {
        Some(psi) => inner(psi, &a.matrix().matvec(psi)),
        None => rho.matrix().trace_product(a.matrix()),
    };
    debug_assert!(
        value.im.abs() <= 1e-10 * a.matrix().max_abs().max(1.0) * (rho.dim() as f64).sqrt(),
        "imaginary part {} of Tr(rho A)",
        value.im
    );
    Ok(value.re)
}

/// (ΔX)² = Tr ρX² − (Tr ρX)² and ΔX. Evaluated in the centered form
/// Tr ρ(X − ⟨X⟩)², which avoids cancellation for near-eigenstates.
pub fn variance(rho: &DensityOperator, x: &HermitianOperator) -> Result<(f64, f64)> {
    let mean = expectation(rho, x)?;
    let var = match rho.pure_state() {
        Some(psi) => {
            let xpsi = x.matrix().matvec(psi);
            xpsi.iter().zip(psi).map(|(a, b)| (a - b * mean).norm_sqr()).sum::<f64>()
        }
        None => {
            let mut centered = x.matrix().clone();
            for i in 0..centered.dim() {
                centered[(i, i)] -= C64::new(mean, 0.0);
            }
            let sq = centered.matmul(&centered);
            rho.matrix().trace_product(&sq).re
        }
    };
    if var < -VARIANCE_CLAMP {
        return Err(Error::NegativeVariance(var));
    }
    let var = var.max(0.0);
    Ok((var, var.sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeEntry {
    pub eigenvalue: f64,
    pub probability: f64,
    pub degeneracy: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub entries: Vec<OutcomeEntry>,
}

impl OutcomeDistribution {
    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|e| e.eigenvalue * e.probability).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.entries.iter().map(|e| e.probability * (e.eigenvalue - m).powi(2)).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    /// Entry whose eigenvalue is closest to `value`.
    pub fn nearest(&self, value: f64) -> Option<&OutcomeEntry> {
        self.entries
            .iter()
            .min_by(|a, b| (a.eigenvalue - value).abs().total_cmp(&(b.eigenvalue - value).abs()))
    }
}

/// W(aₙ) = Tr[ρAₙ] for every eigenvalue group of `a`.
pub fn outcome_distribution(rho: &DensityOperator, a: &HermitianOperator) -> Result<OutcomeDistribution> {
    check_dims(rho.dim(), a.dim())?;
    let d = a.spectrum()?;
    let mut entries = Vec::with_capacity(d.groups().len());
    // Tr[ρAₙ] = Σ_{k∈n} ⟨v_k|ρ|v_k⟩, summed without forming Aₙ
    for g in d.groups() {
        let w: f64 = g
            .indices
            .iter()
            .map(|&k| {
                let v = d.eigenvector(k);
                match rho.pure_state() {
                    Some(psi) => inner(&v, psi).norm_sqr(),
                    None => inner(&v, &rho.matrix().matvec(&v)).re,
                }
            })
            .sum();
        if w < -PROB_CLAMP {
            return Err(Error::NegativeProbability(w));
        }
        entries.push(OutcomeEntry { eigenvalue: g.value, probability: w.max(0.0), degeneracy: g.degeneracy() });
    }
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    for e in &mut entries {
        e.probability /= total;
    }
    Ok(OutcomeDistribution { entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub delta_a: f64,
    pub delta_b: f64,
    pub product: f64,
    /// |⟨C⟩|/2 with AB − BA = iC
    pub bound: f64,
    pub satisfied: bool,
    pub slack: f64,
}

/// ΔA·ΔB against |⟨C⟩|/2.
pub fn uncertainty_check(rho: &DensityOperator, a: &HermitianOperator, b: &HermitianOperator) -> Result<UncertaintyReport> {
    check_dims(rho.dim(), a.dim())?;
    check_dims(rho.dim(), b.dim())?;
    let (_, delta_a) = variance(rho, a)?;
    let (_, delta_b) = variance(rho, b)?;
    let bound = commutator_mean(rho, a, b)?.abs() / 2.0;
    let product = delta_a * delta_b;
    let slack = product - bound;
    Ok(UncertaintyReport { delta_a, delta_b, product, bound, satisfied: slack >= -UNCERTAINTY_SLACK, slack })
}

/// ⟨C⟩ with C = −i(AB − BA). Pure states use 2·Im⟨Aψ|Bψ⟩ and never form
/// the commutator.
pub fn commutator_mean(rho: &DensityOperator, a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    check_dims(rho.dim(), b.dim())?;
    match rho.pure_state() {
        Some(psi) => {
            let apsi = a.matrix().matvec(psi);
            let bpsi = b.matrix().matvec(psi);
            Ok(2.0 * inner(&apsi, &bpsi).im)
        }
        None => expectation(rho, &c_operator(a, b)?),
    }
}

/// `n² − 1` Hermitian, traceless operators with Tr(GᵢGⱼ) = 2δᵢⱼ.
#[derive(Clone, Debug)]
pub struct ObservableBasis {
    dim: usize,
    operators: Vec<HermitianOperator>,
}

impl ObservableBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// Generalized Gell-Mann operators: symmetric pairs, then antisymmetric
/// pairs, then diagonal ones. For `dim = 2` this is (σx, σy, σz).
pub fn observable_basis(dim: usize) -> Result<ObservableBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut operators = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            operators.push(HermitianOperator::trusted(m, format!("sym[{j},{k}]")));
        }
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m[(j, k)] = -I;
            m[(k, j)] = I;
            operators.push(HermitianOperator::trusted(m, format!("asym[{j},{k}]")));
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for d in diag.iter_mut().take(l) {
            *d = norm;
        }
        diag[l] = -(l as f64) * norm;
        operators.push(HermitianOperator::from_real_diagonal(&diag, format!("diag[{l}]")));
    }
    Ok(ObservableBasis { dim, operators })
}

/// vᵢ = Tr(ρGᵢ)
pub fn expectations_from_state(rho: &DensityOperator, basis: &ObservableBasis) -> Result<Vec<f64>> {
    check_dims(basis.dim, rho.dim())?;
    basis.operators.iter().map(|g| expectation(rho, g)).collect()
}

/// ρ = I/n + ½ Σᵢ vᵢGᵢ, rejected when the result is not positive.
pub fn state_from_expectations(values: &[f64], basis: &ObservableBasis) -> Result<DensityOperator> {
    check_dims(basis.len(), values.len())?;
    let n = basis.dim;
    let mut m = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
    for (v, g) in values.iter().zip(&basis.operators) {
        m = &m + &g.matrix().scale_real(0.5 * v);
    }
    let h = HermitianOperator::trusted(m, "rho");
    let min = spectral_decompose(&h, None)?.eigenvalues()[0];
    if min < -NEG_CLAMP {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    DensityOperator::from_matrix(h.matrix().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{mixture, projector_from_vector, random_density, MixtureSpec};
    use crate::operator::pauli;

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn up() -> DensityOperator {
        projector_from_vector(&ket(&[1.0, 0.0]), 1e-12).unwrap()
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation(&up(), &pauli::z()).unwrap(), 1.0);
        let mixed = DensityOperator::maximally_mixed(2);
        for a in [pauli::x(), pauli::y(), pauli::z()] {
            assert_eq!(expectation(&mixed, &a).unwrap(), 0.0);
        }
        let three = DensityOperator::maximally_mixed(3);
        assert!(matches!(expectation(&three, &pauli::z()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&up(), &pauli::z()).unwrap(), (0.0, 0.0));
        let (v, s) = variance(&DensityOperator::maximally_mixed(2), &pauli::z()).unwrap();
        assert!((v - 1.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);

        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let plus = projector_from_vector(&ket(&[s2, s2]), 1e-12).unwrap();
        let (v, _) = variance(&plus, &pauli::x()).unwrap();
        assert!(v < 1e-30);
    }

    #[test]
    fn outcome_distribution_examples() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 1.0, 2.0], "A");
        let d = outcome_distribution(&DensityOperator::maximally_mixed(3), &a).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.entries[0].degeneracy, 2);
        assert!((d.entries[0].probability - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.entries[1].probability - 1.0 / 3.0).abs() < 1e-15);

        let a = HermitianOperator::from_real_diagonal(&[-1.0, 0.5, 3.0], "A");
        let e2 = projector_from_vector(&ket(&[0.0, 1.0, 0.0]), 1e-12).unwrap();
        let d = outcome_distribution(&e2, &a).unwrap();
        assert_eq!(d.probabilities(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn uncertainty_examples() {
        let sx = pauli::x().scaled(0.5);
        let sy = pauli::y().scaled(0.5);
        let r = uncertainty_check(&up(), &sx, &sy).unwrap();
        assert!((r.delta_a - 0.5).abs() < 1e-15 && (r.delta_b - 0.5).abs() < 1e-15);
        assert!((r.bound - 0.25).abs() < 1e-15);
        assert!((r.product - 0.25).abs() < 1e-15);
        assert!(r.slack.abs() < 1e-12 && r.satisfied);

        let r = uncertainty_check(&DensityOperator::maximally_mixed(2), &sx, &sy).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!((r.product - 0.25).abs() < 1e-15 && r.satisfied);

        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0, 3.0], "A");
        let b = HermitianOperator::from_real_diagonal(&[0.0, -1.0, 5.0], "B");
        for seed in 0..5 {
            let rho = random_density(3, 2, seed).unwrap();
            let r = uncertainty_check(&rho, &a, &b).unwrap();
            assert_eq!(r.bound, 0.0);
            assert!(r.satisfied);
        }
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = observable_basis(2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.operators()[0].matrix(), pauli::x().matrix());
        assert_eq!(b.operators()[1].matrix(), pauli::y().matrix());
        assert_eq!(b.operators()[2].matrix(), pauli::z().matrix());
        assert!(matches!(observable_basis(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn qutrit_basis_orthogonality() {
        let b = observable_basis(3).unwrap();
        assert_eq!(b.len(), 8);
        for (i, gi) in b.operators().iter().enumerate() {
            assert!(gi.matrix().trace().norm() < 1e-15);
            for (j, gj) in b.operators().iter().enumerate() {
                let t = gi.matrix().trace_product(gj.matrix());
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((t - C64::new(expected, 0.0)).norm() < 1e-14, "({i},{j}) -> {t}");
            }
        }
    }

    #[test]
    fn tomography_examples() {
        let b = observable_basis(2).unwrap();
        assert_eq!(expectations_from_state(&up(), &b).unwrap(), vec![0.0, 0.0, 1.0]);
        let zeros = expectations_from_state(&DensityOperator::maximally_mixed(2), &b).unwrap();
        assert!(zeros.iter().all(|v| *v == 0.0));

        let rho = state_from_expectations(&[0.0, 0.0, 1.0], &b).unwrap();
        assert!((rho.matrix() - up().matrix()).frobenius_norm() < 1e-15);
        assert!(matches!(state_from_expectations(&[0.0, 0.0, 2.0], &b), Err(Error::NotPositive { .. })));
        assert!(matches!(state_from_expectations(&[0.0, 0.0], &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mixture_mean_matches_distribution_mean() {
        let p = projector_from_vector(&ket(&[0.6, 0.8]), 1e-12).unwrap();
        let rho = mixture(&MixtureSpec::new(vec![(0.3, p), (0.7, DensityOperator::maximally_mixed(2))])).unwrap();
        let d = outcome_distribution(&rho, &pauli::x()).unwrap();
        assert!((d.mean() - expectation(&rho, &pauli::x()).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn commutator_mean_pure_path_matches_matrix_path() {
        let mut r = crate::rng::stream(21, 0);
        let a = crate::rng::random_hermitian(&mut r, 5);
        let b = crate::rng::random_hermitian(&mut r, 5);
        let psi = crate::rng::random_unit_vector(&mut r, 5);
        let pure = projector_from_vector(&psi, 1e-12).unwrap();
        let plain = DensityOperator::from_matrix(pure.matrix().clone()).unwrap();
        assert!(plain.pure_state().is_none());
        let fast = commutator_mean(&pure, &a, &b).unwrap();
        let slow = commutator_mean(&plain, &a, &b).unwrap();
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }
}
