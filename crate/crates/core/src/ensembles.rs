//! Member populations, sampled measurement records, and homogeneity tests.
//!
//! A homogeneous ensemble gives every member the same density operator; a
//! heterogeneous one is a labelled union of subpopulations. Each member's
//! outcome is drawn from its own counter-based stream keyed by
//! `(seed, member_index)`, so records do not depend on processing order.
//! Homogeneity is judged by splitting the records into subensembles and
//! running a Pearson chi-square test on the subensemble × outcome table.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::density::{mixture, DensityOperator, MixtureSpec};
use crate::error::{Error, Result};
use crate::measurement::{outcome_distribution, OutcomeDistribution};
use crate::operator::{check_dims, HermitianOperator};
use crate::rng::stream;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Smallest expected count per table cell before bins are merged.
pub const MIN_EXPECTED: f64 = 5.0;

/// Stream id reserved for partition shuffles, disjoint from member ids.
const PARTITION_STREAM: u64 = 1 << 63;

#[derive(Clone, Debug)]
pub struct Subpopulation {
    pub label: String,
    pub count: usize,
    pub rho: DensityOperator,
}

impl Subpopulation {
    pub fn new(label: impl Into<String>, count: usize, rho: DensityOperator) -> Self {
        Self { label: label.into(), count, rho }
    }
}

#[derive(Clone, Debug)]
pub enum EnsembleSpec {
    Homogeneous { members: usize, rho: DensityOperator },
    Heterogeneous(Vec<Subpopulation>),
}

impl EnsembleSpec {
    pub fn homogeneous(members: usize, rho: DensityOperator) -> Result<Self> {
        let spec = EnsembleSpec::Homogeneous { members, rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn heterogeneous(parts: Vec<Subpopulation>) -> Result<Self> {
        let spec = EnsembleSpec::Heterogeneous(parts);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::Homogeneous { members, .. } => {
                if *members == 0 {
                    return Err(Error::InvalidEnsemble("homogeneous ensemble with no members".into()));
                }
            }
            EnsembleSpec::Heterogeneous(parts) => {
                let first = parts
                    .first()
                    .ok_or_else(|| Error::InvalidEnsemble("heterogeneous ensemble with no subpopulations".into()))?;
                for p in parts {
                    if p.count == 0 {
                        return Err(Error::InvalidEnsemble(format!("subpopulation '{}' is empty", p.label)));
                    }
                    check_dims(first.rho.dim(), p.rho.dim())?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            EnsembleSpec::Homogeneous { rho, .. } => rho.dim(),
            EnsembleSpec::Heterogeneous(parts) => parts[0].rho.dim(),
        }
    }

    pub fn total(&self) -> usize {
        match self {
            EnsembleSpec::Homogeneous { members, .. } => *members,
            EnsembleSpec::Heterogeneous(parts) => parts.iter().map(|p| p.count).sum(),
        }
    }

    /// `(label, count, rho)` blocks in member order.
    fn blocks(&self) -> Vec<(&str, usize, &DensityOperator)> {
        match self {
            EnsembleSpec::Homogeneous { members, rho } => vec![("all", *members, rho)],
            EnsembleSpec::Heterogeneous(parts) => {
                parts.iter().map(|p| (p.label.as_str(), p.count, &p.rho)).collect()
            }
        }
    }
}

/// Homogeneous → its ρ; heterogeneous → Σ (countᵢ/N)·ρᵢ.
pub fn effective_density(spec: &EnsembleSpec) -> Result<DensityOperator> {
    spec.validate()?;
    match spec {
        EnsembleSpec::Homogeneous { rho, .. } => Ok(rho.clone()),
        EnsembleSpec::Heterogeneous(parts) => {
            let total = spec.total() as f64;
            let components = parts.iter().map(|p| (p.count as f64 / total, p.rho.clone())).collect();
            mixture(&MixtureSpec::new(components))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub member_index: usize,
    pub label: String,
    pub eigenvalue: f64,
}

fn draw<R: Rng>(rng: &mut R, dist: &OutcomeDistribution) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = dist.entries[0].eigenvalue;
    for e in &dist.entries {
        if e.probability <= 0.0 {
            continue;
        }
        acc += e.probability;
        last = e.eigenvalue;
        if u < acc {
            return e.eigenvalue;
        }
    }
    last
}

/// One outcome per member, drawn from the member's outcome distribution
/// for `a` with the stream `(seed, member_index)`.
pub fn sample_measurements(spec: &EnsembleSpec, a: &HermitianOperator, seed: u64) -> Result<Vec<OutcomeRecord>> {
    spec.validate()?;
    check_dims(spec.dim(), a.dim())?;
    let mut records = Vec::with_capacity(spec.total());
    let mut index = 0;
    for (label, count, rho) in spec.blocks() {
        let dist = outcome_distribution(rho, a)?;
        for _ in 0..count {
            let mut rng = stream(seed, index as u64);
            records.push(OutcomeRecord { member_index: index, label: label.to_string(), eigenvalue: draw(&mut rng, &dist) });
            index += 1;
        }
    }
    Ok(records)
}

pub fn empirical_mean(records: &[OutcomeRecord]) -> f64 {
    records.iter().map(|r| r.eigenvalue).sum::<f64>() / records.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    ByLabel,
    RandomHalves(u64),
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::ByLabel => write!(f, "by-label"),
            Partition::RandomHalves(seed) => write!(f, "random-halves(seed={seed})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityVerdict {
    pub partition: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub homogeneous: bool,
}

impl HomogeneityVerdict {
    pub fn homogeneous_at(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Splits the records and tests whether the subensembles share one outcome
/// distribution.
pub fn subdivision_test(records: &[OutcomeRecord], partition: Partition, alpha: f64) -> Result<HomogeneityVerdict> {
    let groups: Vec<Vec<f64>> = match partition {
        Partition::ByLabel => {
            let mut by: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for r in records {
                by.entry(r.label.as_str()).or_default().push(r.eigenvalue);
            }
            by.into_values().collect()
        }
        Partition::RandomHalves(seed) => {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.shuffle(&mut stream(seed, PARTITION_STREAM));
            let (left, right) = order.split_at(records.len() / 2);
            vec![
                left.iter().map(|&i| records[i].eigenvalue).collect(),
                right.iter().map(|&i| records[i].eigenvalue).collect(),
            ]
        }
    };
    contingency_test(&groups, &partition.to_string(), alpha)
}

/// Chi-square test that two full populations share one outcome distribution.
pub fn compare_populations(a: &[OutcomeRecord], b: &[OutcomeRecord], alpha: f64) -> Result<HomogeneityVerdict> {
    let groups = vec![
        a.iter().map(|r| r.eigenvalue).collect(),
        b.iter().map(|r| r.eigenvalue).collect(),
    ];
    contingency_test(&groups, "populations", alpha)
}

/// Pearson chi-square on a groups × outcomes table. Outcome columns whose
/// expected count falls below [`MIN_EXPECTED`] are merged with their
/// neighbour in eigenvalue order until every cell qualifies.
pub fn contingency_test(groups: &[Vec<f64>], description: &str, alpha: f64) -> Result<HomogeneityVerdict> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 subensembles, got {}", groups.len())));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ConfigInvalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut values: Vec<f64> = groups.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let col_of = |v: f64| values.binary_search_by(|x| x.total_cmp(&v)).unwrap();

    let mut table: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let mut row = vec![0.0; values.len()];
            for &v in g {
                row[col_of(v)] += 1.0;
            }
            row
        })
        .collect();

    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = rows.iter().sum();
    let min_row = rows.iter().copied().fold(f64::INFINITY, f64::min);
    if min_row < MIN_EXPECTED {
        return Err(Error::InsufficientData(format!(
            "a subensemble has {min_row} records; at least {MIN_EXPECTED} are needed"
        )));
    }

    // merge the sparsest column into its smaller neighbour until all
    // expected counts reach the threshold
    loop {
        let cols: Vec<f64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        if cols.len() < 2 {
            break;
        }
        let (j, &c) = cols.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        if c * min_row / total >= MIN_EXPECTED {
            break;
        }
        let target = if j == 0 {
            1
        } else if j + 1 == cols.len() || cols[j - 1] <= cols[j + 1] {
            j - 1
        } else {
            j + 1
        };
        for r in table.iter_mut() {
            let moved = r.remove(j);
            let t = if target > j { target - 1 } else { target };
            r[t] += moved;
        }
    }

    let ncols = table[0].len();
    let cols: Vec<f64> = (0..ncols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = rows[i] * cols[j] / total;
            statistic += (obs - expected).powi(2) / expected;
        }
    }
    let dof = (table.len() - 1) * (ncols - 1);
    let p_value = if dof == 0 {
        // a single outcome bin: every subensemble agrees trivially
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).map_err(|e| Error::InsufficientData(e.to_string()))?;
        chi.sf(statistic).clamp(0.0, 1.0)
    };
    Ok(HomogeneityVerdict {
        partition: description.to_string(),
        statistic,
        dof,
        p_value,
        alpha,
        homogeneous: p_value >= alpha,
    })
}
