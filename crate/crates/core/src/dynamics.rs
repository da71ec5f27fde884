//! Unitary evolution of density operators.
//!
//! Constant Hamiltonians use the exact propagator `exp(−iHt/ħ)`. Time-dependent
//! Hamiltonians are integrated with midpoint exponentials,
//! `U ← exp(−i·h·H(t + h/2)/ħ)·U`, which is second order in the step and
//! exactly unitary at every step, so trace and positivity never drift beyond
//! roundoff.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::density::{projector_from_vector, DensityOperator};
use crate::error::{Error, Result};
use crate::measurement::expectation;
use crate::operator::{check_dims, unitary_exp, HermitianOperator, UnitaryMatrix};

type Sampler = Arc<dyn Fn(f64) -> HermitianOperator + Send + Sync>;

#[derive(Clone)]
pub enum Schedule {
    Constant(HermitianOperator),
    /// `(t_start, H)` segments; H holds from its start until the next one.
    /// Times before the first start use the first segment.
    Piecewise(Vec<(f64, HermitianOperator)>),
    Sampled { dim: usize, h: Sampler },
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(h) => f.debug_tuple("Constant").field(&h.label()).finish(),
            Schedule::Piecewise(segs) => {
                let starts: Vec<f64> = segs.iter().map(|(t, _)| *t).collect();
                f.debug_tuple("Piecewise").field(&starts).finish()
            }
            Schedule::Sampled { dim, .. } => f.debug_struct("Sampled").field("dim", dim).finish(),
        }
    }
}

impl Schedule {
    pub fn piecewise(segments: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidSchedule("piecewise schedule has no segments".into()))?;
        let dim = first.1.dim();
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidSchedule(format!(
                    "segment starts must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for (t, h) in &segments {
            if !t.is_finite() {
                return Err(Error::InvalidSchedule(format!("non-finite segment start {t}")));
            }
            check_dims(dim, h.dim())?;
        }
        Ok(Schedule::Piecewise(segments))
    }

    pub fn sampled(dim: usize, h: impl Fn(f64) -> HermitianOperator + Send + Sync + 'static) -> Self {
        Schedule::Sampled { dim, h: Arc::new(h) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Schedule::Constant(h) => h.dim(),
            Schedule::Piecewise(segs) => segs[0].1.dim(),
            Schedule::Sampled { dim, .. } => *dim,
        }
    }

    fn segment_at(segs: &[(f64, HermitianOperator)], t: f64) -> usize {
        segs.iter().rposition(|(start, _)| *start <= t).unwrap_or(0)
    }

    /// Hamiltonian in force at time `t`.
    pub fn at(&self, t: f64) -> Result<HermitianOperator> {
        match self {
            Schedule::Constant(h) => Ok(h.clone()),
            Schedule::Piecewise(segs) => Ok(segs[Self::segment_at(segs, t)].1.clone()),
            Schedule::Sampled { dim, h } => {
                let op = h(t);
                check_dims(*dim, op.dim())?;
                Ok(op)
            }
        }
    }
}

fn apply(u: &UnitaryMatrix, rho: &DensityOperator) -> Result<DensityOperator> {
    match rho.pure_state() {
        Some(psi) => projector_from_vector(&u.matrix().matvec(psi), 1e-8),
        None => Ok(DensityOperator::trusted(u.conjugate(rho.matrix()), None)),
    }
}

/// ρ(t) = U ρ0 U† with U = exp(−iHt/ħ).
pub fn evolve_const(rho0: &DensityOperator, h: &HermitianOperator, t: f64, hbar: f64) -> Result<DensityOperator> {
    check_dims(rho0.dim(), h.dim())?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let u = unitary_exp(h, t, hbar)?;
    apply(&u, rho0)
}

/// Number of uniform steps covering `span` with steps no longer than `dt`.
/// The step actually used is `span / steps`.
pub fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Ordered product of midpoint exponentials over `[t0, t0 + span]`.
pub fn midpoint_propagator(sched: &Schedule, t0: f64, span: f64, dt: f64, hbar: f64) -> Result<UnitaryMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
    }
    let steps = step_count(span, dt);
    let h = span / steps as f64;
    let mut u = UnitaryMatrix::identity(sched.dim());
    match sched {
        Schedule::Constant(op) => {
            let step = unitary_exp(op, h, hbar)?;
            for _ in 0..steps {
                u = step.then_after(&u);
            }
        }
        Schedule::Piecewise(segs) => {
            let mut cached: Option<(usize, UnitaryMatrix)> = None;
            for k in 0..steps {
                let mid = t0 + (k as f64 + 0.5) * h;
                let idx = Schedule::segment_at(segs, mid);
                if cached.as_ref().map(|(i, _)| *i) != Some(idx) {
                    cached = Some((idx, unitary_exp(&segs[idx].1, h, hbar)?));
                }
                u = cached.as_ref().map(|(_, s)| s).unwrap().then_after(&u);
            }
        }
        Schedule::Sampled { .. } => {
            for k in 0..steps {
                let mid = t0 + (k as f64 + 0.5) * h;
                let hk = sched.at(mid)?;
                // a fresh operator per step: decomposition is not shared
                u = unitary_exp(&hk, h, hbar)?.then_after(&u);
            }
        }
    }
    Ok(u)
}

/// Evolves from t = 0 to `t_final` with midpoint steps of at most `dt`.
pub fn evolve_timedep(
    rho0: &DensityOperator,
    sched: &Schedule,
    t_final: f64,
    dt: f64,
    hbar: f64,
) -> Result<DensityOperator> {
    check_dims(rho0.dim(), sched.dim())?;
    if !(dt > 0.0) || !dt.is_finite() || !(dt <= t_final) {
        return Err(Error::InvalidStep(format!("need 0 < dt <= t_final, got dt={dt}, t_final={t_final}")));
    }
    let u = midpoint_propagator(sched, 0.0, t_final, dt, hbar)?;
    apply(&u, rho0)
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub expectations: BTreeMap<String, Vec<f64>>,
    pub purity: Vec<f64>,
    pub trace_error: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.expectations.get(label).map(Vec::as_slice)
    }

    /// max − min of a series; zero for an empty one.
    pub fn drift(values: &[f64]) -> f64 {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if values.is_empty() {
            0.0
        } else {
            max - min
        }
    }
}

/// States and expectation values at each requested time. Constant schedules
/// use the exact propagator per time; otherwise the state is carried from one
/// time to the next with midpoint steps of at most `dt`.
pub fn trajectory(
    rho0: &DensityOperator,
    sched: &Schedule,
    times: &[f64],
    observables: &[HermitianOperator],
    hbar: f64,
    dt: f64,
) -> Result<TrajectoryRecord> {
    check_dims(rho0.dim(), sched.dim())?;
    for obs in observables {
        check_dims(rho0.dim(), obs.dim())?;
    }
    if let Some(&t) = times.first() {
        if !(t >= 0.0) {
            return Err(Error::InvalidSchedule(format!("times must start at or after 0, got {t}")));
        }
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidSchedule("times must be ascending".into()));
    }

    let mut states = Vec::with_capacity(times.len());
    let mut current = rho0.clone();
    let mut t_prev = 0.0;
    for &t in times {
        let next = match sched {
            Schedule::Constant(h) => evolve_const(rho0, h, t, hbar)?,
            _ if t == t_prev => current.clone(),
            _ => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
                }
                let u = midpoint_propagator(sched, t_prev, t - t_prev, dt, hbar)?;
                apply(&u, &current)?
            }
        };
        current = next;
        t_prev = t;
        states.push(current.clone());
    }

    let mut expectations = BTreeMap::new();
    for obs in observables {
        let series = states.iter().map(|r| expectation(r, obs)).collect::<Result<Vec<_>>>()?;
        expectations.insert(obs.label().to_string(), series);
    }
    let purity = states.iter().map(DensityOperator::purity).collect();
    let trace_error = states.iter().map(|r| (r.trace() - 1.0).abs()).collect();
    Ok(TrajectoryRecord { times: times.to_vec(), states, expectations, purity, trace_error })
}
