//! End-to-end demonstrations.
//!
//! Every demo turns a small configuration into a [`DemoReport`]: a table of
//! named result rows plus a list of named checks. The report passes iff
//! every check passes. Reports render as CSV (header row of field names,
//! one row per record, `.` decimal point) or as a single JSON object.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::density::{alternative_decompositions, mixture, projector_from_vector, random_density, DensityOperator};
use crate::dynamics::{evolve_const, evolve_timedep, trajectory, Schedule, TrajectoryRecord};
use crate::ensembles::{
    compare_populations, effective_density, sample_measurements, subdivision_test, EnsembleSpec, Partition,
    Subpopulation, DEFAULT_ALPHA,
};
use crate::error::{Error, Result};
use crate::measurement::{
    commutator_mean, expectation, expectations_from_state, observable_basis, outcome_distribution,
    state_from_expectations, uncertainty_check, variance, UNCERTAINTY_SLACK,
};
use crate::models::{
    gaussian_packet, grid_operators, ring_cosine, ring_plane_wave, spin_operators, well_eigenstate,
    well_momentum_density, GridSystem,
};
use crate::operator::{pauli, HermitianOperator};
use crate::rng::{random_hermitian, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DemoId {
    FreeParticle,
    WellDual,
    CollapseCheck,
    ClassicalLimit,
    UncertaintySweep,
    EnsembleDemo,
    Evolve,
    Tomography,
}

impl DemoId {
    pub const ALL: [DemoId; 8] = [
        DemoId::FreeParticle,
        DemoId::WellDual,
        DemoId::CollapseCheck,
        DemoId::ClassicalLimit,
        DemoId::UncertaintySweep,
        DemoId::EnsembleDemo,
        DemoId::Evolve,
        DemoId::Tomography,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemoId::FreeParticle => "FreeParticle",
            DemoId::WellDual => "WellDual",
            DemoId::CollapseCheck => "CollapseCheck",
            DemoId::ClassicalLimit => "ClassicalLimit",
            DemoId::UncertaintySweep => "UncertaintySweep",
            DemoId::EnsembleDemo => "EnsembleDemo",
            DemoId::Evolve => "Evolve",
            DemoId::Tomography => "Tomography",
        }
    }

    /// One-line statement of what the demo reproduces.
    pub fn anchor(self) -> &'static str {
        match self {
            DemoId::FreeParticle => {
                "free-particle energy eigenfunctions: cosine and ±k plane waves share one energy but differ in mean momentum"
            }
            DemoId::WellDual => {
                "infinite well eigenstate: point-mass energy distribution beside a spread momentum density"
            }
            DemoId::CollapseCheck => {
                "momentum eigenprojector inside a finite region gives Δx·Δp below ħ/2"
            }
            DemoId::ClassicalLimit => {
                "narrowing position and momentum distributions of Gaussian packets"
            }
            DemoId::UncertaintySweep => "ΔA·ΔB ≥ |⟨C⟩|/2 over random states and observables",
            DemoId::EnsembleDemo => {
                "distinct mixtures with one density operator; homogeneity tests by subdivision"
            }
            DemoId::Evolve => "unitary evolution: precession, conservation, midpoint stepping for H(t)",
            DemoId::Tomography => "density operator from the expectation values of n² − 1 observables",
        }
    }
}

impl fmt::Display for DemoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| *c != '-' && *c != '_').flat_map(char::to_lowercase).collect()
}

impl FromStr for DemoId {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are ignored, so `well-dual` works.
    fn from_str(s: &str) -> Result<Self> {
        let key = squash(s);
        DemoId::ALL
            .into_iter()
            .find(|d| squash(d.name()) == key)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown demo '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::ConfigInvalid(format!("unknown format '{other}'"))),
        }
    }
}

/// Demo parameters. `None` picks the demo's own default.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoConfig {
    pub demo: DemoId,
    pub grid_n: Option<usize>,
    /// Ring circumference L.
    pub length: Option<f64>,
    /// Well half-width a.
    pub a: Option<f64>,
    pub mass: f64,
    pub hbar: f64,
    pub mode_n: Option<i64>,
    pub seed: u64,
    pub members: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl DemoConfig {
    pub fn new(demo: DemoId) -> Self {
        Self {
            demo,
            grid_n: None,
            length: None,
            a: None,
            mass: 1.0,
            hbar: 1.0,
            mode_n: None,
            seed: 0,
            members: None,
            dt: None,
            t_final: None,
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Real(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Real(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Cell::Real(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// Named fields in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub fields: Vec<(String, Cell)>,
}

impl Row {
    pub fn table(name: &str) -> Self {
        Row::default().text("table", name)
    }

    pub fn real(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), Cell::Real(v)));
        self
    }

    pub fn int(mut self, key: &str, v: i64) -> Self {
        self.fields.push((key.into(), Cell::Int(v)));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.into(), Cell::Bool(v)));
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.into(), Cell::Text(v.into())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, c)| c)
    }

    fn to_json(&self) -> Value {
        Value::Object(self.fields.iter().map(|(k, c)| (k.clone(), c.to_json())).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub demo_id: DemoId,
    pub anchor: String,
    pub parameters: Row,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl DemoReport {
    fn new(demo_id: DemoId, parameters: Row, rows: Vec<Row>, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self { demo_id, anchor: demo_id.anchor().to_string(), parameters, rows, checks, pass }
    }

    /// Rows whose `table` field equals `name`.
    pub fn table(&self, name: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.get("table") == Some(&Cell::Text(name.into()))).collect()
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Value {
        let checks: Map<String, Value> = self.checks.iter().map(|c| (c.name.clone(), json!(c.pass))).collect();
        json!({
            "demo_id": self.demo_id.name(),
            "anchor": self.anchor,
            "parameters": self.parameters.to_json(),
            "rows": self.rows.iter().map(Row::to_json).collect::<Vec<_>>(),
            "checks": checks,
            "pass": self.pass,
        })
    }

    /// Result rows followed by one `check` row per check.
    pub fn to_csv(&self) -> Result<String> {
        let mut all: Vec<Row> = self.rows.clone();
        all.extend(self.checks.iter().map(|c| Row::table("check").text("check", &c.name).flag("pass", c.pass)));
        let mut header: Vec<String> = Vec::new();
        for r in &all {
            for (k, _) in &r.fields {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::ReportWriteFailure(e.to_string());
        w.write_record(&header).map_err(fail)?;
        for r in &all {
            let rec: Vec<String> = header.iter().map(|h| r.get(h).map(Cell::to_csv).unwrap_or_default()).collect();
            w.write_record(&rec).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::ReportWriteFailure(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::ReportWriteFailure(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => serde_json::to_string_pretty(&self.to_json())
                .map(|s| s + "\n")
                .map_err(|e| Error::ReportWriteFailure(e.to_string())),
        }
    }
}

/// Writes the rendered report to `out`, or to stdout when `out` is `None`.
pub fn write_report(report: &DemoReport, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    let fail = |e: std::io::Error| Error::ReportWriteFailure(e.to_string());
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::ReportWriteFailure(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(fail),
    }
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    positive("mass", cfg.mass)?;
    positive("hbar", cfg.hbar)?;
    match cfg.demo {
        DemoId::FreeParticle => free_particle(cfg),
        DemoId::WellDual => well_dual(cfg),
        DemoId::CollapseCheck => collapse_check(cfg),
        DemoId::ClassicalLimit => classical_limit(cfg),
        DemoId::UncertaintySweep => uncertainty_sweep(cfg),
        DemoId::EnsembleDemo => ensemble_demo(cfg),
        DemoId::Evolve => evolve(cfg),
        DemoId::Tomography => tomography(cfg),
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ConfigInvalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check(name: &str, pass: bool) -> Check {
    Check { name: name.into(), pass }
}

fn units(cfg: &DemoConfig) -> Row {
    Row::default().real("mass", cfg.mass).real("hbar", cfg.hbar)
}

fn free_particle(cfg: &DemoConfig) -> Result<DemoReport> {
    let n = cfg.grid_n.unwrap_or(256);
    let l = positive("length", cfg.length.unwrap_or(1.0))?;
    let j = cfg.mode_n.unwrap_or(3);
    let g = GridSystem::ring(l, n, cfg.mass, cfg.hbar)?;
    let ops = grid_operators(&g)?;
    let hk = cfg.hbar * g.wavenumber(j);
    let exact = hk * hk / (2.0 * cfg.mass);

    let states = [
        ("cosine", ring_cosine(&g, j)?, 0.0, 1e-12),
        ("plus", ring_plane_wave(&g, j)?, hk, 1e-10),
        ("minus", ring_plane_wave(&g, -j)?, -hk, 1e-10),
    ];
    let mut rows = Vec::new();
    let mut means_ok = true;
    let mut energies = Vec::new();
    for (name, psi, expected, tol) in &states {
        let rho = psi.projector()?;
        let mean_p = expectation(&rho, &ops.p)?;
        let (var_p, _) = variance(&rho, &ops.p)?;
        let energy = (var_p + mean_p * mean_p) / (2.0 * cfg.mass);
        let h = expectation(&rho, &ops.h_free)?;
        means_ok &= (mean_p - expected).abs() <= *tol;
        energies.push(energy);
        rows.push(
            Row::table("states")
                .text("state", name)
                .real("expected_p", *expected)
                .real("mean_p", mean_p)
                .real("p2_over_2m", energy)
                .real("mean_h_free", h)
                .real("exact_energy", exact),
        );
    }
    let spread = TrajectoryRecord::drift(&energies);
    let params = units(cfg).int("grid_n", n as i64).real("length", l).int("mode_n", j);
    let checks = vec![check("mean_momenta", means_ok), check("equal_energies", spread <= 1e-10)];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

/// Momentum window ±40·n·ħ/a sampled every 0.02·ħ/a (4001 points for n = 1).
/// The tail of |φₙ(p)|² outside a fixed window grows with n, so the window
/// grows with it.
pub fn well_momentum_grid(a: f64, n: i64, hbar: f64) -> Vec<f64> {
    let n = n.max(1) as usize;
    let half = 40.0 * n as f64 * hbar / a;
    let intervals = 4000 * n;
    (0..=intervals).map(|k| -half + k as f64 * (2.0 * half / intervals as f64)).collect()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

fn well_dual(cfg: &DemoConfig) -> Result<DemoReport> {
    let n = cfg.grid_n.unwrap_or(512);
    let a = positive("a", cfg.a.unwrap_or(1.0))?;
    let modes = cfg.mode_n.map(|m| vec![m]).unwrap_or_else(|| vec![1, 2, 5]);
    let g = GridSystem::hard_wall(a, n, cfg.mass, cfg.hbar)?;
    let ops = grid_operators(&g)?;

    let mut rows = Vec::new();
    let mut momentum_rows = Vec::new();
    let (mut w_ok, mut spread_ok, mut energy_ok, mut norm_ok) = (true, true, true, true);
    for &mode in &modes {
        let (psi, eps) = well_eigenstate(&g, mode)?;
        let rho = psi.projector()?;
        let dist = outcome_distribution(&rho, &ops.h_free)?;
        let peak = dist.nearest(eps).ok_or_else(|| Error::InsufficientData("empty energy distribution".into()))?;
        let mean_h = expectation(&rho, &ops.h_free)?;
        let energy_std = dist.variance().sqrt();
        // ⟨p²⟩/2m0 is ⟨H_free⟩ on this grid: H_free is the second-difference p²/2m0
        let rel = (mean_h / eps - 1.0).abs();
        let mean_p = expectation(&rho, &ops.p)?;
        let (_, p_std) = variance(&rho, &ops.p)?;

        let p_grid = well_momentum_grid(a, mode, cfg.hbar);
        let density = well_momentum_density(a, mode, &p_grid, cfg.hbar)?;
        let norm = trapezoid(&p_grid, &density);
        let p2: Vec<f64> = p_grid.iter().zip(&density).map(|(p, d)| p * p * d).collect();
        let density_std = (trapezoid(&p_grid, &p2) / norm).sqrt();

        w_ok &= peak.probability >= 0.999;
        spread_ok &= p_std > 0.0 && density_std > 0.0;
        energy_ok &= rel <= 1e-3;
        norm_ok &= (norm - 1.0).abs() <= 1e-4;
        rows.push(
            Row::table("energy")
                .int("n", mode)
                .real("epsilon_n", eps)
                .real("grid_eigenvalue", peak.eigenvalue)
                .real("probability", peak.probability)
                .real("energy_std_dev", energy_std)
                .real("mean_h", mean_h)
                .real("energy_rel_error", rel)
                .real("mean_p", mean_p)
                .real("p_std_dev", p_std)
                .real("density_p_std_dev", density_std)
                .real("density_norm", norm),
        );
        for e in dist.entries.iter().filter(|e| e.probability > 1e-12) {
            rows.push(
                Row::table("energy_distribution")
                    .int("n", mode)
                    .real("eigenvalue", e.eigenvalue)
                    .real("probability", e.probability),
            );
        }
        for (p, d) in p_grid.iter().zip(&density) {
            momentum_rows.push(Row::table("momentum").int("n", mode).real("p", *p).real("density", *d));
        }
    }
    rows.extend(momentum_rows);
    let params = units(cfg).int("grid_n", n as i64).real("a", a);
    let checks = vec![
        check("point_mass_energy", w_ok),
        check("momentum_spread", spread_ok),
        check("p2_matches_energy", energy_ok),
        check("density_normalized", norm_ok),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

fn collapse_check(cfg: &DemoConfig) -> Result<DemoReport> {
    let n = cfg.grid_n.unwrap_or(256);
    let l = positive("length", cfg.length.unwrap_or(1.0))?;
    let j = cfg.mode_n.unwrap_or(3);
    let g = GridSystem::ring(l, n, cfg.mass, cfg.hbar)?;
    let ops = grid_operators(&g)?;
    let rho = ring_plane_wave(&g, j)?.projector()?;
    let mean_p = expectation(&rho, &ops.p)?;
    let (_, dp) = variance(&rho, &ops.p)?;
    let (_, dx) = variance(&rho, &ops.x)?;
    let product = dx * dp;
    let half = cfg.hbar / 2.0;
    let robertson = commutator_mean(&rho, &ops.x, &ops.p)?.abs() / 2.0;
    let rows = vec![Row::table("collapse")
        .int("j", j)
        .real("p_eigenvalue", cfg.hbar * g.wavenumber(j))
        .real("mean_p", mean_p)
        .real("delta_p", dp)
        .real("delta_x", dx)
        .real("product", product)
        .real("half_hbar", half)
        .real("commutator_bound", robertson)];
    let params = units(cfg).int("grid_n", n as i64).real("length", l).int("mode_n", j);
    let checks = vec![
        check("sharp_momentum", dp <= 1e-12),
        check("spread_position", dx > 0.0),
        check("product_below_half_hbar", product < 0.99 * half),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

/// Number of packet widths L/8, L/16, ….
pub const CLASSICAL_WIDTHS: usize = 4;

fn classical_limit(cfg: &DemoConfig) -> Result<DemoReport> {
    let n = cfg.grid_n.unwrap_or(2048);
    let l = positive("length", cfg.length.unwrap_or(1.0))?;
    let j0 = cfg.mode_n.unwrap_or(1);
    if j0 < 1 {
        return Err(Error::ConfigInvalid(format!("mode_n must be at least 1, got {j0}")));
    }
    let g = GridSystem::ring(l, n, cfg.mass, cfg.hbar)?;
    let ops = grid_operators(&g)?;
    let half = cfg.hbar / 2.0;

    let mut rows = Vec::new();
    let (mut widths, mut rel_dp) = (Vec::new(), Vec::new());
    let mut bounds_ok = true;
    for k in 0..CLASSICAL_WIDTHS {
        let sigma = l / (8 << k) as f64;
        // p0 grows like 1/σ², so Δp/|p0| shrinks with σ
        let j = j0 * 4i64.pow(k as u32);
        let p0 = cfg.hbar * g.wavenumber(j);
        let rho = gaussian_packet(&g, 0.0, p0, sigma)?.projector()?;
        let (mean_x, mean_p) = (expectation(&rho, &ops.x)?, expectation(&rho, &ops.p)?);
        let (_, dx) = variance(&rho, &ops.x)?;
        let (_, dp) = variance(&rho, &ops.p)?;
        let ratio = dx * dp / half;
        let commutator = commutator_mean(&rho, &ops.x, &ops.p)?.abs() / 2.0 / half;
        bounds_ok &= dx * dp - half >= -UNCERTAINTY_SLACK && ratio <= 1.05;
        widths.push(sigma / l);
        rel_dp.push(dp / p0.abs());
        rows.push(
            Row::table("packets")
                .real("sigma_over_l", sigma / l)
                .real("p0", p0)
                .real("mean_x", mean_x)
                .real("mean_p", mean_p)
                .real("delta_x", dx)
                .real("delta_p", dp)
                .real("dp_over_p0", dp / p0.abs())
                .real("product_over_half_hbar", ratio)
                .real("commutator_bound_over_half_hbar", commutator),
        );
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let params = units(cfg).int("grid_n", n as i64).real("length", l).int("mode_n", j0);
    let checks = vec![
        check("widths_decrease", decreasing(&widths)),
        check("relative_momentum_spread_decreases", decreasing(&rel_dp)),
        check("near_minimum_uncertainty", bounds_ok),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

pub const SWEEP_TRIALS: usize = 1000;

fn uncertainty_sweep(cfg: &DemoConfig) -> Result<DemoReport> {
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for dim in 2..=8usize {
        let mut min_slack = f64::INFINITY;
        let mut violations = 0;
        for t in 0..SWEEP_TRIALS {
            let mut rng = stream(cfg.seed, (dim * SWEEP_TRIALS + t) as u64);
            let a = random_hermitian(&mut rng, dim);
            let b = random_hermitian(&mut rng, dim);
            let rank = rng.random_range(1..=dim);
            let rho = random_density(dim, rank, rng.random())?;
            let rep = uncertainty_check(&rho, &a, &b)?;
            min_slack = min_slack.min(rep.slack);
            violations += usize::from(!rep.satisfied);
        }
        worst = worst.min(min_slack);
        rows.push(
            Row::table("sweep")
                .int("dim", dim as i64)
                .int("trials", SWEEP_TRIALS as i64)
                .real("min_slack", min_slack)
                .int("violations", violations as i64),
        );
    }
    let s = spin_operators(1, cfg.hbar)?;
    let up = projector_from_vector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1e-12)?;
    let eq = uncertainty_check(&up, &s.jx, &s.jy)?;
    rows.push(
        Row::table("equality")
            .real("product", eq.product)
            .real("bound", eq.bound)
            .real("slack", eq.slack),
    );
    let params = units(cfg).int("seed", cfg.seed as i64).int("trials_per_dim", SWEEP_TRIALS as i64);
    let checks = vec![
        check("min_slack", worst >= -UNCERTAINTY_SLACK),
        check("equality_case", eq.slack.abs() <= 1e-12),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

fn basis_ket(a: f64, b: f64) -> Result<DensityOperator> {
    projector_from_vector(&[C64::new(a, 0.0), C64::new(b, 0.0)], 1e-12)
}

/// `|0⟩/|1⟩` and `|+⟩/|−⟩` half-half mixtures of `members` members in total.
pub fn half_half_ensembles(members: usize) -> Result<(EnsembleSpec, EnsembleSpec)> {
    let half = members / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = EnsembleSpec::heterogeneous(vec![
        Subpopulation::new("0", half, basis_ket(1.0, 0.0)?),
        Subpopulation::new("1", members - half, basis_ket(0.0, 1.0)?),
    ])?;
    let x = EnsembleSpec::heterogeneous(vec![
        Subpopulation::new("+", half, basis_ket(s, s)?),
        Subpopulation::new("-", members - half, basis_ket(s, -s)?),
    ])?;
    Ok((z, x))
}

fn ensemble_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    let members = cfg.members.unwrap_or(10_000);
    if members < 20 {
        return Err(Error::ConfigInvalid(format!("need at least 20 members, got {members}")));
    }
    let (zero_one, plus_minus) = half_half_ensembles(members)?;
    let rho_z = effective_density(&zero_one)?;
    let rho_x = effective_density(&plus_minus)?;
    let distance = (rho_z.matrix() - rho_x.matrix()).frobenius_norm();

    let sz = pauli::z();
    let labelled = sample_measurements(&zero_one, &sz, cfg.seed)?;
    let by_label = subdivision_test(&labelled, Partition::ByLabel, DEFAULT_ALPHA)?;
    let conjugate = subdivision_test(&sample_measurements(&zero_one, &pauli::x(), cfg.seed)?, Partition::ByLabel, DEFAULT_ALPHA)?;
    let homogeneous = EnsembleSpec::homogeneous(members, DensityOperator::maximally_mixed(2))?;
    let halves = subdivision_test(
        &sample_measurements(&homogeneous, &sz, cfg.seed)?,
        Partition::RandomHalves(cfg.seed),
        DEFAULT_ALPHA,
    )?;
    let populations = compare_populations(&labelled, &sample_measurements(&plus_minus, &sz, cfg.seed ^ 1)?, DEFAULT_ALPHA)?;

    let mut rows = vec![Row::table("effective_density").real("frobenius_distance", distance)];
    for (name, v) in [
        ("zero_one_sz_by_label", &by_label),
        ("zero_one_sx_by_label", &conjugate),
        ("mixed_sz_random_halves", &halves),
        ("zero_one_vs_plus_minus_sz", &populations),
    ] {
        rows.push(
            Row::table("homogeneity")
                .text("test", name)
                .text("partition", &v.partition)
                .real("statistic", v.statistic)
                .int("dof", v.dof as i64)
                .real("p_value", v.p_value)
                .flag("homogeneous", v.homogeneous),
        );
    }

    // one state, several ensembles
    let rho = random_density(3, 3, cfg.seed)?;
    let mut decomp_err: f64 = 0.0;
    for (k, spec) in alternative_decompositions(&rho, 3, cfg.seed)?.iter().enumerate() {
        let err = (mixture(spec)?.matrix() - rho.matrix()).frobenius_norm();
        decomp_err = decomp_err.max(err);
        rows.push(
            Row::table("decomposition")
                .int("index", k as i64)
                .int("components", spec.components.len() as i64)
                .real("reconstruction_error", err),
        );
    }

    let params = units(cfg).int("seed", cfg.seed as i64).int("members", members as i64).real("alpha", DEFAULT_ALPHA);
    let checks = vec![
        check("effective_densities_equal", distance <= 1e-12),
        check("by_label_rejects", by_label.p_value < 1e-6),
        check("random_halves_accept", halves.homogeneous),
        check("decompositions_reconstruct", decomp_err <= 1e-12),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

fn driven(hbar: f64) -> impl Fn(f64) -> HermitianOperator + Send + Sync + 'static {
    move |t| {
        HermitianOperator::linear_combination(&[(0.5 * hbar, &pauli::z()), (0.7 * hbar * t.cos(), &pauli::x())], "H(t)")
            .expect("2x2 operators")
    }
}

fn evolve(cfg: &DemoConfig) -> Result<DemoReport> {
    let hbar = cfg.hbar;
    let t_final = positive("t_final", cfg.t_final.unwrap_or(2.0 * PI))?;
    let dt = positive("dt", cfg.dt.unwrap_or(t_final / 1000.0))?;
    if dt > t_final {
        return Err(Error::InvalidStep(format!("dt {dt} exceeds t_final {t_final}")));
    }
    let omega = 1.0;
    let h = pauli::z().scaled(0.5 * hbar * omega).with_label("H");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus_x = basis_ket(s, s)?;

    // precession, stepped with dt even though H is constant
    let times: Vec<f64> = (0..=100).map(|k| t_final * k as f64 / 100.0).collect();
    let hc = h.clone();
    let stepped = Schedule::sampled(2, move |_| hc.clone());
    let observables = [h.clone(), pauli::x().with_label("sx"), pauli::z().with_label("sz")];
    let rec = trajectory(&plus_x, &stepped, &times, &observables, hbar, dt)?;
    let sx = rec.series("sx").unwrap_or_default();
    let precession = times.iter().zip(sx).map(|(t, v)| (v - (omega * t).cos()).abs()).fold(0.0, f64::max);
    let energy_drift = TrajectoryRecord::drift(rec.series("H").unwrap_or_default());
    let sz_drift = TrajectoryRecord::drift(rec.series("sz").unwrap_or_default());
    let purity_drift = TrajectoryRecord::drift(&rec.purity);
    let trace_err = rec.trace_error.iter().copied().fold(0.0, f64::max);

    // driven H(t): 10⁴ midpoint steps on a mixed state
    let sched = Schedule::sampled(2, driven(hbar));
    let mixed = random_density(2, 2, cfg.seed)?;
    let long = evolve_timedep(&mixed, &sched, t_final, t_final / 1e4, hbar)?;
    let long_trace = (long.trace() - 1.0).abs();
    let long_purity = (long.purity() - mixed.purity()).abs();

    // order of the midpoint rule against a fine reference
    let reference = evolve_timedep(&plus_x, &sched, t_final, t_final / 8192.0, hbar)?;
    let err = |steps: f64| -> Result<f64> {
        let r = evolve_timedep(&plus_x, &sched, t_final, t_final / steps, hbar)?;
        Ok((r.matrix() - reference.matrix()).frobenius_norm())
    };
    let richardson = err(64.0)? / err(128.0)?;

    // centred difference of ρ(t) against −(i/ħ)[H, ρ]
    let hr = random_hermitian(&mut stream(cfg.seed, 1), 3);
    let rho3 = random_density(3, 3, cfg.seed)?;
    let t0 = 0.8;
    let rho_t = evolve_const(&rho3, &hr, t0, hbar)?;
    let rhs = hr.matrix().commutator(rho_t.matrix()).scale(C64::new(0.0, -1.0 / hbar));
    let fd = |step: f64| -> Result<f64> {
        let fwd = evolve_const(&rho3, &hr, t0 + step, hbar)?;
        let back = evolve_const(&rho3, &hr, t0 - step, hbar)?;
        Ok((&(fwd.matrix() - back.matrix()).scale_real(0.5 / step) - &rhs).frobenius_norm())
    };
    let fd_ratio = fd(1e-2)? / fd(5e-3)?;

    let mut rows: Vec<Row> = times
        .iter()
        .zip(sx)
        .map(|(t, v)| Row::table("precession").real("t", *t).real("mean_sx", *v).real("cos_wt", (omega * t).cos()))
        .collect();
    rows.push(
        Row::table("summary")
            .real("precession_error", precession)
            .real("energy_drift", energy_drift)
            .real("sz_drift", sz_drift)
            .real("purity_drift", purity_drift)
            .real("trace_error", trace_err)
            .real("long_run_trace_drift", long_trace)
            .real("long_run_purity_drift", long_purity)
            .real("midpoint_halving_ratio", richardson)
            .real("finite_difference_ratio", fd_ratio),
    );
    let params = units(cfg).real("t_final", t_final).real("dt", dt).real("omega", omega).int("seed", cfg.seed as i64);
    let checks = vec![
        check("precession", precession <= 1e-8),
        check("energy_conserved", energy_drift <= 1e-9),
        check("commuting_observable_conserved", sz_drift <= 1e-9),
        check("purity_conserved", purity_drift <= 1e-9),
        check("trace_preserved", trace_err <= 1e-10),
        check("long_run_trace", long_trace <= 1e-10),
        check("long_run_purity", long_purity <= 1e-9),
        check("second_order_stepping", (3.5..=4.5).contains(&richardson)),
        check("von_neumann_finite_difference", (3.5..=4.5).contains(&fd_ratio)),
    ];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}

pub const TOMOGRAPHY_STATES: usize = 100;

fn tomography(cfg: &DemoConfig) -> Result<DemoReport> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for dim in 2..=6usize {
        let basis = observable_basis(dim)?;
        let mut max_err: f64 = 0.0;
        for k in 0..TOMOGRAPHY_STATES {
            let mut rng = stream(cfg.seed, (dim * TOMOGRAPHY_STATES + k) as u64);
            let rho = random_density(dim, 1 + k % dim, rng.random())?;
            let v = expectations_from_state(&rho, &basis)?;
            let back = state_from_expectations(&v, &basis)?;
            max_err = max_err.max((back.matrix() - rho.matrix()).frobenius_norm());
        }
        worst = worst.max(max_err);
        rows.push(
            Row::table("round_trip")
                .int("dim", dim as i64)
                .int("states", TOMOGRAPHY_STATES as i64)
                .int("observables", basis.len() as i64)
                .real("max_frobenius_error", max_err),
        );
    }
    let basis2 = observable_basis(2)?;
    let rejected = matches!(state_from_expectations(&[0.0, 0.0, 2.0], &basis2), Err(Error::NotPositive { .. }));
    rows.push(Row::table("unphysical").text("bloch_vector", "(0,0,2)").flag("not_positive_raised", rejected));
    let params = units(cfg).int("seed", cfg.seed as i64).int("states_per_dim", TOMOGRAPHY_STATES as i64);
    let checks = vec![check("round_trip", worst <= 1e-10), check("not_positive", rejected)];
    Ok(DemoReport::new(cfg.demo, params, rows, checks))
}
