//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 5 and 10 are known to fail on a ring of circumference L at the
//! widest packet width, σ = L/8 (see README, "Known limitations"). For those
//! two the run checks that the failure has exactly the documented shape and
//! prints FAIL; any other failure makes the process exit non-zero.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::Rng;
use rho_engine::demos::DemoId;
use rho_engine::density::{projector_from_vector, random_density, DensityOperator};
use rho_engine::dynamics::{evolve_const, evolve_timedep, trajectory, Schedule, TrajectoryRecord};
use rho_engine::ensembles::{
    effective_density, sample_measurements, subdivision_test, EnsembleSpec, Partition, Subpopulation,
};
use rho_engine::measurement::{
    commutator_mean, expectation, expectations_from_state, observable_basis, outcome_distribution,
    state_from_expectations, uncertainty_check, variance,
};
use rho_engine::models::{
    gaussian_packet, grid_operators, ring_cosine, ring_plane_wave, spin_operators, well_eigenstate,
    well_momentum_density, well_wavefunction, GridSystem,
};
use rho_engine::operator::{hermitian_from_matrix, pauli, HermitianOperator};
use rho_engine::rng::{random_hermitian, random_unitary, stream};
use rho_engine::{ComplexMatrix, Error};

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when a failing criterion failed in exactly the documented way.
    documented: Option<&'static str>,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, documented: None }
    }
}

type Criterion = fn() -> Verdict;

fn main() -> ExitCode {
    let criteria: [(&str, f64, Criterion); 10] = [
        ("uncertainty inequality", 10.0, c1_uncertainty),
        ("free particle", 1.0, c2_free_particle),
        ("well dual distributions", 30.0, c3_well_dual),
        ("collapse contradiction", 1.0, c4_collapse),
        ("classical limit", 10.0, c5_classical_limit),
        ("tomography", 10.0, c6_tomography),
        ("dynamics", 20.0, c7_dynamics),
        ("ensembles", 30.0, c8_ensembles),
        ("probability oracle", 10.0, c9_probability_oracle),
        ("cli suite", 120.0, c10_cli_suite),
    ];
    let mut undocumented = 0;
    let mut passed = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < *budget;
        let pass = v.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        let timing = format!("{secs:.2}s of {budget}s");
        let timing = if in_time { timing } else { format!("{timing}, over budget") };
        println!("criterion {:>2} {status} [{name}] {} ({timing})", k + 1, v.detail);
        if pass {
            passed += 1;
        } else {
            match v.documented {
                Some(why) if in_time => println!("             known limitation: {why}"),
                _ => undocumented += 1,
            }
        }
    }
    println!("acceptance: {passed}/10 pass, {} known limitations, {undocumented} unexpected failures", 10 - passed - undocumented);
    if undocumented == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn density(dim: usize, seed: u64) -> DensityOperator {
    let mut rng = stream(seed, 0);
    let rank = rng.random_range(1..=dim);
    random_density(dim, rank, rng.random()).unwrap()
}

/// −i(AB − BA) by explicit products.
fn c_matrix(a: &HermitianOperator, b: &HermitianOperator) -> ComplexMatrix {
    let ab = a.matrix().matmul(b.matrix());
    let ba = b.matrix().matmul(a.matrix());
    (&ab - &ba).scale(C64::new(0.0, -1.0))
}

fn trace_rho(rho: &DensityOperator, m: &ComplexMatrix) -> C64 {
    rho.matrix().matmul(m).trace()
}

fn c1_uncertainty() -> Verdict {
    let mut min_slack = f64::INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for dim in 2..=8usize {
        for t in 0..1000u64 {
            let mut rng = stream(1000 + dim as u64, t);
            let a = random_hermitian(&mut rng, dim);
            let b = random_hermitian(&mut rng, dim);
            let rho = density(dim, rng.random());
            let rep = uncertainty_check(&rho, &a, &b).unwrap();
            min_slack = min_slack.min(rep.slack);
            let bound = trace_rho(&rho, &c_matrix(&a, &b)).re.abs() / 2.0;
            oracle_gap = oracle_gap.max((bound - rep.bound).abs() / bound.max(1.0));
        }
    }
    let s = spin_operators(1, 1.0).unwrap();
    let up = projector_from_vector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1e-12).unwrap();
    let eq = uncertainty_check(&up, &s.jx, &s.jy).unwrap();
    let pass = min_slack >= -1e-9 && eq.slack.abs() <= 1e-12 && oracle_gap <= 1e-12;
    Verdict::new(pass, format!("min slack {min_slack:.3e}, equality slack {:.1e}, bound vs oracle {oracle_gap:.1e}", eq.slack))
}

fn c2_free_particle() -> Verdict {
    let (l, hbar, m0, j) = (1.0, 1.0, 1.0, 3);
    let g = GridSystem::ring(l, 256, m0, hbar).unwrap();
    let ops = grid_operators(&g).unwrap();
    let hk = hbar * 2.0 * PI * j as f64 / l;
    let states = [(ring_cosine(&g, j).unwrap(), 0.0), (ring_plane_wave(&g, j).unwrap(), hk), (ring_plane_wave(&g, -j).unwrap(), -hk)];
    let mut mean_err: f64 = 0.0;
    let mut energies = Vec::new();
    for (psi, want) in &states {
        let rho = psi.projector().unwrap();
        let mean = expectation(&rho, &ops.p).unwrap();
        let (var, _) = variance(&rho, &ops.p).unwrap();
        mean_err = mean_err.max((mean - want).abs());
        energies.push((var + mean * mean) / (2.0 * m0));
    }
    let spread = TrajectoryRecord::drift(&energies);
    let exact = (energies[0] - hk * hk / (2.0 * m0)).abs();
    Verdict::new(
        mean_err <= 1e-10 && spread <= 1e-10,
        format!("max |<p> - expected| {mean_err:.1e}, energy spread {spread:.1e}, vs (hk)^2/2m {exact:.1e}"),
    )
}

/// (2πħ)^(−1/2) ∫₋ₐᵃ ψₙ(x) e^{−ipx/ħ} dx by composite Simpson, squared.
fn quadrature_density(a: f64, n: i64, p: f64, hbar: f64) -> f64 {
    let m = 20_000;
    let h = 2.0 * a / m as f64;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=m {
        let x = -a + k as f64 * h;
        let w = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += C64::from_polar(w * well_wavefunction(a, n, x), -p * x / hbar);
    }
    (acc * h / 3.0).norm_sqr() / (2.0 * PI * hbar)
}

fn c3_well_dual() -> Verdict {
    let (a, hbar, m0) = (1.0, 1.0, 1.0);
    let g = GridSystem::hard_wall(a, 512, m0, hbar).unwrap();
    let ops = grid_operators(&g).unwrap();
    let mut worst_w: f64 = 1.0;
    let mut min_p_std = f64::INFINITY;
    let mut worst_energy: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut max_h_std_ratio: f64 = 0.0;
    for n in [1, 2, 5] {
        let (psi, eps) = well_eigenstate(&g, n).unwrap();
        let rho = psi.projector().unwrap();
        let dist = outcome_distribution(&rho, &ops.h_free).unwrap();
        worst_w = worst_w.min(dist.nearest(eps).unwrap().probability);
        max_h_std_ratio = max_h_std_ratio.max(dist.variance().sqrt() / eps);
        min_p_std = min_p_std.min(variance(&rho, &ops.p).unwrap().1);
        // p²/2m0 on the hard-wall grid is the second-difference H_free
        worst_energy = worst_energy.max((expectation(&rho, &ops.h_free).unwrap() / eps - 1.0).abs());

        let probe: Vec<f64> = (0..=200).map(|k| -40.0 + 0.4 * k as f64).chain([n as f64 * PI / 2.0, -(n as f64) * PI / 2.0]).collect();
        let analytic = well_momentum_density(a, n, &probe, hbar).unwrap();
        for (p, d) in probe.iter().zip(&analytic) {
            worst_oracle = worst_oracle.max((d - quadrature_density(a, n, *p, hbar)).abs());
        }
        // ±40ħ/a with 4001 samples for n = 1, widened with n
        let intervals = 4000 * n as usize;
        let half = 40.0 * n as f64 * hbar / a;
        let grid: Vec<f64> = (0..=intervals).map(|k| -half + k as f64 * 2.0 * half / intervals as f64).collect();
        let dens = well_momentum_density(a, n, &grid, hbar).unwrap();
        let norm: f64 = grid.windows(2).zip(dens.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    let pass = worst_w >= 0.999
        && min_p_std > 0.0
        && max_h_std_ratio < 1e-3
        && worst_energy <= 1e-3
        && worst_oracle <= 1e-8
        && worst_norm <= 1e-4;
    Verdict::new(
        pass,
        format!(
            "min W(e_n) {worst_w:.6}, min std p {min_p_std:.3}, std H/e_n {max_h_std_ratio:.1e}, <p^2>/2m vs e_n {worst_energy:.1e}, oracle {worst_oracle:.1e}, norm {worst_norm:.1e}"
        ),
    )
}

fn c4_collapse() -> Verdict {
    let g = GridSystem::ring(1.0, 256, 1.0, 1.0).unwrap();
    let ops = grid_operators(&g).unwrap();
    let rho = ring_plane_wave(&g, 3).unwrap().projector().unwrap();
    let (_, dp) = variance(&rho, &ops.p).unwrap();
    let (_, dx) = variance(&rho, &ops.x).unwrap();
    // uniform position density on N points: Δx² = L²(N² − 1)/(12N²)
    let dx_exact = ((256.0f64.powi(2) - 1.0) / (12.0 * 256.0f64.powi(2))).sqrt();
    let pass = dp <= 1e-12 && dx * dp < 0.99 * 0.5 && (dx - dx_exact).abs() < 1e-12;
    Verdict::new(pass, format!("dp {dp:.2e}, dx {dx:.6}, dx*dp {:.2e} < 0.99*hbar/2", dx * dp))
}

fn c5_classical_limit() -> Verdict {
    let (l, hbar) = (1.0, 1.0);
    let g = GridSystem::ring(l, 2048, 1.0, hbar).unwrap();
    let ops = grid_operators(&g).unwrap();
    let half = hbar / 2.0;
    let mut widths = Vec::new();
    let mut rel = Vec::new();
    let mut ratios = Vec::new();
    let mut bounded = Vec::new();
    let mut robertson_ok = true;
    for k in 0..4 {
        let sigma = l / (8 << k) as f64;
        let p0 = hbar * 2.0 * PI * 4f64.powi(k) / l;
        let rho = gaussian_packet(&g, 0.0, p0, sigma).unwrap().projector().unwrap();
        let (_, dx) = variance(&rho, &ops.x).unwrap();
        let (_, dp) = variance(&rho, &ops.p).unwrap();
        let c = commutator_mean(&rho, &ops.x, &ops.p).unwrap().abs() / 2.0;
        robertson_ok &= dx * dp - c >= -1e-9;
        widths.push(sigma / l);
        rel.push(dp / p0);
        ratios.push(dx * dp / half);
        bounded.push(dx * dp - half >= -1e-9 && dx * dp / half <= 1.05);
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing(&widths) && decreasing(&rel) && bounded.iter().all(|b| *b);
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.6}")).collect();
    let mut v = Verdict::new(pass, format!("dx*dp/(hbar/2) = [{}] for sigma = L/8..L/64", list.join(", ")));
    // documented shape: only σ = L/8 misses, and the grid's own commutator
    // bound still holds there
    if !pass && decreasing(&widths) && decreasing(&rel) && !bounded[0] && bounded[1..].iter().all(|b| *b) && robertson_ok {
        v.documented = Some(
            "on a ring the position operator is periodic and its commutator with p is not i*hbar; at sigma = L/8 the packet reaches the seam and dx*dp drops 0.1% below hbar/2 while still meeting |<[x,p]>|/2",
        );
    }
    v
}

fn c6_tomography() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut gram: f64 = 0.0;
    for dim in 2..=6usize {
        let basis = observable_basis(dim).unwrap();
        for (i, gi) in basis.operators().iter().enumerate() {
            for (j, gj) in basis.operators().iter().enumerate() {
                let want = if i == j { 2.0 } else { 0.0 };
                gram = gram.max((gi.matrix().matmul(gj.matrix()).trace() - C64::new(want, 0.0)).norm());
            }
        }
        for k in 0..100u64 {
            let rho = density(dim, 7000 + 100 * dim as u64 + k);
            let v = expectations_from_state(&rho, &basis).unwrap();
            let back = state_from_expectations(&v, &basis).unwrap();
            worst = worst.max((back.matrix() - rho.matrix()).frobenius_norm());
        }
    }
    let b2 = observable_basis(2).unwrap();
    let raised = matches!(state_from_expectations(&[0.0, 0.0, 2.0], &b2), Err(Error::NotPositive { .. }));
    Verdict::new(
        worst <= 1e-10 && raised && gram <= 1e-12,
        format!("max round-trip error {worst:.1e}, Tr(GiGj) - 2 delta_ij {gram:.1e}, NotPositive raised: {raised}"),
    )
}

fn driven(t: f64) -> HermitianOperator {
    HermitianOperator::linear_combination(&[(0.5, &pauli::z()), (0.7 * t.cos(), &pauli::x())], "H(t)").unwrap()
}

fn c7_dynamics() -> Verdict {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus_x = projector_from_vector(&[C64::new(s, 0.0), C64::new(s, 0.0)], 1e-12).unwrap();
    let h = pauli::z().scaled(0.5);
    let times: Vec<f64> = (0..=200).map(|k| 4.0 * PI * k as f64 / 200.0).collect();
    let rec = trajectory(&plus_x, &Schedule::Constant(h.clone()), &times, &[pauli::x().with_label("sx")], 1.0, 1e-3).unwrap();
    let precession = times.iter().zip(rec.series("sx").unwrap()).map(|(t, v)| (v - t.cos()).abs()).fold(0.0, f64::max);

    let sched = Schedule::sampled(2, driven);
    let mixed = density(2, 77);
    let long = evolve_timedep(&mixed, &sched, 10.0, 1e-3, 1.0).unwrap();
    let trace_drift = (long.trace() - 1.0).abs();
    let purity_drift = (long.purity() - mixed.purity()).abs();

    let t = 2.0;
    let reference = evolve_timedep(&plus_x, &sched, t, t / 8192.0, 1.0).unwrap();
    let err = |steps: f64| (evolve_timedep(&plus_x, &sched, t, t / steps, 1.0).unwrap().matrix() - reference.matrix()).frobenius_norm();
    let halving = err(64.0) / err(128.0);

    let hr = random_hermitian(&mut stream(71, 0), 4);
    let rho0 = density(4, 72);
    let t0 = 0.9;
    let rho_t = evolve_const(&rho0, &hr, t0, 1.0).unwrap();
    let rhs = hr.matrix().commutator(rho_t.matrix()).scale(C64::new(0.0, -1.0));
    let fd = |step: f64| {
        let f = evolve_const(&rho0, &hr, t0 + step, 1.0).unwrap();
        let b = evolve_const(&rho0, &hr, t0 - step, 1.0).unwrap();
        (&(f.matrix() - b.matrix()).scale_real(0.5 / step) - &rhs).frobenius_norm()
    };
    let fd_ratio = fd(1e-2) / fd(5e-3);
    let pass = precession <= 1e-8
        && trace_drift <= 1e-10
        && purity_drift <= 1e-9
        && (3.5..=4.5).contains(&halving)
        && (3.5..=4.5).contains(&fd_ratio);
    Verdict::new(
        pass,
        format!(
            "precession {precession:.1e}, trace drift {trace_drift:.1e}, purity drift {purity_drift:.1e} (1e4 steps), dt-halving ratio {halving:.3}, finite-difference ratio {fd_ratio:.3}"
        ),
    )
}

fn ket(a: f64, b: f64) -> DensityOperator {
    projector_from_vector(&[C64::new(a, 0.0), C64::new(b, 0.0)], 1e-12).unwrap()
}

fn c8_ensembles() -> Verdict {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero_one = EnsembleSpec::heterogeneous(vec![
        Subpopulation::new("0", 5000, ket(1.0, 0.0)),
        Subpopulation::new("1", 5000, ket(0.0, 1.0)),
    ])
    .unwrap();
    let plus_minus = EnsembleSpec::heterogeneous(vec![
        Subpopulation::new("+", 5000, ket(s, s)),
        Subpopulation::new("-", 5000, ket(s, -s)),
    ])
    .unwrap();
    let d = (effective_density(&zero_one).unwrap().matrix() - effective_density(&plus_minus).unwrap().matrix()).frobenius_norm();
    let recs = sample_measurements(&zero_one, &pauli::z(), 2024).unwrap();
    let by_label = subdivision_test(&recs, Partition::ByLabel, 0.01).unwrap();
    let mixed = EnsembleSpec::homogeneous(10_000, DensityOperator::maximally_mixed(2)).unwrap();
    let passes = (0..100u64)
        .filter(|&seed| {
            let r = sample_measurements(&mixed, &pauli::z(), seed).unwrap();
            subdivision_test(&r, Partition::RandomHalves(seed), 0.01).unwrap().homogeneous_at(0.01)
        })
        .count();
    Verdict::new(
        d <= 1e-15 && by_label.p_value < 1e-6 && passes >= 95,
        format!("effective densities differ by {d:.1e}, by-label p {:.1e}, random halves pass {passes}/100", by_label.p_value),
    )
}

fn c9_probability_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut mismatched = 0;
    for k in 0..500u64 {
        let mut rng = stream(9000, k);
        let dim = 2 + (k % 7) as usize;
        // A = U diag(λ) U† with known spectral projectors; some values repeat
        let u = random_unitary(&mut rng, dim);
        let distinct = rng.random_range(1..=dim);
        let mut values: Vec<f64> = (0..distinct).map(|j| j as f64 * 0.75 - 1.0).collect();
        while values.len() < dim {
            let j = rng.random_range(0..distinct);
            values.push(values[j]);
        }
        let lam = ComplexMatrix::real_diagonal(&values);
        let a = hermitian_from_matrix(u.matmul(&lam).matmul(&u.adjoint()), 1e-10).unwrap();
        let rho = if k % 2 == 0 {
            density(dim, 9100 + k)
        } else {
            // same state without the pure-vector shortcut
            DensityOperator::from_matrix(density(dim, 9100 + k).matrix().clone()).unwrap()
        };
        let dist = outcome_distribution(&rho, &a).unwrap();
        if dist.entries.len() != distinct {
            mismatched += 1;
            continue;
        }
        for (j, entry) in dist.entries.iter().enumerate() {
            let value = j as f64 * 0.75 - 1.0;
            let mut proj = ComplexMatrix::zeros(dim);
            for (col, _) in values.iter().enumerate().filter(|(_, v)| **v == value) {
                let c = u.column(col);
                proj = &proj + &ComplexMatrix::outer(&c, &c);
            }
            let w = trace_rho(&rho, &proj).re;
            worst = worst.max((entry.probability - w).abs()).max((entry.eigenvalue - value).abs());
        }
    }
    Verdict::new(
        worst <= 1e-10 && mismatched == 0,
        format!("max deviation from U-built projectors {worst:.1e} over 500 pairs, group-count mismatches {mismatched}"),
    )
}

fn c10_cli_suite() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_rho-engine");
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut errored = Vec::new();
    for id in DemoId::ALL {
        let out = dir.path().join(format!("{id}.csv"));
        let status = Command::new(exe)
            .args(["run", id.name(), "--out"])
            .arg(&out)
            .env_remove("RHO_ENGINE_SEED")
            .output()
            .unwrap();
        match status.status.code() {
            Some(0) => {}
            Some(1) => failed.push(id),
            _ => errored.push(id),
        }
        if !out.exists() {
            errored.push(id);
        }
    }
    let elapsed = start.elapsed();
    let pass = failed.is_empty() && errored.is_empty() && elapsed < Duration::from_secs(120);
    let names: Vec<&str> = failed.iter().map(|d| d.name()).collect();
    let mut v = Verdict::new(
        pass,
        format!("{} demos in {:.1}s, non-zero exits: [{}]", DemoId::ALL.len(), elapsed.as_secs_f64(), names.join(", ")),
    );
    if !pass && errored.is_empty() && failed == [DemoId::ClassicalLimit] && elapsed < Duration::from_secs(120) {
        v.documented = Some("only ClassicalLimit exits non-zero, for the reason given under criterion 5");
    }
    v
}
