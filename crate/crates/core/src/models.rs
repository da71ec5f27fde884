//! Concrete systems: a particle on a periodic ring, a particle in an
//! infinitely deep well over `−a ≤ x ≤ a`, spin-j multiplets, and Gaussian
//! packets.
//!
//! Ring grids sample `x ∈ [−L/2, L/2)` at `N` points; momentum is the
//! spectral derivative, a circulant matrix with eigenvalues `ħ·2πj/L` for
//! `j ∈ {−N/2+1, …, N/2}`, and the free Hamiltonian is `p²/2m0` in the same
//! basis. Hard-wall grids sample the `N` interior points of the well with
//! spacing `2a/(N+1)`; the Hamiltonian is the second-difference Laplacian
//! with zero boundary values and momentum is the central difference. On a
//! finite interval the continuum momentum operator is not self-adjoint under
//! these boundary conditions; the central-difference matrix is Hermitian by
//! construction, which is all the measurement calculus needs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::density::{projector_from_vector, DensityOperator};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, I, ZERO};
use crate::operator::HermitianOperator;

pub const MIN_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Ring,
    HardWall,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSystem {
    length: f64,
    points: usize,
    boundary: Boundary,
    mass: f64,
    hbar: f64,
    x_samples: Vec<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl GridSystem {
    /// Periodic ring of circumference `length` with an even number of points.
    pub fn ring(length: f64, points: usize, mass: f64, hbar: f64) -> Result<Self> {
        Self::validate(length, points, mass, hbar)?;
        if points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("ring needs an even point count, got {points}")));
        }
        let dx = length / points as f64;
        let x_samples = (0..points).map(|i| -0.5 * length + i as f64 * dx).collect();
        Ok(Self { length, points, boundary: Boundary::Ring, mass, hbar, x_samples })
    }

    /// Infinitely deep well over `−a ≤ x ≤ a`, sampled at interior points.
    pub fn hard_wall(half_width: f64, points: usize, mass: f64, hbar: f64) -> Result<Self> {
        let length = 2.0 * half_width;
        Self::validate(length, points, mass, hbar)?;
        let dx = length / (points + 1) as f64;
        let x_samples = (1..=points).map(|i| -half_width + i as f64 * dx).collect();
        Ok(Self { length, points, boundary: Boundary::HardWall, mass, hbar, x_samples })
    }

    fn validate(length: f64, points: usize, mass: f64, hbar: f64) -> Result<()> {
        positive("length", length)?;
        positive("mass", mass)?;
        positive("hbar", hbar)?;
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {points}")));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn x_samples(&self) -> &[f64] {
        &self.x_samples
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Ring => self.length / self.points as f64,
            Boundary::HardWall => self.length / (self.points + 1) as f64,
        }
    }

    /// Ring wavenumber 2πj/L.
    pub fn wavenumber(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / self.length
    }

    /// Ring momentum eigenvalues ħ·2πj/L, ascending.
    pub fn ring_momenta(&self) -> Vec<f64> {
        let half = (self.points / 2) as i64;
        (-half + 1..=half).map(|j| self.hbar * self.wavenumber(j)).collect()
    }

    fn require(&self, boundary: Boundary) -> Result<()> {
        if self.boundary != boundary {
            let expected = match boundary {
                Boundary::Ring => "ring",
                Boundary::HardWall => "hard-wall",
            };
            return Err(Error::WrongBoundary { expected });
        }
        Ok(())
    }
}

/// Amplitudes on a grid, normalized so that Σ|ψᵢ|²·Δx = 1.
#[derive(Clone, Debug)]
pub struct WaveVector<'g> {
    grid: &'g GridSystem,
    amplitudes: Vec<C64>,
}

impl<'g> WaveVector<'g> {
    pub fn new(grid: &'g GridSystem, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.points {
            return Err(Error::DimensionMismatch { expected: grid.points, found: amplitudes.len() });
        }
        let w = Self { grid, amplitudes };
        let n = w.norm_sq();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: n.sqrt(), tolerance: 1e-10 });
        }
        Ok(w)
    }

    /// Rescales arbitrary amplitudes to unit grid norm.
    pub fn normalized(grid: &'g GridSystem, amplitudes: Vec<C64>) -> Result<Self> {
        let dx = grid.spacing();
        let n = (amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n, tolerance: 0.0 });
        }
        Self::new(grid, amplitudes.into_iter().map(|z| z / n).collect())
    }

    pub fn grid(&self) -> &GridSystem {
        self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Σ|ψᵢ|²·Δx
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// ψ·√Δx, a unit vector in ℂᴺ.
    pub fn unit_vector(&self) -> Vec<C64> {
        let s = self.grid.spacing().sqrt();
        self.amplitudes.iter().map(|z| z * s).collect()
    }

    /// |ψ⟩⟨ψ| on the grid.
    pub fn projector(&self) -> Result<DensityOperator> {
        projector_from_vector(&self.unit_vector(), 1e-10)
    }
}

#[derive(Clone, Debug)]
pub struct GridOperators {
    pub x: HermitianOperator,
    pub p: HermitianOperator,
    pub h_free: HermitianOperator,
}

/// Position, momentum, and free Hamiltonian on the grid.
pub fn grid_operators(g: &GridSystem) -> Result<GridOperators> {
    let x = HermitianOperator::from_real_diagonal(&g.x_samples, "x");
    let (p, h_free) = match g.boundary {
        Boundary::Ring => ring_momentum_and_energy(g),
        Boundary::HardWall => wall_momentum_and_energy(g),
    };
    Ok(GridOperators { x, p, h_free })
}

fn ring_momentum_and_energy(g: &GridSystem) -> (HermitianOperator, HermitianOperator) {
    let n = g.points;
    let half = n / 2;
    let kinetic = g.hbar * g.hbar / (2.0 * g.mass);
    let mut p_col = vec![ZERO; n];
    let mut h_col = vec![ZERO; n];
    for (m, (pc, hc)) in p_col.iter_mut().zip(h_col.iter_mut()).enumerate() {
        let mut p_im = 0.0;
        let mut h_re = 0.0;
        for j in 1..half {
            let k = g.wavenumber(j as i64);
            let angle = 2.0 * PI * ((j * m) % n) as f64 / n as f64;
            p_im += 2.0 * k * angle.sin();
            h_re += 2.0 * k * k * angle.cos();
        }
        let k_nyq = g.wavenumber(half as i64);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *pc = C64::new(g.hbar * k_nyq * sign, g.hbar * p_im) / n as f64;
        *hc = C64::new(kinetic * (h_re + k_nyq * k_nyq * sign), 0.0) / n as f64;
    }
    (
        HermitianOperator::trusted(ComplexMatrix::circulant(&p_col), "p"),
        HermitianOperator::trusted(ComplexMatrix::circulant(&h_col), "H"),
    )
}

fn wall_momentum_and_energy(g: &GridSystem) -> (HermitianOperator, HermitianOperator) {
    let n = g.points;
    let dx = g.spacing();
    let mut p = ComplexMatrix::zeros(n);
    let mut h = ComplexMatrix::zeros(n);
    let hop = g.hbar / (2.0 * dx);
    let diag = g.hbar * g.hbar / (g.mass * dx * dx);
    for i in 0..n {
        h[(i, i)] = C64::new(diag, 0.0);
        if i + 1 < n {
            p[(i, i + 1)] = -I * hop;
            p[(i + 1, i)] = I * hop;
            h[(i, i + 1)] = C64::new(-0.5 * diag, 0.0);
            h[(i + 1, i)] = C64::new(-0.5 * diag, 0.0);
        }
    }
    (HermitianOperator::trusted(p, "p"), HermitianOperator::trusted(h, "H"))
}

fn ring_mode_check(g: &GridSystem, j: i64) -> Result<()> {
    g.require(Boundary::Ring)?;
    if j.unsigned_abs() as usize >= g.points / 2 {
        return Err(Error::ModeOutOfRange { mode: j, points: g.points });
    }
    Ok(())
}

/// e^{ikⱼx}/√L with kⱼ = 2πj/L.
pub fn ring_plane_wave(g: &GridSystem, j: i64) -> Result<WaveVector<'_>> {
    ring_mode_check(g, j)?;
    let n = g.points as i64;
    let amp = 1.0 / g.length.sqrt();
    let amplitudes = (0..n)
        .map(|l| {
            // kⱼxₗ = 2πjl/N − πj, reduced exactly in integers
            let angle = 2.0 * PI * (j * l).rem_euclid(n) as f64 / n as f64 - PI * j as f64;
            C64::from_polar(amp, angle)
        })
        .collect();
    WaveVector::normalized(g, amplitudes)
}

/// Normalized e^{ikⱼx} + e^{−ikⱼx}.
pub fn ring_cosine(g: &GridSystem, j: i64) -> Result<WaveVector<'_>> {
    let plus = ring_plane_wave(g, j)?;
    let minus = ring_plane_wave(g, -j)?;
    let sum = plus.amplitudes.iter().zip(&minus.amplitudes).map(|(a, b)| a + b).collect();
    WaveVector::normalized(g, sum)
}

/// εₙ = n²π²ħ²/(8m0a²)
pub fn well_energy(half_width: f64, n: i64, mass: f64, hbar: f64) -> f64 {
    let nf = n as f64;
    nf * nf * PI * PI * hbar * hbar / (8.0 * mass * half_width * half_width)
}

/// Continuum well eigenfunction: cos(nπx/2a)/√a for odd n, sin(nπx/2a)/√a
/// for even n, zero outside the well.
pub fn well_wavefunction(half_width: f64, n: i64, x: f64) -> f64 {
    if x.abs() > half_width {
        return 0.0;
    }
    let arg = n as f64 * PI * x / (2.0 * half_width);
    let amp = 1.0 / half_width.sqrt();
    if n % 2 == 1 {
        amp * arg.cos()
    } else {
        amp * arg.sin()
    }
}

/// Analytic eigenfunction `n` sampled on the hard-wall grid, with εₙ.
pub fn well_eigenstate(g: &GridSystem, n: i64) -> Result<(WaveVector<'_>, f64)> {
    g.require(Boundary::HardWall)?;
    if n < 1 || n as usize > g.points {
        return Err(Error::InvalidMode(n));
    }
    let a = g.half_width();
    let amplitudes = g.x_samples.iter().map(|&x| C64::new(well_wavefunction(a, n, x), 0.0)).collect();
    let psi = WaveVector::new(g, amplitudes)?;
    Ok((psi, well_energy(a, n, g.mass, g.hbar)))
}

/// Below this distance in p from ±nπħ/2a the sinc terms use their series.
const SINC_SERIES_BAND: f64 = 1e-6;

fn sinc(u: f64, near_pole: bool) -> f64 {
    if near_pole {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// |φₙ(p)|² with φₙ(p) = (2πħ)^(−1/2) ∫₋ₐᵃ ψₙ(x) e^{−ipx/ħ} dx in closed form.
///
/// With κ = nπ/2a and q = p/ħ the integral is
/// `a·[sinc((κ−q)a) ± sinc((κ+q)a)]/√a`, `+` for odd n (cosine modes) and
/// `−` (times −i) for even n (sine modes).
pub fn well_momentum_density(half_width: f64, n: i64, p_samples: &[f64], hbar: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidMode(n));
    }
    if !(half_width > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidGrid(format!("need a > 0 and hbar > 0, got a={half_width}, hbar={hbar}")));
    }
    let a = half_width;
    let p_pole = n as f64 * PI * hbar / (2.0 * a);
    let kappa = p_pole / hbar;
    let prefactor = a / (2.0 * PI * hbar);
    p_samples
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(Error::InvalidGrid(format!("non-finite momentum sample {p}")));
            }
            let q = p / hbar;
            let minus = sinc((kappa - q) * a, (p - p_pole).abs() < SINC_SERIES_BAND);
            let plus = sinc((kappa + q) * a, (p + p_pole).abs() < SINC_SERIES_BAND);
            let bracket = if n % 2 == 1 { minus + plus } else { minus - plus };
            Ok(prefactor * bracket * bracket)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: HermitianOperator,
    pub jy: HermitianOperator,
    pub jz: HermitianOperator,
}

/// Spin-j operators in the basis m = j, j−1, …, −j.
pub fn spin_operators(two_j: i64, hbar: f64) -> Result<SpinOperators> {
    if two_j < 1 {
        return Err(Error::InvalidSpin(two_j));
    }
    let dim = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m_of = |k: usize| j - k as f64;
    let mut raise = ComplexMatrix::zeros(dim);
    for k in 1..dim {
        // J+ |m⟩ = ħ√(j(j+1) − m(m+1)) |m+1⟩, |m+1⟩ sits at index k−1
        let m = m_of(k);
        raise[(k - 1, k)] = C64::new(hbar * (j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).scale_real(0.5);
    let jy = (&raise - &lower).scale(C64::new(0.0, -0.5));
    let jz: Vec<f64> = (0..dim).map(|k| hbar * m_of(k)).collect();
    Ok(SpinOperators {
        jx: HermitianOperator::trusted(jx, "Jx"),
        jy: HermitianOperator::trusted(jy, "Jy"),
        jz: HermitianOperator::from_real_diagonal(&jz, "Jz"),
    })
}

/// Gaussian packet on a ring: |ψ|² has standard deviation `sigma_x` about
/// `x0` (distances taken modulo L), with phase e^{ip0(x−x0)/ħ}.
pub fn gaussian_packet(g: &GridSystem, x0: f64, p0: f64, sigma_x: f64) -> Result<WaveVector<'_>> {
    g.require(Boundary::Ring)?;
    if !(sigma_x > 0.0) || 4.0 * sigma_x >= g.length {
        return Err(Error::PacketTooWide { sigma: sigma_x, length: g.length });
    }
    if sigma_x <= 2.0 * g.spacing() {
        return Err(Error::PacketUnresolved { sigma: sigma_x, spacing: g.spacing() });
    }
    let l = g.length;
    let amplitudes = g
        .x_samples
        .iter()
        .map(|&x| {
            let d = (x - x0 + 0.5 * l).rem_euclid(l) - 0.5 * l;
            let envelope = (-d * d / (4.0 * sigma_x * sigma_x)).exp();
            C64::from_polar(envelope, p0 * d / g.hbar)
        })
        .collect();
    WaveVector::normalized(g, amplitudes)
}
