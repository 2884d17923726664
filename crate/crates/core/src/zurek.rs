//! Ideal spin-bath model: H = ħ Σ_k g_k σ_z ⊗ σ_z^k, no self-Hamiltonians.
//!
//! The coherence factor is the product
//! `z(t) = Π_k [cos(2 g_k t) + i (|α_k|² − |β_k|²) sin(2 g_k t)]`,
//! evaluated in the log domain so baths of thousands of spins do not underflow.
//! Time evolution follows `e^{-iHt/ħ}`; with that sign the needle coherence
//! `⟨+|ρ|−⟩` equals `a b* z(t)*` and `⟨−|ρ|+⟩ = a* b z(t)`.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::density::{CMatrix, DensityMatrix};
use crate::error::{param, Result};
use crate::logc::{log_product, LogComplex};
use crate::types::{Bath, BathSpin, QubitAmplitudes};

/// Needle, bath and elapsed time.
#[derive(Debug, Clone)]
pub struct ZurekState {
    pub system: QubitAmplitudes,
    pub bath: Bath,
    pub t: f64,
}

impl ZurekState {
    pub fn reduced_density(&self) -> Result<DensityMatrix> {
        reduced_density(&self.system, &self.bath, self.t)
    }
}

/// Single-spin factor `cos(2gt) + i p sin(2gt)`.
pub fn spin_factor(spin: &BathSpin, t: f64) -> Complex64 {
    let (s, c) = (2.0 * spin.coupling() * t).sin_cos();
    Complex64::new(c, spin.polarization() * s)
}

/// The coherence factor z(t) as a log-domain product. `|z| ≤ 1` always.
pub fn z_factor(bath: &Bath, t: f64) -> LogComplex {
    log_product(bath.iter().map(|s| spin_factor(s, t)))
}

/// Needle reduced density matrix after time `t`.
pub fn reduced_density(system: &QubitAmplitudes, bath: &Bath, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return param(format!("time must be >= 0, got {t}"));
    }
    let z = z_factor(bath, t).to_complex();
    let (a, b) = (system.a(), system.b());
    let off = a * b.conj() * z.conj();
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(a.norm_sqr(), 0.0), off, off.conj(), Complex64::new(b.norm_sqr(), 0.0)],
    );
    // |z| ≤ 1 keeps this PSD: det = |a|²|b|²(1 − |z|²) ≥ 0
    Ok(DensityMatrix::from_trusted(m))
}

/// Result of scanning |z| over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RevivalReport {
    pub scan_times: Vec<f64>,
    /// `ln|z|` at each grid point.
    pub log_abs_z: Vec<f64>,
    /// Phase of z at each grid point.
    pub phase: Vec<f64>,
    /// Grid points that are strict local maxima above the floor: `(t, ln|z|)`.
    pub peaks: Vec<(f64, f64)>,
    /// `ln 2^{-N/2}`.
    pub log_floor: f64,
}

impl RevivalReport {
    pub fn z_magnitudes(&self) -> Vec<f64> {
        self.log_abs_z.iter().map(|l| l.exp()).collect()
    }

    pub fn floor(&self) -> f64 {
        self.log_floor.exp()
    }
}

/// Evaluates |z| on a sorted nonnegative grid and picks out revival peaks.
///
/// A peak is an interior grid point strictly above both neighbours and above
/// the interference floor `2^{-N/2}`. Points are evaluated in parallel; each
/// is independent, so the result does not depend on scheduling.
pub fn revival_scan(bath: &Bath, t_grid: &[f64]) -> Result<RevivalReport> {
    if t_grid.is_empty() {
        return param("time grid is empty");
    }
    if t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return param("time grid must be finite and nonnegative");
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return param("time grid must be sorted");
    }
    let values: Vec<LogComplex> = t_grid.par_iter().map(|&t| z_factor(bath, t)).collect();
    Ok(assemble_report(bath.len(), t_grid, &values))
}

pub(crate) fn assemble_report(n: usize, t_grid: &[f64], values: &[LogComplex]) -> RevivalReport {
    let log_abs_z: Vec<f64> = values.iter().map(|z| z.log_mag).collect();
    let phase: Vec<f64> = values.iter().map(|z| z.phase).collect();
    let log_floor = interference_floor(n);
    let peaks = (1..t_grid.len().saturating_sub(1))
        .filter(|&i| log_abs_z[i] > log_abs_z[i - 1] && log_abs_z[i] > log_abs_z[i + 1] && log_abs_z[i] > log_floor)
        .map(|i| (t_grid[i], log_abs_z[i]))
        .collect();
    RevivalReport { scan_times: t_grid.to_vec(), log_abs_z, phase, peaks, log_floor }
}

/// `ln(N!/Ω)`: log of the revival time scale, proportionality constant taken as 1.
pub fn revival_time_log(n: u64, mean_freq: f64) -> Result<f64> {
    if n == 0 {
        return param("revival_time_log needs n >= 1");
    }
    if !(mean_freq > 0.0) {
        return param(format!("mean frequency must be > 0, got {mean_freq}"));
    }
    Ok(ln_factorial(n as f64) - mean_freq.ln())
}

/// `ln(n!)` through the log-gamma function.
pub fn ln_factorial(n: f64) -> f64 {
    ln_gamma(n + 1.0)
}

/// `ln 2^{-N/2}`, the typical size of the needle coherence between revivals.
pub fn interference_floor(n: usize) -> f64 {
    -(n as f64) * 0.5 * std::f64::consts::LN_2
}

/// Particle count needed when the clock-error exponent shrinks from 1/3 to ε:
/// `ceil(N₀ / (3ε))`.
pub fn suppression_particle_count(epsilon: f64, n0: u64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 1.0 / 3.0) {
        return param(format!("epsilon must lie in (0, 1/3], got {epsilon}"));
    }
    if n0 == 0 {
        return param("n0 must be >= 1");
    }
    Ok((n0 as f64 / (3.0 * epsilon)).ceil() as u64)
}
