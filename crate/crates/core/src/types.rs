//! Shared domain types. All physical quantities are SI.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub(crate) const NORM_TOL: f64 = 1e-12;

/// Pure state `a|+⟩ + b|−⟩` of the needle (system) spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    a: Complex64,
    b: Complex64,
}

impl QubitAmplitudes {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return param(format!("|a|^2 + |b|^2 = {norm}, expected 1"));
        }
        Ok(QubitAmplitudes { a, b })
    }

    /// Rescales `(a, b)` to unit norm.
    pub fn normalized(a: Complex64, b: Complex64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return param("cannot normalize a zero or non-finite amplitude pair");
        }
        Ok(QubitAmplitudes { a: a / n, b: b / n })
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn up() -> Self {
        QubitAmplitudes { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    pub fn down() -> Self {
        QubitAmplitudes { a: Complex64::new(0.0, 0.0), b: Complex64::new(1.0, 0.0) }
    }

    /// `(|+⟩ + |−⟩)/√2`, the +1 eigenstate of σ_x.
    pub fn plus_x() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        QubitAmplitudes { a: Complex64::new(h, 0.0), b: Complex64::new(h, 0.0) }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.a, self.b]
    }
}

/// One environment spin: its state `α|+⟩ + β|−⟩` and its coupling to the needle
/// (g_k for the ideal model, f_k for the cavity), in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpin {
    alpha: Complex64,
    beta: Complex64,
    coupling: f64,
}

impl BathSpin {
    pub fn new(alpha: Complex64, beta: Complex64, coupling: f64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return param(format!("|alpha|^2 + |beta|^2 = {norm}, expected 1"));
        }
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return param(format!("coupling must be finite and >= 0, got {coupling}"));
        }
        Ok(BathSpin { alpha, beta, coupling })
    }

    pub fn from_state(state: QubitAmplitudes, coupling: f64) -> Result<Self> {
        Self::new(state.a(), state.b(), coupling)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `|α|² − |β|²`, the polarization along z.
    pub fn polarization(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, coupling)
    }
}

/// Ordered environment of `N ≥ 1` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct Bath {
    spins: Vec<BathSpin>,
}

impl Bath {
    pub fn new(spins: Vec<BathSpin>) -> Result<Self> {
        if spins.is_empty() {
            return param("a bath needs at least one spin");
        }
        Ok(Bath { spins })
    }

    /// `n` copies of the same spin.
    pub fn uniform(n: usize, spin: BathSpin) -> Result<Self> {
        Self::new(vec![spin; n])
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[BathSpin] {
        &self.spins
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BathSpin> {
        self.spins.iter()
    }

    pub fn max_coupling(&self) -> f64 {
        self.spins.iter().map(|s| s.coupling).fold(0.0, f64::max)
    }

    pub fn mean_coupling(&self) -> f64 {
        self.spins.iter().map(|s| s.coupling).sum::<f64>() / self.spins.len() as f64
    }

    /// The first `n` spins.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.spins.len() {
            return param(format!("cannot take {n} spins from a bath of {}", self.spins.len()));
        }
        Ok(Bath { spins: self.spins[..n].to_vec() })
    }
}

impl<'a> IntoIterator for &'a Bath {
    type Item = &'a BathSpin;
    type IntoIter = std::slice::Iter<'a, BathSpin>;
    fn into_iter(self) -> Self::IntoIter {
        self.spins.iter()
    }
}

/// Fundamental constants plus the clock-error exponent `a` in δT ~ T_P^(1−a) T^a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// T·m/A
    pub mu0: f64,
    /// s
    pub t_planck: f64,
    pub clock_exponent: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.054571e-34, mu0: 1.256637e-6, t_planck: 5.39e-44, clock_exponent: 1.0 / 3.0 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mu0", self.mu0), ("t_planck", self.t_planck)] {
            if !(v > 0.0) || !v.is_finite() {
                return param(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if !(self.clock_exponent > 0.0 && self.clock_exponent < 1.0) {
            return param(format!("clock_exponent must lie in (0,1), got {}", self.clock_exponent));
        }
        Ok(())
    }
}

/// Particle, field and geometry parameters for the cavity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScenario {
    /// Mass of an environment particle, kg.
    pub mass: f64,
    /// Needle magnetic moment, J/T.
    pub gamma1: f64,
    /// Environment magnetic moment, J/T.
    pub gamma2: f64,
    /// Field, T.
    pub b_field: f64,
    /// Impact parameter, m.
    pub d: f64,
    /// Half cavity length, m.
    pub half_length: f64,
    /// Particle speed, m/s.
    pub v: f64,
    /// Time of flight through the cavity, s.
    pub tau: f64,
    /// Number of environment particles (kept real: 10²³ does not fit a u64).
    pub n: f64,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl PhysicalScenario {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("b_field", self.b_field),
            ("d", self.d),
            ("half_length", self.half_length),
            ("v", self.v),
            ("tau", self.tau),
            ("n", self.n),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return param(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        self.constants.validate()
    }

    pub fn gamma_plus(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    pub fn gamma_minus(&self) -> f64 {
        self.gamma1 - self.gamma2
    }

    /// Total duration with particles entering one at a time, `N·τ`.
    pub fn total_time(&self) -> f64 {
        self.n * self.tau
    }
}
