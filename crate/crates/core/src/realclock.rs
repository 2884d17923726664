//! Decoherence from imperfect clocks.
//!
//! A clock of running time T drifts by `δT ~ T_P^(1−a) T^a`. Averaging the
//! evolution over that uncertainty multiplies the density-matrix element
//! between levels m and n by `exp(−ω_mn² T_P^(2−2a) T^(2a))`, where ω_mn is
//! their Bohr frequency.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::density::{hermiticity_defect, CMatrix, DensityMatrix, DENSITY_TOL};
use crate::error::{param, Result};
use crate::logc::LogComplex;
use crate::types::{Bath, PhysicalConstants};
use crate::zurek::{ln_factorial, z_factor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockChannel {
    /// s
    pub t_planck: f64,
    pub clock_exponent: f64,
}

impl Default for ClockChannel {
    fn default() -> Self {
        Self::from_constants(&PhysicalConstants::default())
    }
}

impl ClockChannel {
    pub fn new(t_planck: f64, clock_exponent: f64) -> Result<Self> {
        let ch = ClockChannel { t_planck, clock_exponent };
        ch.validate()?;
        Ok(ch)
    }

    pub fn from_constants(c: &PhysicalConstants) -> Self {
        ClockChannel { t_planck: c.t_planck, clock_exponent: c.clock_exponent }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_planck > 0.0) || !self.t_planck.is_finite() {
            return param(format!("t_planck must be finite and > 0, got {}", self.t_planck));
        }
        if !(self.clock_exponent > 0.0 && self.clock_exponent < 1.0) {
            return param(format!("clock_exponent must lie in (0,1), got {}", self.clock_exponent));
        }
        Ok(())
    }

    pub fn with_exponent(&self, a: f64) -> Result<Self> {
        Self::new(self.t_planck, a)
    }

    /// `ln(T_P^(2−2a) t^(2a))`; `-inf` at t = 0.
    pub fn log_scale(&self, t: f64) -> f64 {
        let a = self.clock_exponent;
        (2.0 - 2.0 * a) * self.t_planck.ln() + 2.0 * a * t.ln()
    }

    /// `T_P^(2−2a) t^(2a)`, in s².
    pub fn scale(&self, t: f64) -> f64 {
        self.log_scale(t).exp()
    }
}

/// `ω² T_P^(2−2a) t^(2a)`, the exponent removed from an element with Bohr
/// frequency ω after time t.
pub fn damping_exponent(omega: f64, t: f64, ch: &ClockChannel) -> f64 {
    if omega == 0.0 || t == 0.0 {
        return 0.0;
    }
    omega * omega * ch.scale(t)
}

/// `exp(−ω² T_P^(2−2a) t^(2a))`.
pub fn damping_factor(omega: f64, t: f64, ch: &ClockChannel) -> f64 {
    (-damping_exponent(omega, t, ch)).exp()
}

/// Per-pass damping parameter `θ = (3/2) T_P^(2−2a) τ^(2a)`.
pub fn theta(tau: f64, ch: &ClockChannel) -> f64 {
    if tau == 0.0 {
        return 0.0;
    }
    1.5 * ch.scale(tau)
}

/// Bohr frequencies `ω_mn = E_m − E_n` from level energies in rad/s.
pub fn bohr_matrix(energies: &[f64]) -> DMatrix<f64> {
    let n = energies.len();
    DMatrix::from_fn(n, n, |i, j| energies[i] - energies[j])
}

/// Multiplies each element `ρ_mn` by `exp(−ω_mn² θ)`.
pub fn damp_density(rho: &CMatrix, bohr: &DMatrix<f64>, theta_val: f64) -> Result<DensityMatrix> {
    if !(theta_val >= 0.0) {
        return param(format!("theta must be >= 0, got {theta_val}"));
    }
    if rho.shape() != bohr.shape() || !rho.is_square() {
        return param(format!("density shape {:?} does not match Bohr matrix {:?}", rho.shape(), bohr.shape()));
    }
    if hermiticity_defect(rho) > DENSITY_TOL {
        return param("density matrix is not Hermitian");
    }
    let n = rho.nrows();
    for i in 0..n {
        for j in 0..n {
            if (bohr[(i, j)] + bohr[(j, i)]).abs() > 1e-9 * bohr[(i, j)].abs().max(1.0) {
                return param("Bohr matrix must be antisymmetric");
            }
        }
    }
    let out = CMatrix::from_fn(n, n, |i, j| {
        let w = bohr[(i, j)];
        if i == j || w == 0.0 {
            rho[(i, j)]
        } else {
            rho[(i, j)] * (-w * w * theta_val).exp()
        }
    });
    DensityMatrix::new(out)
}

/// Exponent of the clock suppression of z(t): `Σ_k (2g_k)² T_P^(2−2a) t^(2a)`.
pub fn z_damping_exponent(bath: &Bath, t: f64, ch: &ClockChannel) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let s: f64 = bath.iter().map(|sp| (2.0 * sp.coupling()).powi(2)).sum();
    s * ch.scale(t)
}

/// z(t) with the clock suppression applied.
pub fn damped_z(bath: &Bath, t: f64, ch: &ClockChannel) -> LogComplex {
    z_factor(bath, t).damp(z_damping_exponent(bath, t, ch))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevivalFate {
    Killed,
    Survives,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevivalVerdict {
    pub fate: RevivalFate,
    /// `ln(N (2g)² T_P^(2−2a) t_r^(2a))`
    pub log_damping: f64,
    /// `ln((N/2) ln 2)`
    pub log_floor_depth: f64,
    /// `log_damping − log_floor_depth`; positive means killed.
    pub margin: f64,
    /// `ln t_r` with `t_r = N!/g`.
    pub log_revival_time: f64,
}

/// Whether the clock damping accumulated by the first revival (t_r = N!/g)
/// exceeds the depth of the interference floor, `(N/2) ln 2`.
pub fn revival_killed(n: u64, g: f64, ch: &ClockChannel) -> Result<RevivalVerdict> {
    if n == 0 {
        return param("revival_killed needs n >= 1");
    }
    if !(g > 0.0) || !g.is_finite() {
        return param(format!("g must be finite and > 0, got {g}"));
    }
    ch.validate()?;
    let nf = n as f64;
    let log_tr = ln_factorial(nf) - g.ln();
    let a = ch.clock_exponent;
    let log_damping = nf.ln() + 2.0 * (2.0 * g).ln() + (2.0 - 2.0 * a) * ch.t_planck.ln() + 2.0 * a * log_tr;
    let log_floor_depth = (0.5 * nf * std::f64::consts::LN_2).ln();
    let margin = log_damping - log_floor_depth;
    let fate = if margin > 0.0 { RevivalFate::Killed } else { RevivalFate::Survives };
    Ok(RevivalVerdict { fate, log_damping, log_floor_depth, margin, log_revival_time: log_tr })
}

/// Smallest N at which revivals are killed, scanning up to `n_max`.
pub fn critical_particle_count(g: f64, ch: &ClockChannel, n_max: u64) -> Result<Option<u64>> {
    for n in 1..=n_max {
        if revival_killed(n, g, ch)?.fate == RevivalFate::Killed {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_bath, CouplingLaw};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn ch() -> ClockChannel {
        ClockChannel::default()
    }

    #[test]
    fn damping_factor_examples() {
        assert_eq!(damping_factor(0.0, 10.0, &ch()), 1.0);
        assert_eq!(damping_factor(3.0, 0.0, &ch()), 1.0);
        // choose ω so that the exponent is ln 2 at t = 1 s
        let omega = (std::f64::consts::LN_2 / ch().scale(1.0)).sqrt();
        assert!((damping_factor(omega, 1.0, &ch()) - 0.5).abs() < 1e-12);
        let e = damping_exponent(1.0, 1.0, &ch());
        let expect = 5.39e-44f64.powf(4.0 / 3.0);
        assert!((e / expect - 1.0).abs() < 1e-12);
        assert!((e - 2.036e-58).abs() < 0.001e-58);
    }

    #[test]
    fn not_a_semigroup() {
        let omega = (1.0 / ch().scale(1.0)).sqrt();
        let two = damping_factor(omega, 2.0, &ch());
        let sq = damping_factor(omega, 1.0, &ch()).powi(2);
        assert!((two - sq).abs() > 1e-3);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(0.0, &ch()), 0.0);
        let t1 = theta(1.0, &ch());
        assert!((t1 / (1.5 * 5.39e-44f64.powf(4.0 / 3.0)) - 1.0).abs() < 1e-12);
        assert!((t1 - 3.1e-58).abs() < 0.05e-58);
        assert!((theta(8.0, &ch()) / t1 - 4.0).abs() < 1e-12);
    }

    fn four_level(a: f64, b: f64, alpha: f64, beta: f64) -> CMatrix {
        let psi = [a * alpha, a * beta, b * alpha, b * beta];
        CMatrix::from_fn(4, 4, |i, j| Complex64::new(psi[i] * psi[j], 0.0))
    }

    #[test]
    fn damp_density_limits() {
        let rho = four_level(0.6, 0.8, 0.5f64.sqrt(), 0.5f64.sqrt());
        let bohr = bohr_matrix(&[3.0, 1.0, -1.0, -3.0]);
        let same = damp_density(&rho, &bohr, 0.0).unwrap();
        assert!((same.matrix() - &rho).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
        let full = damp_density(&rho, &bohr, f64::INFINITY).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { rho[(i, j)] } else { Complex64::new(0.0, 0.0) };
                assert!((full.get(i, j) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn damp_density_hand_assembled() {
        // needle-spin pair with field energies B(γ₁+γ₂), B(γ₁−γ₂), −B(γ₁−γ₂), −B(γ₁+γ₂)
        let (g1, g2, bf, th) = (1.3, 0.4, 0.7, 0.05);
        let (a, b, h) = (0.6, 0.8, 0.5f64.sqrt());
        let rho = four_level(a, b, h, h);
        let e = [bf * (g1 + g2), bf * (g1 - g2), -bf * (g1 - g2), -bf * (g1 + g2)];
        let out = damp_density(&rho, &bohr_matrix(&e), th).unwrap();
        let d = |w: f64| (-w * w * th).exp();
        let (a2, b2, ab) = (a * a * 0.5, b * b * 0.5, a * b * 0.5);
        #[rustfmt::skip]
        let want = [
            [a2, a2 * d(2.0 * bf * g2), ab * d(2.0 * bf * g1), ab * d(2.0 * bf * (g1 + g2))],
            [a2 * d(2.0 * bf * g2), a2, ab * d(2.0 * bf * (g1 - g2)), ab * d(2.0 * bf * g1)],
            [ab * d(2.0 * bf * g1), ab * d(2.0 * bf * (g1 - g2)), b2, b2 * d(2.0 * bf * g2)],
            [ab * d(2.0 * bf * (g1 + g2)), ab * d(2.0 * bf * g1), b2 * d(2.0 * bf * g2), b2],
        ];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((out.get(i, j).re - w).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn damp_density_rejects_bad_input() {
        let mut rho = four_level(0.6, 0.8, 1.0, 0.0);
        let bohr = bohr_matrix(&[1.0, 0.0, 0.0, -1.0]);
        assert!(damp_density(&rho, &bohr, -1.0).is_err());
        rho[(0, 1)] = Complex64::new(0.0, 0.3);
        assert!(damp_density(&rho, &bohr, 1.0).is_err());
        assert!(damp_density(&four_level(0.6, 0.8, 1.0, 0.0), &bohr_matrix(&[1.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn damped_z_identity() {
        let bath = sample_bath(50, CouplingLaw::Uniform(1e25, 2e25), 4).unwrap();
        assert_eq!(damped_z(&bath, 0.0, &ch()), LogComplex::ONE);
        for t in [1e-3, 0.5, 7.0] {
            let z = z_factor(&bath, t);
            let d = damped_z(&bath, t, &ch());
            let s: f64 = bath.iter().map(|sp| (2.0 * sp.coupling()).powi(2)).sum();
            assert_eq!(d.log_mag, z.log_mag - s * ch().scale(t));
            assert!(d.log_mag < z.log_mag);
        }
    }

    #[test]
    fn revival_verdicts() {
        let v = revival_killed(2, 1.0, &ch()).unwrap();
        assert_eq!(v.fate, RevivalFate::Survives);
        assert!(v.margin < -100.0);
        let star = critical_particle_count(1e9, &ch(), 100_000).unwrap().unwrap();
        assert!((50..=5000).contains(&star), "N* = {star}");
        for n in star..star + 2000 {
            assert_eq!(revival_killed(n, 1e9, &ch()).unwrap().fate, RevivalFate::Killed);
        }
        for n in 1..star {
            assert_eq!(revival_killed(n, 1e9, &ch()).unwrap().fate, RevivalFate::Survives);
        }
        assert!(revival_killed(0, 1.0, &ch()).is_err());
        assert!(revival_killed(3, 0.0, &ch()).is_err());
    }

    #[test]
    fn huge_n_is_finite() {
        let v = revival_killed(10_000_000, 1e9, &ch()).unwrap();
        assert!(v.margin.is_finite());
        assert_eq!(v.fate, RevivalFate::Killed);
    }

    proptest! {
        #[test]
        fn damping_monotone(w in 0.0f64..1e30, t in 0.0f64..1e3, dw in 0.0f64..1e29, dt in 0.0f64..10.0) {
            let c = ch();
            prop_assert!(damping_factor(w + dw, t, &c) <= damping_factor(w, t, &c));
            prop_assert!(damping_factor(w, t + dt, &c) <= damping_factor(w, t, &c));
            let f = damping_factor(w, t, &c);
            prop_assert!(f > 0.0 || w * w * c.scale(t) > 700.0);
            prop_assert!(f <= 1.0);
        }

        #[test]
        fn damped_density_stays_valid(seed in 0u64..500, th in 0.0f64..2.0) {
            let mut rng = crate::sampling::rng_from_seed(seed);
            let psi: Vec<Complex64> = (0..4).map(|_| {
                let q = crate::sampling::haar_qubit(&mut rng);
                q.a()
            }).collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
            let rho = DensityMatrix::from_pure(&psi).unwrap();
            let out = damp_density(rho.matrix(), &bohr_matrix(&[1.7, 0.4, -0.4, -1.7]), th).unwrap();
            prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(out.eigenvalues().iter().all(|&l| l > -1e-10));
        }
    }
}
