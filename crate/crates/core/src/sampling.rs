//! Seeded random baths.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::types::{Bath, BathSpin, QubitAmplitudes};

/// How per-spin couplings (rad/s) are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingLaw {
    Fixed(f64),
    /// Uniform on `[lo, hi]`.
    Uniform(f64, f64),
}

impl CouplingLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingLaw::Fixed(g) if g >= 0.0 && g.is_finite() => Ok(()),
            CouplingLaw::Fixed(g) => param(format!("fixed coupling must be finite and >= 0, got {g}")),
            CouplingLaw::Uniform(lo, hi) if lo > 0.0 && hi >= lo && hi.is_finite() => Ok(()),
            CouplingLaw::Uniform(lo, hi) => {
                param(format!("uniform coupling range needs 0 < lo <= hi, got [{lo}, {hi}]"))
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CouplingLaw::Fixed(g) => g,
            CouplingLaw::Uniform(lo, hi) if lo == hi => lo,
            CouplingLaw::Uniform(lo, hi) => rng.random_range(lo..=hi),
        }
    }
}

/// How the environment spin states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinStateLaw {
    /// Haar-uniform pure qubit states.
    #[default]
    Haar,
    /// `|α| = |β| = 1/√2` with independent uniform phases.
    Balanced,
    /// `α = β = 1/√2` for every spin.
    Symmetric,
}

/// Haar-random pure qubit: four standard normals, normalized.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> QubitAmplitudes {
    loop {
        let x: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let a = Complex64::new(x[0], x[1]);
        let b = Complex64::new(x[2], x[3]);
        if let Ok(q) = QubitAmplitudes::normalized(a, b) {
            return q;
        }
    }
}

fn draw_state<R: Rng + ?Sized>(law: SpinStateLaw, rng: &mut R) -> QubitAmplitudes {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match law {
        SpinStateLaw::Haar => haar_qubit(rng),
        SpinStateLaw::Balanced => {
            let pa: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let pb: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            QubitAmplitudes::normalized(Complex64::from_polar(h, pa), Complex64::from_polar(h, pb))
                .expect("balanced state is normalizable")
        }
        SpinStateLaw::Symmetric => QubitAmplitudes::plus_x(),
    }
}

/// Draws a bath from an explicit generator.
pub fn sample_bath_with<R: Rng + ?Sized>(
    n: usize,
    coupling: CouplingLaw,
    states: SpinStateLaw,
    rng: &mut R,
) -> Result<Bath> {
    if n == 0 {
        return param("bath size must be >= 1");
    }
    coupling.validate()?;
    let spins = (0..n)
        .map(|_| {
            let st = draw_state(states, rng);
            let g = coupling.draw(rng);
            BathSpin::from_state(st, g)
        })
        .collect::<Result<Vec<_>>>()?;
    Bath::new(spins)
}

/// Haar-random bath of `n` spins, deterministic in `seed`.
pub fn sample_bath(n: usize, coupling: CouplingLaw, seed: u64) -> Result<Bath> {
    sample_bath_with(n, coupling, SpinStateLaw::Haar, &mut rng_from_seed(seed))
}

pub fn sample_bath_states(n: usize, coupling: CouplingLaw, states: SpinStateLaw, seed: u64) -> Result<Bath> {
    sample_bath_with(n, coupling, states, &mut rng_from_seed(seed))
}

/// The generator every seeded entry point uses.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let a = sample_bath(1, CouplingLaw::Fixed(1.0), 7).unwrap();
        let b = sample_bath(1, CouplingLaw::Fixed(1.0), 7).unwrap();
        assert_eq!(a, b);
        let c = sample_bath(1, CouplingLaw::Fixed(1.0), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn haar_mean_population() {
        for seed in [1u64, 2, 3] {
            let bath = sample_bath(10_000, CouplingLaw::Uniform(0.5, 1.5), seed).unwrap();
            let mean = bath.iter().map(|s| s.alpha().norm_sqr()).sum::<f64>() / 10_000.0;
            assert!((0.49..=0.51).contains(&mean), "seed {seed}: mean |alpha|^2 = {mean}");
            assert!(bath.iter().all(|s| (0.5..=1.5).contains(&s.coupling())));
        }
    }

    #[test]
    fn zero_size_rejected() {
        assert!(sample_bath(0, CouplingLaw::Fixed(1.0), 1).is_err());
    }

    #[test]
    fn bad_range_rejected() {
        assert!(sample_bath(3, CouplingLaw::Uniform(2.0, 1.0), 1).is_err());
        assert!(sample_bath(3, CouplingLaw::Uniform(0.0, 1.0), 1).is_err());
        assert!(sample_bath(3, CouplingLaw::Fixed(-1.0), 1).is_err());
    }

    #[test]
    fn every_spin_normalized() {
        let bath = sample_bath_states(500, CouplingLaw::Fixed(1.0), SpinStateLaw::Balanced, 3).unwrap();
        for s in &bath {
            assert!((s.alpha().norm_sqr() + s.beta().norm_sqr() - 1.0).abs() < 1e-12);
            assert!(s.polarization().abs() < 1e-12);
        }
    }
}
