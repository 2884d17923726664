//! Cross-validation of the analytic routines against the dense oracle and
//! the RK4 integrator. Each check reports the largest deviation it saw.

use rand::Rng;
use serde::Serialize;

use crate::cavity::{reduced_density_exact, single_pass_closed, single_pass_numeric, PassParams};
use crate::despagnat::m_expect_unitary;
use crate::error::Result;
use crate::oracle::{dense_evolve_cavity, dense_evolve_zurek, dense_from_product, dense_m_expect, dense_single_pass};
use crate::sampling::{haar_qubit, rng_from_seed, sample_bath_with, CouplingLaw, SpinStateLaw};
use crate::types::{Bath, BathSpin};
use crate::zurek::reduced_density;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Deviation {
    fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        Deviation { name: name.to_string(), max_deviation, tolerance, pass: max_deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Deviation>,
    pub overall: bool,
}

/// Zurek reduced density vs the dense partial trace, N = 1..=n_max.
pub fn zurek_vs_dense(n_max: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        for _ in 0..trials {
            let sys = haar_qubit(&mut rng);
            let bath = sample_bath_with(n, CouplingLaw::Uniform(0.1, 2.0), SpinStateLaw::Haar, &mut rng)?;
            let t = rng.random_range(0.0..20.0);
            let analytic = reduced_density(&sys, &bath, t)?;
            let dense = dense_evolve_zurek(&dense_from_product(&sys, &bath)?, &bath, t)?;
            worst = worst.max(analytic.max_abs_diff(&dense.needle_density()));
        }
    }
    Ok(worst)
}

/// Random weak-coupling pass parameters: `f/Ω ≤ 0.05`.
fn weak_params<R: Rng + ?Sized>(rng: &mut R) -> Result<PassParams> {
    let bm = rng.random_range(20.0..60.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let bp = rng.random_range(-50.0..50.0);
    let tau = rng.random_range(0.1..2.0);
    PassParams::from_frequencies(0.0, bp, bm, tau)
}

fn weak_bath<R: Rng + ?Sized>(n: usize, p: &PassParams, rng: &mut R) -> Result<Bath> {
    let fmax = 0.025 * p.b_minus().abs();
    sample_bath_with(n, CouplingLaw::Uniform(0.2 * fmax, fmax), SpinStateLaw::Haar, rng)
}

/// Needle density and ⟨M̂⟩ from the exact chain vs the dense oracle.
pub fn cavity_vs_dense(n_max: usize, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = rng_from_seed(seed);
    let (mut rho_dev, mut m_dev): (f64, f64) = (0.0, 0.0);
    for n in 1..=n_max {
        for _ in 0..trials {
            let p = weak_params(&mut rng)?;
            let bath = weak_bath(n, &p, &mut rng)?;
            let sys = haar_qubit(&mut rng);
            let dense = dense_evolve_cavity(&dense_from_product(&sys, &bath)?, &bath, &p)?;
            let rho = reduced_density_exact(&sys, &bath, &p)?;
            rho_dev = rho_dev.max(rho.max_abs_diff(&dense.needle_density()));
            m_dev = m_dev.max((m_expect_unitary(&sys, &bath, &p)? - dense_m_expect(&dense)).abs());
        }
    }
    Ok((rho_dev, m_dev))
}

/// Closed-form single pass vs RK4 over `points` random parameter sets.
pub fn closed_vs_numeric(points: usize, steps: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let p = PassParams::from_frequencies(
            rng.random_range(0.0..2.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.1..2.0),
        )?;
        let sys = haar_qubit(&mut rng);
        let spin = BathSpin::from_state(haar_qubit(&mut rng), p.f())?;
        let closed = single_pass_closed(&sys, &spin, &p);
        worst = worst.max(closed.max_abs_diff(&single_pass_numeric(&sys, &spin, &p, steps)?));
    }
    Ok(worst)
}

/// Largest |‖x‖² − 1| of the closed-form pass coefficients.
pub fn pass_norm_defect(points: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let p = PassParams::from_frequencies(
            rng.random_range(0.0..1e3),
            rng.random_range(-1e4..1e4),
            rng.random_range(-1e4..1e4),
            rng.random_range(0.0..10.0),
        )?;
        let sys = haar_qubit(&mut rng);
        let spin = BathSpin::from_state(haar_qubit(&mut rng), p.f())?;
        worst = worst.max((single_pass_closed(&sys, &spin, &p).norm_sqr() - 1.0).abs());
    }
    Ok(worst)
}

/// Drift of the dense ⟨M̂⟩ across the Zurek evolution and, at zero field,
/// across every cavity pass.
pub fn m_conservation(n: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let sys = haar_qubit(&mut rng);
        let bath = sample_bath_with(n, CouplingLaw::Uniform(0.1, 2.0), SpinStateLaw::Haar, &mut rng)?;
        let st = dense_from_product(&sys, &bath)?;
        let m0 = dense_m_expect(&st);
        let t = rng.random_range(0.0..20.0);
        worst = worst.max((dense_m_expect(&dense_evolve_zurek(&st, &bath, t)?) - m0).abs());
        let p = PassParams::from_frequencies(0.0, 0.0, 0.0, rng.random_range(0.1..2.0))?;
        let mut cur = st;
        for k in 0..n {
            cur = dense_single_pass(&cur, &bath, k, &p)?;
            worst = worst.max((dense_m_expect(&cur) - m0).abs());
        }
    }
    Ok(worst)
}

/// The full suite at its default sizes.
pub fn full_suite(seed: u64) -> Result<ValidationReport> {
    let (rho_dev, m_dev) = cavity_vs_dense(6, 20, seed.wrapping_add(1))?;
    let checks = vec![
        Deviation::new("zurek_density_vs_dense", zurek_vs_dense(8, 20, seed)?, 1e-10),
        Deviation::new("cavity_density_vs_dense", rho_dev, 1e-9),
        Deviation::new("cavity_m_vs_dense", m_dev, 1e-9),
        Deviation::new("closed_pass_vs_rk4", closed_vs_numeric(100, 2000, seed.wrapping_add(2))?, 1e-8),
        Deviation::new("pass_norm", pass_norm_defect(1000, seed.wrapping_add(3))?, 1e-10),
        Deviation::new("m_conservation", m_conservation(6, 10, seed.wrapping_add(4))?, 1e-10),
    ];
    let overall = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { checks, overall })
}
