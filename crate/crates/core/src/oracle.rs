//! Brute-force state-vector simulator over the full `2^(N+1)` space.
//!
//! Basis index convention: the needle is the most significant bit, then the
//! environment spins in bath order; bit value 0 is `|+⟩`. Everything here is
//! built without the product structure the analytic modules rely on.

use num_complex::Complex64;

use crate::cavity::PassParams;
use crate::density::{CMatrix, DensityMatrix};
use crate::error::{param, Error, Result};
use crate::types::{Bath, QubitAmplitudes};

/// Largest environment the oracle accepts.
pub const MAX_ENV_SPINS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_env: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n_env: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_capacity(n_env)?;
        if amps.len() != 1 << (n_env + 1) {
            return param(format!("{} amplitudes for {} environment spins", amps.len(), n_env));
        }
        let st = DenseState { n_env, amps };
        if (st.norm_sqr() - 1.0).abs() > 1e-10 {
            return param(format!("state norm^2 = {}, expected 1", st.norm_sqr()));
        }
        Ok(st)
    }

    pub fn n_env(&self) -> usize {
        self.n_env
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|Ψ⟩⟨Ψ|` as a full density matrix.
    pub fn density(&self) -> DensityMatrix {
        let n = self.amps.len();
        DensityMatrix::from_trusted(CMatrix::from_fn(n, n, |i, j| self.amps[i] * self.amps[j].conj()))
    }

    /// Needle reduced matrix by direct contraction over the environment index.
    pub fn needle_density(&self) -> DensityMatrix {
        let half = self.amps.len() / 2;
        let (up, down) = self.amps.split_at(half);
        let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(p, q)| p * q.conj()).sum() };
        DensityMatrix::from_trusted(CMatrix::from_row_slice(
            2,
            2,
            &[dot(up, up), dot(up, down), dot(down, up), dot(down, down)],
        ))
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_ENV_SPINS {
        return Err(Error::Capacity { n, max: MAX_ENV_SPINS });
    }
    Ok(())
}

fn check_bath(st: &DenseState, bath: &Bath) -> Result<()> {
    if bath.len() != st.n_env {
        return param(format!("bath has {} spins, state has {}", bath.len(), st.n_env));
    }
    Ok(())
}

/// Kronecker product of the needle and every bath spin, needle first.
pub fn dense_from_product(sys: &QubitAmplitudes, bath: &Bath) -> Result<DenseState> {
    check_capacity(bath.len())?;
    let mut amps = vec![sys.a(), sys.b()];
    for s in bath {
        amps = amps.iter().flat_map(|&x| [x * s.alpha(), x * s.beta()]).collect();
    }
    Ok(DenseState { n_env: bath.len(), amps })
}

fn spin_sign(index: usize, bit: usize) -> f64 {
    if index >> bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Evolves under `H = Σ_k g_k σ_z ⊗ σ_z^k` for time `t` (negative `t` runs
/// backwards). H is diagonal, so each basis state only picks up a phase.
pub fn dense_evolve_zurek(st: &DenseState, bath: &Bath, t: f64) -> Result<DenseState> {
    check_bath(st, bath)?;
    let n = st.n_env;
    let amps = st
        .amps
        .iter()
        .enumerate()
        .map(|(idx, &x)| {
            let s0 = spin_sign(idx, n);
            let energy: f64 =
                bath.iter().enumerate().map(|(k, sp)| sp.coupling() * s0 * spin_sign(idx, n - 1 - k)).sum();
            x * Complex64::from_polar(1.0, -energy * t)
        })
        .collect();
    Ok(DenseState { n_env: n, amps })
}

/// `exp(-iHτ)` for the pass Hamiltonian, assembled from its eigenvectors.
///
/// The outer states are eigenvectors already. The central block
/// `-f·1 + [[b₋, 2f], [2f, −b₋]]` has eigenvectors `(cos φ, sin φ)` and
/// `(−sin φ, cos φ)` with `tan 2φ = 2f/b₋` and eigenvalues `−f ± Ω`.
pub fn pass_propagator_eigen(p: &PassParams) -> [[Complex64; 4]; 4] {
    let (f, bp, bm, tau) = (p.f(), p.b_plus(), p.b_minus(), p.tau());
    let omega = (4.0 * f * f + bm * bm).sqrt();
    let phi = 0.5 * (2.0 * f).atan2(bm);
    let (s, c) = phi.sin_cos();
    let vecs = [[c, s], [-s, c]];
    let vals = [-f + omega, -f - omega];
    let zero = Complex64::new(0.0, 0.0);
    let mut u = [[zero; 4]; 4];
    u[0][0] = Complex64::from_polar(1.0, -(f + bp) * tau);
    u[3][3] = Complex64::from_polar(1.0, -(f - bp) * tau);
    for (v, lam) in vecs.iter().zip(vals) {
        let ph = Complex64::from_polar(1.0, -lam * tau);
        for i in 0..2 {
            for j in 0..2 {
                u[1 + i][1 + j] += ph * v[i] * v[j];
            }
        }
    }
    u
}

/// Lets every bath spin pass once, in order, each with its own coupling.
pub fn dense_evolve_cavity(st: &DenseState, bath: &Bath, p_common: &PassParams) -> Result<DenseState> {
    let mut cur = st.clone();
    for k in 0..bath.len() {
        cur = dense_single_pass(&cur, bath, k, p_common)?;
    }
    Ok(cur)
}

/// Applies the pass of spin `k` alone.
pub fn dense_single_pass(st: &DenseState, bath: &Bath, k: usize, p_common: &PassParams) -> Result<DenseState> {
    check_bath(st, bath)?;
    if k >= bath.len() {
        return param(format!("spin index {k} out of range"));
    }
    let n = st.n_env;
    let u = pass_propagator_eigen(&p_common.with_coupling(bath.spins()[k].coupling())?);
    let needle_bit = 1usize << n;
    let spin_bit = 1usize << (n - 1 - k);
    let mut amps = st.amps.clone();
    for base in 0..st.amps.len() {
        if base & (needle_bit | spin_bit) != 0 {
            continue;
        }
        let idx = [base, base | spin_bit, base | needle_bit, base | needle_bit | spin_bit];
        let x: [Complex64; 4] = std::array::from_fn(|i| st.amps[idx[i]]);
        for (i, &target) in idx.iter().enumerate() {
            amps[target] = (0..4).map(|j| u[i][j] * x[j]).sum();
        }
    }
    Ok(DenseState { n_env: n, amps })
}

/// `⟨Ψ| σ_x ⊗ … ⊗ σ_x |Ψ⟩`: the all-spin flip maps index i to its complement.
pub fn dense_m_expect(st: &DenseState) -> f64 {
    let mask = st.amps.len() - 1;
    st.amps.iter().enumerate().map(|(i, x)| (x.conj() * st.amps[i ^ mask]).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::pass_propagator;
    use crate::sampling::{rng_from_seed, sample_bath, CouplingLaw};
    use crate::types::BathSpin;
    use rand::Rng;

    #[test]
    fn product_assembly() {
        let spin = BathSpin::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0).unwrap();
        let st = dense_from_product(&QubitAmplitudes::up(), &Bath::uniform(1, spin).unwrap()).unwrap();
        assert_eq!(st.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(st.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn product_assembly_two_orders() {
        let mut rng = rng_from_seed(5);
        let sys = crate::sampling::haar_qubit(&mut rng);
        let bath = sample_bath(3, CouplingLaw::Fixed(1.0), 6).unwrap();
        let st = dense_from_product(&sys, &bath).unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
        // assemble right-to-left through explicit bit decoding
        let alt: Vec<Complex64> = (0..16)
            .map(|i: usize| {
                let needle = if i >> 3 & 1 == 0 { sys.a() } else { sys.b() };
                (0..3).fold(needle, |acc, k| {
                    let s = bath.spins()[k];
                    acc * if i >> (2 - k) & 1 == 0 { s.alpha() } else { s.beta() }
                })
            })
            .collect();
        let overlap: Complex64 = alt.iter().zip(st.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        assert!((overlap - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn capacity() {
        let bath = sample_bath(13, CouplingLaw::Fixed(1.0), 1).unwrap();
        assert_eq!(dense_from_product(&QubitAmplitudes::up(), &bath), Err(Error::Capacity { n: 13, max: 12 }));
    }

    #[test]
    fn zurek_time_reversal() {
        let bath = sample_bath(5, CouplingLaw::Uniform(0.5, 2.0), 3).unwrap();
        let st = dense_from_product(&QubitAmplitudes::real(0.6, 0.8).unwrap(), &bath).unwrap();
        assert_eq!(dense_evolve_zurek(&st, &bath, 0.0).unwrap(), st);
        let fwd = dense_evolve_zurek(&st, &bath, 1.7).unwrap();
        let back = dense_evolve_zurek(&fwd, &bath, -1.7).unwrap();
        let dev = back.amplitudes().iter().zip(st.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
        assert!((fwd.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_propagator_matches_closed_form() {
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let p = PassParams::from_frequencies(
                rng.random_range(0.0..5.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(0.0..3.0),
            )
            .unwrap();
            let (a, b) = (pass_propagator_eigen(&p), pass_propagator(&p));
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a[i][j] - b[i][j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn m_expect_basics() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let up = BathSpin::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 1.0).unwrap();
        let st = dense_from_product(&QubitAmplitudes::up(), &Bath::uniform(3, up).unwrap()).unwrap();
        assert_eq!(dense_m_expect(&st), 0.0);
        let px = BathSpin::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0), 1.0).unwrap();
        let st = dense_from_product(&QubitAmplitudes::plus_x(), &Bath::uniform(3, px).unwrap()).unwrap();
        assert!((dense_m_expect(&st) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_cavity_is_zeeman_phase() {
        let bath = sample_bath(3, CouplingLaw::Fixed(0.0), 2).unwrap();
        let sys = QubitAmplitudes::real(0.6, 0.8).unwrap();
        let p = PassParams::from_frequencies(0.0, 3.0, 1.0, 0.7).unwrap();
        let st = dense_from_product(&sys, &bath).unwrap();
        let out = dense_evolve_cavity(&st, &bath, &p).unwrap();
        for (i, (x, y)) in out.amplitudes().iter().zip(st.amplitudes()).enumerate() {
            let s0 = spin_sign(i, 3);
            let e: f64 = (0..3)
                .map(|k| {
                    let sk = spin_sign(i, 2 - k);
                    // diagonal of the pass Hamiltonian at f = 0
                    if s0 == sk {
                        s0 * 3.0
                    } else {
                        s0 * 1.0
                    }
                })
                .sum();
            assert!((x - y * Complex64::from_polar(1.0, -e * 0.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn needle_density_matches_partial_trace() {
        let bath = sample_bath(4, CouplingLaw::Uniform(0.5, 2.0), 3).unwrap();
        let st = dense_from_product(&QubitAmplitudes::real(0.6, 0.8).unwrap(), &bath).unwrap();
        let st = dense_evolve_zurek(&st, &bath, 0.9).unwrap();
        let pt = crate::density::partial_trace(&st.density(), &[0], &[2, 16]).unwrap();
        assert!(pt.max_abs_diff(&st.needle_density()) < 1e-14);
    }
}
