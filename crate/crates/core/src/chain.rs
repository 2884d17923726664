//! Exact needle statistics after N sequential cavity passes.
//!
//! After k passes the global state is `Σ_s |s⟩ ⊗ |E_s⟩`. Every quantity the
//! needle observables need is a 2×2 array of environment overlaps
//! `R[s,t] = ⟨E_t| O^{⊗k} |E_s⟩` for a single-spin operator `O`, and each
//! pass maps R linearly through a 4×4 transfer matrix built from that pass's
//! propagator. Entries are kept as [`LogComplex`] so long baths do not
//! underflow.

use num_complex::Complex64;

use crate::logc::LogComplex;

/// Action of one pass on a fresh environment spin, as a needle-indexed map:
/// `w[s_out][s_in][e]` is the amplitude of `|s_out⟩|e⟩` in `U (|s_in⟩ ⊗ |φ_k⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassMap {
    pub w: [[[Complex64; 2]; 2]; 2],
}

impl PassMap {
    /// Contracts the 4×4 pass propagator (basis `++, +−, −+, −−`, needle first)
    /// with the incoming spin state.
    pub fn from_propagator(u: &[[Complex64; 4]; 4], alpha: Complex64, beta: Complex64) -> Self {
        let phi = [alpha, beta];
        let mut w = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
        for (s_out, w_out) in w.iter_mut().enumerate() {
            for (s_in, w_in) in w_out.iter_mut().enumerate() {
                for (e_out, amp) in w_in.iter_mut().enumerate() {
                    *amp = (0..2).map(|e_in| u[2 * s_out + e_out][2 * s_in + e_in] * phi[e_in]).sum();
                }
            }
        }
        PassMap { w }
    }
}

/// Single-spin operator sandwiched by the environment overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOperator {
    Identity,
    /// σ_x: the bit flip of the global observable.
    Flip,
}

/// Per-pass clock dephasing: pair-level energies (rad/s) in the basis
/// `++, +−, −+, −−` and the damping parameter θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassDephasing {
    pub energies: [f64; 4],
    pub theta: f64,
}

impl PassDephasing {
    fn exponent(&self, row: usize, col: usize) -> f64 {
        let w = self.energies[row] - self.energies[col];
        if w == 0.0 {
            0.0
        } else {
            w * w * self.theta
        }
    }
}

pub type Overlaps = [[LogComplex; 2]; 2];

/// Runs the overlap recursion from the needle amplitudes `c` through `maps`.
pub fn propagate(c: [Complex64; 2], maps: &[PassMap], op: SpinOperator, dephasing: Option<PassDephasing>) -> Overlaps {
    let mut r: Overlaps = [[LogComplex::ZERO; 2]; 2];
    for s in 0..2 {
        for t in 0..2 {
            r[s][t] = LogComplex::from_complex(c[s] * c[t].conj());
        }
    }
    for map in maps {
        let transfer = transfer_matrix(map, op, dephasing.as_ref());
        let mut next: Overlaps = [[LogComplex::ZERO; 2]; 2];
        for (s_out, row) in next.iter_mut().enumerate() {
            for (t_out, slot) in row.iter_mut().enumerate() {
                let terms: Vec<LogComplex> = (0..4).map(|j| r[j / 2][j % 2] * transfer[2 * s_out + t_out][j]).collect();
                *slot = LogComplex::sum(&terms);
            }
        }
        r = next;
    }
    r
}

/// `T[(s',t'),(s,t)] = Σ_{e,e''} O[e'',e] D · w[s'][s](e) · conj(w[t'][t](e''))`.
fn transfer_matrix(map: &PassMap, op: SpinOperator, dephasing: Option<&PassDephasing>) -> [[LogComplex; 4]; 4] {
    let mut out = [[LogComplex::ZERO; 4]; 4];
    for s_out in 0..2 {
        for t_out in 0..2 {
            for s_in in 0..2 {
                for t_in in 0..2 {
                    let terms: Vec<LogComplex> = (0..2)
                        .map(|e| {
                            let e2 = match op {
                                SpinOperator::Identity => e,
                                SpinOperator::Flip => 1 - e,
                            };
                            let amp = map.w[s_out][s_in][e] * map.w[t_out][t_in][e2].conj();
                            let damp = dephasing.map_or(0.0, |d| d.exponent(2 * s_out + e, 2 * t_out + e2));
                            LogComplex::from_complex(amp).damp(damp)
                        })
                        .collect();
                    out[2 * s_out + t_out][2 * s_in + t_in] = LogComplex::sum(&terms);
                }
            }
        }
    }
    out
}
