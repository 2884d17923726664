//! Needle and environment spins in a cavity with a uniform field.
//!
//! Each environment spin flies past the needle once, during a time τ, with a
//! constant spin-spin coupling f_k. The pass Hamiltonian on (needle, spin k),
//! basis `++, +−, −+, −−`, is
//!
//! ```text
//! [ f+b₊   0      0     0    ]
//! [ 0     −f+b₋   2f    0    ]
//! [ 0      2f    −f−b₋  0    ]
//! [ 0      0      0     f−b₊ ]
//! ```
//!
//! with `b± = B(γ₁ ± γ₂)/ħ`, so every entry is an angular frequency.
//!
//! The branch states `|A⟩ = Π_k A_k` and `|B⟩ = Π_k B_k` regroup a single pass
//! exactly, but for N > 1 they drop needle-flip cross terms of order
//! `2f/Ω`. The needle density matrix is therefore computed by the exact
//! overlap recursion in [`crate::chain`]; the product-form quantities stay
//! available for the weak-coupling analysis.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::chain::{self, PassMap, SpinOperator};
use crate::density::{CMatrix, DensityMatrix};
use crate::error::{param, Error, Result};
use crate::logc::{log_product, LogComplex};
use crate::types::{Bath, BathSpin, PhysicalScenario, QubitAmplitudes};

/// Default bound on `f_k / |b₋|` for the weak-coupling formulas.
pub const WEAK_COUPLING_RATIO: f64 = 0.1;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Parameters of one pass, all frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassParams {
    f: f64,
    b_plus: f64,
    b_minus: f64,
    tau: f64,
}

impl PassParams {
    /// From angular frequencies: coupling `f`, `b₊ = BΓ₊/ħ`, `b₋ = BΓ₋/ħ`.
    pub fn from_frequencies(f: f64, b_plus: f64, b_minus: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("f", f), ("b_plus", b_plus), ("b_minus", b_minus), ("tau", tau)] {
            if !v.is_finite() {
                return param(format!("{name} must be finite, got {v}"));
            }
        }
        if f < 0.0 {
            return param(format!("coupling f must be >= 0, got {f}"));
        }
        if tau < 0.0 {
            return param(format!("tau must be >= 0, got {tau}"));
        }
        Ok(PassParams { f, b_plus, b_minus, tau })
    }

    /// From SI field and moments; magnetic energies are divided by ħ here.
    pub fn from_physical(f: f64, b_field: f64, gamma1: f64, gamma2: f64, tau: f64, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return param(format!("hbar must be > 0, got {hbar}"));
        }
        Self::from_frequencies(f, b_field * (gamma1 + gamma2) / hbar, b_field * (gamma1 - gamma2) / hbar, tau)
    }

    pub fn from_scenario(s: &PhysicalScenario, f: f64) -> Result<Self> {
        Self::from_physical(f, s.b_field, s.gamma1, s.gamma2, s.tau, s.constants.hbar)
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn b_plus(&self) -> f64 {
        self.b_plus
    }

    pub fn b_minus(&self) -> f64 {
        self.b_minus
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `Ω = √(4f² + b₋²)`.
    pub fn omega(&self) -> f64 {
        (4.0 * self.f * self.f + self.b_minus * self.b_minus).sqrt()
    }

    /// `f / |b₋|`; infinite when the field term vanishes.
    pub fn coupling_ratio(&self) -> f64 {
        self.f / self.b_minus.abs()
    }

    pub fn with_coupling(&self, f: f64) -> Result<Self> {
        Self::from_frequencies(f, self.b_plus, self.b_minus, self.tau)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::from_frequencies(self.f, self.b_plus, self.b_minus, tau)
    }

    /// Diagonal (field-only) energies of the four pair states, used as the
    /// clock channel's Bohr levels.
    pub fn field_energies(&self) -> [f64; 4] {
        [self.b_plus, self.b_minus, -self.b_minus, -self.b_plus]
    }
}

/// The pass Hamiltonian in rad/s.
pub fn pass_hamiltonian(p: &PassParams) -> Matrix4<f64> {
    let (f, bp, bm) = (p.f, p.b_plus, p.b_minus);
    Matrix4::new(f + bp, 0.0, 0.0, 0.0, 0.0, -f + bm, 2.0 * f, 0.0, 0.0, 2.0 * f, -f - bm, 0.0, 0.0, 0.0, 0.0, f - bp)
}

/// `e^{-iHτ}` in closed form.
pub fn pass_propagator(p: &PassParams) -> [[Complex64; 4]; 4] {
    let (f, bp, bm, tau) = (p.f, p.b_plus, p.b_minus, p.tau);
    let omega = p.omega();
    let c = (omega * tau).cos();
    // sin(Ωτ)/Ω, finite as Ω → 0
    let sn = if omega == 0.0 { tau } else { (omega * tau).sin() / omega };
    let front = Complex64::from_polar(1.0, f * tau);
    let zero = Complex64::new(0.0, 0.0);
    let mix = front * (-I * 2.0 * f * sn);
    [
        [Complex64::from_polar(1.0, -(f + bp) * tau), zero, zero, zero],
        [zero, front * (c - I * bm * sn), mix, zero],
        [zero, mix, front * (c + I * bm * sn), zero],
        [zero, zero, zero, Complex64::from_polar(1.0, -(f - bp) * tau)],
    ]
}

/// Amplitudes of `R|++⟩ + T|+−⟩ + U|−+⟩ + V|−−⟩` after one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    pub u: Complex64,
    pub v: Complex64,
}

impl PassCoefficients {
    pub fn initial(sys: &QubitAmplitudes, spin: &BathSpin) -> Self {
        let (a, b, al, be) = (sys.a(), sys.b(), spin.alpha(), spin.beta());
        PassCoefficients { r: a * al, t: a * be, u: b * al, v: b * be }
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.r, self.t, self.u, self.v]
    }

    pub fn from_array(x: [Complex64; 4]) -> Self {
        PassCoefficients { r: x[0], t: x[1], u: x[2], v: x[3] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &PassCoefficients) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// One pass of `spin` past the needle in closed form. Uses the coupling
/// stored in `p`; the spin contributes only its state.
pub fn single_pass_closed(sys: &QubitAmplitudes, spin: &BathSpin, p: &PassParams) -> PassCoefficients {
    let x0 = PassCoefficients::initial(sys, spin).as_array();
    let u = pass_propagator(p);
    PassCoefficients::from_array(std::array::from_fn(|i| (0..4).map(|j| u[i][j] * x0[j]).sum()))
}

/// Fixed-step classical RK4 integration of `i ẋ = H x` over `[0, τ]`.
pub fn single_pass_numeric(
    sys: &QubitAmplitudes,
    spin: &BathSpin,
    p: &PassParams,
    steps: usize,
) -> Result<PassCoefficients> {
    if steps < 100 {
        return param(format!("integration needs at least 100 steps, got {steps}"));
    }
    let h = pass_hamiltonian(p);
    let rhs = |x: &[Complex64; 4]| -> [Complex64; 4] {
        std::array::from_fn(|i| -I * (0..4).map(|j| x[j] * h[(i, j)]).sum::<Complex64>())
    };
    let dt = p.tau / steps as f64;
    let mut x = PassCoefficients::initial(sys, spin).as_array();
    let axpy =
        |x: &[Complex64; 4], k: &[Complex64; 4], s: f64| -> [Complex64; 4] { std::array::from_fn(|i| x[i] + k[i] * s) };
    for _ in 0..steps {
        let k1 = rhs(&x);
        let k2 = rhs(&axpy(&x, &k1, dt / 2.0));
        let k3 = rhs(&axpy(&x, &k2, dt / 2.0));
        let k4 = rhs(&axpy(&x, &k3, dt));
        x = std::array::from_fn(|i| x[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0));
    }
    Ok(PassCoefficients::from_array(x))
}

/// Per-pass action of every bath spin, each with its own coupling f_k.
pub fn pass_maps(bath: &Bath, p_common: &PassParams) -> Result<Vec<PassMap>> {
    bath.iter()
        .map(|s| {
            let p = p_common.with_coupling(s.coupling())?;
            Ok(PassMap::from_propagator(&pass_propagator(&p), s.alpha(), s.beta()))
        })
        .collect()
}

/// Per-spin factors of the branch states `|A⟩ = ⊗_k (A⁺_k|+⟩ + A⁻_k|−⟩)` and
/// likewise `|B⟩`, together with the exact pass maps they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchVectors {
    pub a: Vec<[Complex64; 2]>,
    pub b: Vec<[Complex64; 2]>,
    pub maps: Vec<PassMap>,
}

impl BranchVectors {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Builds the branch factors `A_k = (R_k/a, T_k/a)`, `B_k = (U_k/b, V_k/b)`.
pub fn branch_vectors(sys: &QubitAmplitudes, bath: &Bath, p_common: &PassParams) -> Result<BranchVectors> {
    let (a, b) = (sys.a(), sys.b());
    if a.norm_sqr() == 0.0 {
        return Err(Error::DegenerateBranch { which: "a" });
    }
    if b.norm_sqr() == 0.0 {
        return Err(Error::DegenerateBranch { which: "b" });
    }
    let maps = pass_maps(bath, p_common)?;
    let (ba, ab) = (b / a, a / b);
    let av = maps.iter().map(|m| std::array::from_fn(|e| m.w[0][0][e] + ba * m.w[0][1][e])).collect();
    let bv = maps.iter().map(|m| std::array::from_fn(|e| m.w[1][1][e] + ab * m.w[1][0][e])).collect();
    Ok(BranchVectors { a: av, b: bv, maps })
}

fn dot(x: &[Complex64; 2], y: &[Complex64; 2]) -> Complex64 {
    x[0].conj() * y[0] + x[1].conj() * y[1]
}

/// `ln ⟨A|A⟩` from the product of per-spin norms.
pub fn inner_aa(bv: &BranchVectors) -> f64 {
    bv.a.iter().map(|x| dot(x, x).re.ln()).sum()
}

/// `ln ⟨B|B⟩`.
pub fn inner_bb(bv: &BranchVectors) -> f64 {
    bv.b.iter().map(|x| dot(x, x).re.ln()).sum()
}

/// `⟨A|B⟩ = Π_k ⟨A_k|B_k⟩`.
pub fn inner_ab(bv: &BranchVectors) -> LogComplex {
    log_product(bv.a.iter().zip(&bv.b).map(|(x, y)| dot(x, y)))
}

/// Errors unless every `f_k / |b₋|` is below `max_ratio`.
pub fn check_weak_coupling(bath: &Bath, p: &PassParams, max_ratio: f64) -> Result<()> {
    let worst = bath.max_coupling() / p.b_minus.abs();
    if !(worst < max_ratio) {
        return Err(Error::Regime(format!("max f_k/|B(g1-g2)/hbar| = {worst:.3e} is not below {max_ratio}")));
    }
    Ok(())
}

/// Leading weak-coupling form `Π_k e^{2iΩ_kτ} [cos 2f_kτ + i(|α_k|²−|β_k|²) sin 2f_kτ]`.
pub fn inner_ab_approx(bath: &Bath, p: &PassParams) -> Result<LogComplex> {
    inner_ab_approx_with(bath, p, WEAK_COUPLING_RATIO)
}

pub fn inner_ab_approx_with(bath: &Bath, p: &PassParams, max_ratio: f64) -> Result<LogComplex> {
    check_weak_coupling(bath, p, max_ratio)?;
    let tau = p.tau;
    Ok(log_product(bath.iter().map(|s| {
        let omega = (4.0 * s.coupling() * s.coupling() + p.b_minus * p.b_minus).sqrt();
        let (sn, cs) = (2.0 * s.coupling() * tau).sin_cos();
        Complex64::from_polar(1.0, 2.0 * omega * tau) * Complex64::new(cs, s.polarization() * sn)
    })))
}

/// The branch-state density matrix `[[|a|²⟨A|A⟩, ab*⟨B|A⟩], [a*b⟨A|B⟩, |b|²⟨B|B⟩]]`.
/// Exact for one pass; for more it is only the weak-coupling approximation
/// and need not have unit trace.
pub fn product_form_density(sys: &QubitAmplitudes, bv: &BranchVectors) -> CMatrix {
    let (a, b) = (sys.a(), sys.b());
    let ab = inner_ab(bv).to_complex();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(a.norm_sqr() * inner_aa(bv).exp(), 0.0),
            a * b.conj() * ab.conj(),
            a.conj() * b * ab,
            Complex64::new(b.norm_sqr() * inner_bb(bv).exp(), 0.0),
        ],
    )
}

/// `a* b ⟨A|B⟩`, the product-form needle coherence, kept in the log domain.
pub fn product_form_coherence(sys: &QubitAmplitudes, bv: &BranchVectors) -> LogComplex {
    inner_ab(bv) * (sys.a().conj() * sys.b())
}

/// Exact needle density matrix after all passes in `bv`.
pub fn reduced_density_needle(sys: &QubitAmplitudes, bv: &BranchVectors) -> Result<DensityMatrix> {
    overlaps_to_density(chain::propagate(sys.as_array(), &bv.maps, SpinOperator::Identity, None))
}

/// Exact needle density matrix, also valid when `a` or `b` vanishes.
pub fn reduced_density_exact(sys: &QubitAmplitudes, bath: &Bath, p_common: &PassParams) -> Result<DensityMatrix> {
    let maps = pass_maps(bath, p_common)?;
    overlaps_to_density(chain::propagate(sys.as_array(), &maps, SpinOperator::Identity, None))
}

/// Exact needle coherence `⟨+|ρ|−⟩` in the log domain.
pub fn exact_coherence(sys: &QubitAmplitudes, bath: &Bath, p_common: &PassParams) -> Result<LogComplex> {
    let maps = pass_maps(bath, p_common)?;
    Ok(chain::propagate(sys.as_array(), &maps, SpinOperator::Identity, None)[0][1])
}

pub(crate) fn overlaps_to_density(r: chain::Overlaps) -> Result<DensityMatrix> {
    let m = CMatrix::from_fn(2, 2, |i, j| r[i][j].to_complex());
    DensityMatrix::new(m)
}

/// `∫ f dt = (2μγ₁γ₂/(ħ v d²)) / √(1 + d²/L²)` for a straight flight past the needle.
pub fn integrated_coupling(s: &PhysicalScenario) -> f64 {
    let c = &s.constants;
    2.0 * c.mu0 * s.gamma1 * s.gamma2 / (c.hbar * s.v * s.d * s.d) / (1.0 + (s.d / s.half_length).powi(2)).sqrt()
}
