//! The global observable `M̂ = σ_x ⊗ σ_x^1 ⊗ … ⊗ σ_x^N`.
//!
//! Without collapse ⟨M̂⟩ keeps the interference between the two needle
//! branches; after a collapse onto either branch it is exactly zero. Clock
//! damping makes the unitary value exponentially small, so the two cases
//! become hard to tell apart.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{check_weak_coupling, pass_maps, PassParams, WEAK_COUPLING_RATIO};
use crate::chain::{self, PassDephasing, SpinOperator};
use crate::error::{param, Result};
use crate::logc::{log_product, LogComplex};
use crate::realclock::{theta, ClockChannel};
use crate::types::{Bath, PhysicalScenario, QubitAmplitudes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRegime {
    Unitary,
    Collapsed,
    Damped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MExpectation {
    pub value: f64,
    /// `ln|⟨M̂⟩|`, finite even when `value` underflows.
    pub log_abs: f64,
    pub regime: MRegime,
}

fn m_from_overlaps(r: &chain::Overlaps) -> LogComplex {
    r[0][1].add(&r[1][0])
}

/// Exact ⟨M̂⟩ after every bath spin has passed, with optional per-pass
/// clock damping θ. Errors outside the weak-coupling regime.
fn m_exact(sys: &QubitAmplitudes, bath: &Bath, p: &PassParams, theta_val: Option<f64>) -> Result<LogComplex> {
    check_weak_coupling(bath, p, WEAK_COUPLING_RATIO)?;
    let maps = pass_maps(bath, p)?;
    let dephasing = theta_val.map(|theta| PassDephasing { energies: p.field_energies(), theta });
    let r = chain::propagate(sys.as_array(), &maps, SpinOperator::Flip, dephasing);
    Ok(m_from_overlaps(&r))
}

/// ⟨M̂⟩ under unitary evolution.
pub fn m_expect_unitary(sys: &QubitAmplitudes, bath: &Bath, p: &PassParams) -> Result<f64> {
    Ok(m_exact(sys, bath, p, None)?.re())
}

/// ⟨M̂⟩ after a collapse onto either needle branch.
pub fn m_expect_collapsed() -> f64 {
    0.0
}

/// ⟨M̂⟩ with clock damping, θ taken per pass from the channel.
pub fn m_expect_damped(
    sys: &QubitAmplitudes,
    bath: &Bath,
    p: &PassParams,
    n: usize,
    ch: &ClockChannel,
) -> Result<MExpectation> {
    if n != bath.len() {
        return param(format!("n = {n} but the bath has {} spins", bath.len()));
    }
    m_expect_damped_theta(sys, bath, p, theta(p.tau(), ch))
}

/// ⟨M̂⟩ with an explicit per-pass damping parameter θ (s²).
pub fn m_expect_damped_theta(
    sys: &QubitAmplitudes,
    bath: &Bath,
    p: &PassParams,
    theta_val: f64,
) -> Result<MExpectation> {
    if !(theta_val >= 0.0) {
        return param(format!("theta must be >= 0, got {theta_val}"));
    }
    let m = m_exact(sys, bath, p, Some(theta_val))?;
    let regime = if theta_val == 0.0 { MRegime::Unitary } else { MRegime::Damped };
    Ok(MExpectation { value: m.re(), log_abs: m.log_mag, regime })
}

/// Leading weak-coupling form of the damped ⟨M̂⟩:
/// `2 Re( ab* Π_k [α_k*β_k e^{∓2iΩ_kτ} e^{−4b₋²θ} + α_kβ_k* e^{−2ib₊τ} e^{−4b₊²θ}] )`,
/// where the sign follows `sgn(b₋)`. Returned in the log domain.
pub fn m_expect_leading(sys: &QubitAmplitudes, bath: &Bath, p: &PassParams, theta_val: f64) -> Result<LogComplex> {
    check_weak_coupling(bath, p, WEAK_COUPLING_RATIO)?;
    let (bp, bm, tau) = (p.b_plus(), p.b_minus(), p.tau());
    let prod = log_product(bath.iter().map(|s| {
        let om = p.with_coupling(s.coupling()).map(|q| q.omega()).unwrap_or(bm.abs());
        let flip = s.alpha().conj()
            * s.beta()
            * Complex64::from_polar((-4.0 * bm * bm * theta_val).exp(), -2.0 * bm.signum() * om * tau);
        let keep =
            s.alpha() * s.beta().conj() * Complex64::from_polar((-4.0 * bp * bp * theta_val).exp(), -2.0 * bp * tau);
        flip + keep
    }));
    let half = prod * (sys.a() * sys.b().conj());
    // 2 Re(w) = w + w*
    Ok(half.add(&half.conj()))
}

/// The K exponent and the bounds reported alongside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KExponent {
    /// `N b₋² T_P^(2−2a) τ^(2a)`
    pub k: f64,
    /// The same with coefficient 6, as in the asymptotic form of ⟨M̂⟩.
    pub k_six: f64,
    /// `N T_P^(2−2a) τ^(2a−2)`, which K exceeds once `|b₋|τ > 1`.
    pub lower_bound: f64,
}

/// K for N passes of duration τ with field splitting `b_minus = BΓ₋/ħ` (rad/s).
pub fn k_exponent(n: f64, b_minus: f64, tau: f64, ch: &ClockChannel) -> Result<KExponent> {
    if !(n >= 0.0) || !(tau >= 0.0) || !b_minus.is_finite() {
        return param("k_exponent needs n >= 0, tau >= 0 and a finite field term");
    }
    ch.validate()?;
    if tau == 0.0 {
        return Ok(KExponent { k: 0.0, k_six: 0.0, lower_bound: f64::INFINITY });
    }
    let a = ch.clock_exponent;
    let k = n * b_minus * b_minus * ch.scale(tau);
    let lower_bound = n * ((2.0 - 2.0 * a) * ch.t_planck.ln() + (2.0 * a - 2.0) * tau.ln()).exp();
    Ok(KExponent { k, k_six: 6.0 * k, lower_bound })
}

/// K for a physical scenario: `b₋ = B(γ₁−γ₂)/ħ`.
pub fn k_exponent_for(s: &PhysicalScenario) -> Result<KExponent> {
    let bm = s.b_field * s.gamma_minus() / s.constants.hbar;
    k_exponent(s.n, bm, s.tau, &ClockChannel::from_constants(&s.constants))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseVerdict {
    Distinguishable,
    Undecidable,
}

/// Collapse can be told apart from unitary evolution only while K < 1.
pub fn collapse_distinguishable(k: f64) -> Result<CollapseVerdict> {
    if !(k >= 0.0) {
        return param(format!("K must be >= 0, got {k}"));
    }
    Ok(if k < 1.0 { CollapseVerdict::Distinguishable } else { CollapseVerdict::Undecidable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::sampling::{sample_bath, sample_bath_states, CouplingLaw, SpinStateLaw};
    use crate::types::BathSpin;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// Symmetric preset: sin Ωτ = 0 and every phase a multiple of 2π.
    fn symmetric(n: usize) -> (QubitAmplitudes, Bath, PassParams) {
        let (f, bm) = (1.0f64, 1e3f64);
        let omega = (4.0 * f * f + bm * bm).sqrt();
        let tau = 250.0 * PI / omega;
        let p = PassParams::from_frequencies(f, 4.0 * omega, bm, tau).unwrap();
        let h = FRAC_1_SQRT_2;
        let spin = BathSpin::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0), f).unwrap();
        (QubitAmplitudes::plus_x(), Bath::uniform(n, spin).unwrap(), p)
    }

    #[test]
    fn symmetric_preset_gives_one() {
        for n in [1, 4, 50] {
            let (sys, bath, p) = symmetric(n);
            let m = m_expect_unitary(&sys, &bath, &p).unwrap();
            assert!((m - 1.0).abs() < 1e-9, "N={n}: {m}");
            let lead = m_expect_leading(&sys, &bath, &p, 0.0).unwrap().re();
            assert!((lead - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn odd_spin_zeroes_m() {
        let (sys, _, p) = symmetric(1);
        let h = FRAC_1_SQRT_2;
        let odd = BathSpin::new(Complex64::new(h, 0.0), Complex64::new(0.0, h), p.f()).unwrap();
        let bath = Bath::new(vec![odd; 3]).unwrap();
        assert!(m_expect_unitary(&sys, &bath, &p).unwrap().abs() < 1e-12);
        assert!(m_expect_unitary(&QubitAmplitudes::up(), &bath, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn collapsed_is_zero() {
        assert_eq!(m_expect_collapsed(), 0.0);
    }

    #[test]
    fn regime_gate() {
        let bath = sample_bath(3, CouplingLaw::Fixed(50.0), 1).unwrap();
        let p = PassParams::from_frequencies(0.0, 300.0, 100.0, 1.0).unwrap();
        assert!(matches!(m_expect_unitary(&QubitAmplitudes::plus_x(), &bath, &p), Err(Error::Regime(_))));
    }

    #[test]
    fn damping_limits() {
        let (sys, bath, p) = symmetric(6);
        let und = m_expect_unitary(&sys, &bath, &p).unwrap();
        let zero = m_expect_damped_theta(&sys, &bath, &p, 0.0).unwrap();
        assert!((zero.value - und).abs() < 1e-12);
        let inf = m_expect_damped_theta(&sys, &bath, &p, f64::INFINITY).unwrap();
        assert_eq!(inf.value, 0.0);
        let some = m_expect_damped_theta(&sys, &bath, &p, 1e-8).unwrap();
        assert!(some.value.abs() < und.abs());
        assert!(m_expect_damped(&sys, &bath, &p, 5, &ClockChannel::default()).is_err());
    }

    #[test]
    fn damped_log_linear_in_n() {
        let th = 1e-8;
        let (sys, b1, p) = symmetric(100);
        let (_, b2, _) = symmetric(200);
        let l1 = m_expect_damped_theta(&sys, &b1, &p, th).unwrap().log_abs;
        let l2 = m_expect_damped_theta(&sys, &b2, &p, th).unwrap().log_abs;
        assert!(l1 < 0.0);
        assert!((l1 / l2 - 0.5).abs() < 0.02, "{l1} {l2}");
    }

    #[test]
    fn leading_order_tracks_exact_damped() {
        let bath = sample_bath_states(8, CouplingLaw::Uniform(0.5, 1.0), SpinStateLaw::Haar, 3).unwrap();
        let p = PassParams::from_frequencies(0.0, 7e4, 3e4, 1e-3).unwrap();
        let sys = QubitAmplitudes::real(0.6, 0.8).unwrap();
        for th in [0.0, 1e-10, 1e-9] {
            let exact = m_expect_damped_theta(&sys, &bath, &p, th).unwrap().value;
            let lead = m_expect_leading(&sys, &bath, &p, th).unwrap().re();
            assert!((exact - lead).abs() < 1e-3, "theta {th}: {exact} vs {lead}");
        }
    }

    #[test]
    fn k_examples() {
        let ch = ClockChannel::default();
        assert_eq!(k_exponent(10.0, 1e3, 0.0, &ch).unwrap().k, 0.0);
        let k1 = k_exponent(10.0, 1e3, 1e-3, &ch).unwrap();
        let k2 = k_exponent(20.0, 1e3, 1e-3, &ch).unwrap();
        assert!((k2.k / k1.k - 2.0).abs() < 1e-12);
        assert!((k1.k_six / k1.k - 6.0).abs() < 1e-12);
        let tp: f64 = 5.39e-44;
        assert!((k1.lower_bound / (10.0 * tp.powf(4.0 / 3.0) / 1e-3f64.powf(4.0 / 3.0)) - 1.0).abs() < 1e-12);
        // |b₋|τ = 1 is the crossover
        assert!((k1.k / k1.lower_bound - 1.0).abs() < 1e-9);
        let k4 = k_exponent(10.0, 1e4, 1e-3, &ch).unwrap();
        assert!(k4.k > k4.lower_bound);
        let k3 = k_exponent(10.0, 1e2, 1e-3, &ch).unwrap();
        assert!(k3.k < k3.lower_bound);
    }

    #[test]
    fn verdicts() {
        assert_eq!(collapse_distinguishable(0.5).unwrap(), CollapseVerdict::Distinguishable);
        assert_eq!(collapse_distinguishable(1.0).unwrap(), CollapseVerdict::Undecidable);
        assert!(collapse_distinguishable(-1.0).is_err());
    }
}
