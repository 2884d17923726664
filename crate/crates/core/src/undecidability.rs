//! Events as undecidability between a pure state and the mixture of its
//! pointer-branch projections.
//!
//! States are dense vectors over a register whose first factor is the
//! two-level pointer (needle); the rest of the register has dimension
//! `len / 2`. Distinguishability is measured by trace distance.

use num_complex::Complex64;
use serde::Serialize;

use crate::density::{trace_distance, CMatrix, DensityMatrix};
use crate::error::{param, Result};

const PROJ_TOL: f64 = 1e-10;

/// Default threshold on the trace distance below which an event is declared.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Orthogonal projector: `P² = P = P†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    m: CMatrix,
}

impl Projector {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return param("projector must be square");
        }
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let idem = (&m * &m - &m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > PROJ_TOL || idem > PROJ_TOL {
            return param(format!("not an orthogonal projector (hermiticity {herm:.1e}, idempotence {idem:.1e})"));
        }
        Ok(Projector { m })
    }

    /// `|v⟩⟨v|/⟨v|v⟩`.
    pub fn onto(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) {
            return param("cannot project onto a zero vector");
        }
        let n = v.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm))
    }

    /// Sum of rank-one projectors onto mutually orthogonal vectors.
    pub fn onto_span(vs: &[Vec<Complex64>]) -> Result<Self> {
        let Some(first) = vs.first() else {
            return param("empty span");
        };
        let n = first.len();
        let mut m = CMatrix::zeros(n, n);
        for v in vs {
            if v.len() != n {
                return param("span vectors differ in length");
            }
            m += Projector::onto(v)?.m;
        }
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Projector { m: CMatrix::identity(dim, dim) }
    }

    /// `|s⟩⟨s|` on a single two-level factor; `s = 0` is `|+⟩`.
    pub fn pointer(s: usize) -> Self {
        let mut m = CMatrix::zeros(2, 2);
        m[(s, s)] = Complex64::new(1.0, 0.0);
        Projector { m }
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Projector) -> Projector {
        Projector { m: self.m.kronecker(&other.m) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Extends a pointer projector by the identity on the remaining factors.
    pub fn extend(&self, total_dim: usize) -> Result<Projector> {
        if !total_dim.is_multiple_of(self.dim()) {
            return param(format!("cannot extend a {}-dim projector to {total_dim}", self.dim()));
        }
        Ok(self.kron(&Projector::identity(total_dim / self.dim())))
    }
}

/// An essential property with the properties claimed compatible with it.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub essential: Projector,
    pub compatible: Vec<Projector>,
    pub probability: f64,
}

impl EventRecord {
    pub fn new(essential: Projector, compatible: Vec<Projector>, probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return param(format!("probability must lie in [0,1], got {probability}"));
        }
        if let Some(i) = compatible.iter().position(|p| !is_compatible(p, &essential)) {
            return param(format!("property {i} is not compatible with the essential property"));
        }
        Ok(EventRecord { essential, compatible, probability })
    }
}

fn as_vector(state: &[Complex64]) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(state)
}

/// `(P ⊗ I)|Ψ⟩`, unnormalized; its squared norm is the branch probability.
pub fn branch_project(state: &[Complex64], pointer: &Projector) -> Result<Vec<Complex64>> {
    let full = pointer.extend(state.len())?;
    Ok((full.m * as_vector(state)).iter().copied().collect())
}

fn check_resolution(projectors: &[Projector]) -> Result<()> {
    let Some(first) = projectors.first() else {
        return param("no projectors given");
    };
    let d = first.dim();
    if projectors.iter().any(|p| p.dim() != d) {
        return param("projectors differ in dimension");
    }
    let sum = projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + &p.m);
    let dev = (sum - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > PROJ_TOL {
        return param(format!("projectors do not sum to the identity (deviation {dev:.1e})"));
    }
    for (i, p) in projectors.iter().enumerate() {
        for q in &projectors[i + 1..] {
            if (&p.m * &q.m).iter().any(|z| z.norm() > PROJ_TOL) {
                return param("projectors are not mutually orthogonal");
            }
        }
    }
    Ok(())
}

/// `Σ_i P_i |Ψ⟩⟨Ψ| P_i` for a resolution of the pointer identity.
pub fn projection_mixture(state: &[Complex64], projectors: &[Projector]) -> Result<DensityMatrix> {
    check_resolution(projectors)?;
    let pure = DensityMatrix::from_pure(state)?;
    mixture_of(pure.matrix(), projectors)
}

fn mixture_of(rho: &CMatrix, projectors: &[Projector]) -> Result<DensityMatrix> {
    let n = rho.nrows();
    let mut out = CMatrix::zeros(n, n);
    for p in projectors {
        let full = p.extend(n)?;
        out += &full.m * rho * &full.m;
    }
    DensityMatrix::new(out)
}

/// `‖P·E − E‖_max < 1e-10`: the property P holds whenever E does.
pub fn is_compatible(p: &Projector, essential: &Projector) -> bool {
    if p.dim() != essential.dim() {
        return false;
    }
    (&p.m * &essential.m - &essential.m).iter().all(|z| z.norm() < PROJ_TOL)
}

/// Clock dephasing of the pointer: coherences between different pointer
/// states are multiplied by `exp(−ω²θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerDephasing {
    /// Pointer Bohr frequency, rad/s.
    pub omega: f64,
    /// Damping parameter, s².
    pub theta: f64,
}

impl PointerDephasing {
    pub fn none() -> Self {
        PointerDephasing { omega: 0.0, theta: 0.0 }
    }

    pub fn factor(&self) -> f64 {
        if self.omega == 0.0 || self.theta == 0.0 {
            1.0
        } else {
            (-self.omega * self.omega * self.theta).exp()
        }
    }
}

/// Applies pointer dephasing to a full register density matrix: entries whose
/// row and column sit in different pointer blocks are scaled.
pub fn dephase_pointer(rho: &DensityMatrix, dephasing: &PointerDephasing) -> Result<DensityMatrix> {
    let n = rho.dim();
    let half = n / 2;
    let f = dephasing.factor();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let z = rho.get(i, j);
        if (i < half) == (j < half) {
            z
        } else {
            z * f
        }
    });
    DensityMatrix::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Undecidability {
    /// Trace distance between the dephased state and its dephased branch mixture.
    pub margin: f64,
    pub event: bool,
}

pub fn undecidability_margin(
    state: &[Complex64],
    projectors: &[Projector],
    dephasing: &PointerDephasing,
    epsilon: f64,
) -> Result<Undecidability> {
    if !(epsilon > 0.0) {
        return param(format!("epsilon must be > 0, got {epsilon}"));
    }
    check_resolution(projectors)?;
    let pure = DensityMatrix::from_pure(state)?;
    let mixture = mixture_of(pure.matrix(), projectors)?;
    let damped = dephase_pointer(&pure, dephasing)?;
    let damped_mixture = dephase_pointer(&mixture, dephasing)?;
    let margin = trace_distance(&damped, &damped_mixture)?;
    Ok(Undecidability { margin, event: margin < epsilon })
}

/// Three-spin example state
/// `(c₁/√2)(|+,+,−⟩ + |+,−,+⟩) + c₂|−,+,+⟩`.
pub fn three_spin_state(c1: Complex64, c2: Complex64) -> Result<Vec<Complex64>> {
    if ((c1.norm_sqr() + c2.norm_sqr()) - 1.0).abs() > 1e-12 {
        return param("|c1|^2 + |c2|^2 must be 1");
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![Complex64::new(0.0, 0.0); 8];
    v[0b001] = c1 * h;
    v[0b010] = c1 * h;
    v[0b100] = c2;
    Ok(v)
}

/// The essential property of the up-branch event of [`three_spin_state`].
pub fn three_spin_essential() -> Projector {
    let mut v = vec![Complex64::new(0.0, 0.0); 8];
    v[0b001] = Complex64::new(1.0, 0.0);
    v[0b010] = Complex64::new(1.0, 0.0);
    Projector::onto(&v).expect("nonzero vector")
}

/// "Spins 2 and 3 are opposite" in their symmetric combination, on three spins.
pub fn pair_opposite_projector() -> Projector {
    let mut v = vec![Complex64::new(0.0, 0.0); 4];
    v[0b01] = Complex64::new(1.0, 0.0);
    v[0b10] = Complex64::new(1.0, 0.0);
    Projector::identity(2).kron(&Projector::onto(&v).expect("nonzero vector"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::partial_trace;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn pointers() -> Vec<Projector> {
        vec![Projector::pointer(0), Projector::pointer(1)]
    }

    #[test]
    fn projector_validation() {
        assert!(Projector::new(CMatrix::from_element(2, 2, c(1.0))).is_err());
        assert!(Projector::new(CMatrix::from_element(2, 2, c(0.5))).is_ok());
    }

    #[test]
    fn branch_probabilities() {
        let psi = three_spin_state(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        let plus = branch_project(&psi, &Projector::pointer(0)).unwrap();
        let p: f64 = plus.iter().map(|z| z.norm_sqr()).sum();
        assert!((p - 0.5).abs() < 1e-15);
        let again = branch_project(&plus, &Projector::pointer(0)).unwrap();
        assert_eq!(again, plus);
        let other = branch_project(&plus, &Projector::pointer(1)).unwrap();
        assert!(other.iter().all(|z| z.norm() == 0.0));
        assert!(branch_project(&psi[..7], &Projector::pointer(0)).is_err());
    }

    #[test]
    fn mixture_examples() {
        let (c1, c2) = (c(0.6), c(0.8));
        let psi = three_spin_state(c1, c2).unwrap();
        let mix = projection_mixture(&psi, &pointers()).unwrap();
        let red = partial_trace(&mix, &[0], &[2, 2, 2]).unwrap();
        assert!((red.get(0, 0).re - 0.36).abs() < 1e-12);
        assert!((red.get(1, 1).re - 0.64).abs() < 1e-12);
        assert!(red.get(0, 1).norm() < 1e-12);
        // a one-branch state is its own mixture
        let one = three_spin_state(c(1.0), c(0.0)).unwrap();
        let m1 = projection_mixture(&one, &pointers()).unwrap();
        assert!(m1.max_abs_diff(&DensityMatrix::from_pure(&one).unwrap()) < 1e-15);
        // idempotent
        let twice = mixture_of(mix.matrix(), &pointers()).unwrap();
        assert!(twice.max_abs_diff(&mix) < 1e-15);
    }

    #[test]
    fn bad_resolutions() {
        let psi = three_spin_state(c(0.6), c(0.8)).unwrap();
        assert!(projection_mixture(&psi, &[Projector::pointer(0)]).is_err());
        assert!(projection_mixture(&psi, &[Projector::pointer(0), Projector::pointer(0)]).is_err());
        assert!(projection_mixture(&psi, &[]).is_err());
    }

    #[test]
    fn compatibility() {
        let e = three_spin_essential();
        let p1 = Projector::pointer(0).extend(8).unwrap();
        assert!(is_compatible(&p1, &e));
        assert!(is_compatible(&pair_opposite_projector(), &e));
        assert!(!is_compatible(&Projector::pointer(1).extend(8).unwrap(), &e));
        assert!(is_compatible(&e, &e));
        // products of compatible commuting properties stay compatible
        let prod = Projector::new(p1.matrix() * pair_opposite_projector().matrix()).unwrap();
        assert!(is_compatible(&prod, &e));
        let rec = EventRecord::new(e.clone(), vec![p1, pair_opposite_projector()], 0.5).unwrap();
        assert_eq!(rec.compatible.len(), 2);
        assert!(EventRecord::new(e, vec![Projector::pointer(1).extend(8).unwrap()], 0.5).is_err());
    }

    #[test]
    fn margin_examples() {
        let psi = three_spin_state(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        let u = undecidability_margin(&psi, &pointers(), &PointerDephasing::none(), DEFAULT_EPSILON).unwrap();
        assert!((u.margin - 0.5).abs() < 1e-10);
        assert!(!u.event);
        let full = PointerDephasing { omega: 1.0, theta: f64::INFINITY };
        let u = undecidability_margin(&psi, &pointers(), &full, DEFAULT_EPSILON).unwrap();
        assert_eq!(u.margin, 0.0);
        assert!(u.event);
        let zero_w = PointerDephasing { omega: 0.0, theta: f64::INFINITY };
        assert_eq!(zero_w.factor(), 1.0);
        assert!(undecidability_margin(&psi, &pointers(), &full, 0.0).is_err());
    }

    #[test]
    fn margin_monotone_in_theta() {
        let psi = three_spin_state(c(0.6), c(0.8)).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let theta = if i == 0 { 0.0 } else { 1e-3 * 1.3f64.powi(i) };
            let d = PointerDephasing { omega: 2.0, theta };
            let m = undecidability_margin(&psi, &pointers(), &d, DEFAULT_EPSILON).unwrap().margin;
            assert!(m <= prev + 1e-15, "theta {theta}: {m} > {prev}");
            prev = m;
        }
        assert!(
            (undecidability_margin(&psi, &pointers(), &PointerDephasing::none(), 1e-12).unwrap().margin - 0.48).abs()
                < 1e-10
        );
    }
}
