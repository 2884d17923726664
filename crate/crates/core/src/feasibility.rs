//! Whether a cavity experiment could decohere the needle and still let the
//! global observable be measured: coupling strength, packet spreading, the
//! weak-coupling condition, clock damping and the bounds they combine into.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cavity::WEAK_COUPLING_RATIO;
use crate::despagnat::k_exponent_for;
use crate::error::{param, Result};
use crate::types::{PhysicalConstants, PhysicalScenario};

const BUILTIN_PRESETS: &str = include_str!("../presets/species.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesPreset {
    pub name: String,
    pub mass_kg: f64,
    #[serde(rename = "gamma_J_per_T")]
    pub gamma_j_per_t: f64,
}

impl SpeciesPreset {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass_kg > 0.0) || !(self.gamma_j_per_t > 0.0) {
            return param(format!("preset {}: mass and moment must be > 0", self.name));
        }
        Ok(())
    }
}

/// Parses a JSON array of species records.
pub fn parse_presets(text: &str) -> Result<Vec<SpeciesPreset>> {
    let list: Vec<SpeciesPreset> =
        serde_json::from_str(text).map_err(|e| crate::Error::Parameter(format!("species file: {e}")))?;
    for p in &list {
        p.validate()?;
    }
    Ok(list)
}

pub fn load_presets(path: &Path) -> Result<Vec<SpeciesPreset>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
    parse_presets(&text)
}

/// The presets shipped with the crate: neutron, proton, nucleon, planck-mass.
pub fn builtin_presets() -> Vec<SpeciesPreset> {
    parse_presets(BUILTIN_PRESETS).expect("bundled species file is valid")
}

pub fn find_preset<'a>(presets: &'a [SpeciesPreset], name: &str) -> Option<&'a SpeciesPreset> {
    presets.iter().rev().find(|p| p.name == name)
}

/// Proton needle, neutron environment, 1 T field, 0.1 pm impact parameter,
/// 1 cm half length at 100 m/s.
pub fn default_scenario() -> PhysicalScenario {
    let presets = builtin_presets();
    let needle = find_preset(&presets, "proton").expect("bundled proton preset");
    let env = find_preset(&presets, "neutron").expect("bundled neutron preset");
    scenario_for(needle, env, 1e5)
}

pub fn scenario_for(needle: &SpeciesPreset, env: &SpeciesPreset, n: f64) -> PhysicalScenario {
    let (half_length, v) = (1e-2, 100.0);
    PhysicalScenario {
        mass: env.mass_kg,
        gamma1: needle.gamma_j_per_t,
        gamma2: env.gamma_j_per_t,
        b_field: 1.0,
        d: 1e-13,
        half_length,
        v,
        tau: 2.0 * half_length / v,
        n,
        constants: PhysicalConstants::default(),
    }
}

/// How strict the comparison in a [`Check`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// lhs > rhs
    Greater,
    /// lhs < rhs
    Less,
    /// lhs ≥ rhs
    AtLeast,
    /// lhs > factor · rhs
    MuchGreater,
    /// lhs · factor < rhs
    MuchLess,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub pass: bool,
    /// `log10` of the ratio in the passing direction; positive when the
    /// plain inequality holds.
    pub margin_log10: f64,
}

impl Check {
    pub fn new(name: &str, lhs: f64, rhs: f64, relation: Relation, factor: f64) -> Self {
        let up = (lhs / rhs).log10();
        let (pass, margin_log10) = match relation {
            Relation::Greater => (lhs > rhs, up),
            Relation::AtLeast => (lhs >= rhs, up),
            Relation::Less => (lhs < rhs, -up),
            Relation::MuchGreater => (lhs > factor * rhs, up),
            Relation::MuchLess => (lhs * factor < rhs, -up),
        };
        Check { name: name.to_string(), lhs, rhs, relation, pass, margin_log10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl FeasibilityReport {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        let overall = checks.iter().all(|c| c.pass);
        FeasibilityReport { checks, overall }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Numeric reading of "≫" and of the weak-coupling condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub much_greater: f64,
    pub weak_coupling: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { much_greater: 10.0, weak_coupling: WEAK_COUPLING_RATIO }
    }
}

/// Strong enough coupling to decohere: `μγ₁γ₂/(ħd²v) > 1`.
pub fn decoherence_bound(s: &PhysicalScenario) -> Check {
    let c = &s.constants;
    let lhs = c.mu0 * s.gamma1 * s.gamma2 / (c.hbar * s.d * s.d * s.v);
    Check::new("decoherence_bound", lhs, 1.0, Relation::Greater, 1.0)
}

/// Spin-spin coupling frequency at impact parameter d: `μγ₁γ₂/(ħd³)`.
pub fn dipole_coupling(s: &PhysicalScenario) -> f64 {
    let c = &s.constants;
    c.mu0 * s.gamma1 * s.gamma2 / (c.hbar * s.d.powi(3))
}

/// Lower bound on the transverse velocity picked up by a packet localized
/// within d: `ħ/(md)`.
pub fn transverse_velocity(s: &PhysicalScenario) -> f64 {
    s.constants.hbar / (s.mass * s.d)
}

/// `√(ħt/m)`, the spread of a packet whose initial width is tuned for time t.
pub fn min_dispersion(t: f64, m: f64, hbar: f64) -> f64 {
    (hbar * t / m).sqrt()
}

/// Width at time t of a free Gaussian packet of initial width δ:
/// `(δ/2)√(1 + 4ħ²t²/(m²δ⁴))`.
pub fn packet_width(t: f64, m: f64, delta: f64, hbar: f64) -> f64 {
    0.5 * delta * spread_ratio(t, m, delta, hbar).hypot(1.0)
}

/// `2ħt/(mδ²)`, the late-time growth factor of a packet of initial width δ.
fn spread_ratio(t: f64, m: f64, delta: f64, hbar: f64) -> f64 {
    2.0 * hbar * t / (m * delta * delta)
}

/// Largest time of flight compatible with both the spreading and the
/// coupling bounds: `(m(γ₁γ₂)^(2/3) μ^(2/3) / (ħ^(5/3) N))³`.
pub fn tau_upper_bound(s: &PhysicalScenario) -> f64 {
    let c = &s.constants;
    let root = s.mass * (s.gamma1 * s.gamma2).powf(2.0 / 3.0) * c.mu0.powf(2.0 / 3.0) / (c.hbar.powf(5.0 / 3.0) * s.n);
    root.powi(3)
}

/// `T_P^(1/3) ħ^(5/3) N^(5/4) / μ^(2/3)`, the value `m(γ₁γ₂)^(2/3)` must greatly exceed.
pub fn mass_moment_threshold(n: f64, c: &PhysicalConstants) -> f64 {
    c.t_planck.powf(1.0 / 3.0) * c.hbar.powf(5.0 / 3.0) * n.powf(1.25) / c.mu0.powf(2.0 / 3.0)
}

pub fn mass_moment_lhs(s: &PhysicalScenario) -> f64 {
    s.mass * (s.gamma1 * s.gamma2).powf(2.0 / 3.0)
}

pub fn mass_moment_check(s: &PhysicalScenario, th: &Thresholds) -> Check {
    Check::new(
        "mass_moment",
        mass_moment_lhs(s),
        mass_moment_threshold(s.n, &s.constants),
        Relation::MuchGreater,
        th.much_greater,
    )
}

/// Equal needle and environment moment needed for a particle of mass m to
/// meet the mass-moment bound with equality.
pub fn required_moment(mass: f64, n: f64, c: &PhysicalConstants) -> f64 {
    (mass_moment_threshold(n, c) / mass).powf(0.75)
}

/// Largest N at which the mass-moment condition still holds.
pub fn mass_moment_critical_n(s: &PhysicalScenario, th: &Thresholds) -> f64 {
    let per = mass_moment_threshold(1.0, &s.constants);
    (mass_moment_lhs(s) / (th.much_greater * per)).powf(0.8)
}

/// `0.1 μγ₁γ₂ m / ħ²`, the largest impact parameter for which packets starting
/// at width d/10 stay narrower than the distance they travel.
pub fn appendix_d_max(s: &PhysicalScenario) -> f64 {
    let c = &s.constants;
    0.1 * c.mu0 * s.gamma1 * s.gamma2 * s.mass / (c.hbar * c.hbar)
}

/// Packets of initial width δ = d/10 over the whole run T = Nτ.
pub fn appendix1_analysis(s: &PhysicalScenario) -> FeasibilityReport {
    let c = &s.constants;
    let t = s.total_time();
    let delta = 0.1 * s.d;
    let width = packet_width(t, s.mass, delta, c.hbar);
    // ħT/(mδ), written so that it shares rounding with the width
    let spread_floor = 0.5 * delta * spread_ratio(t, s.mass, delta, c.hbar);
    let length = s.v * t;
    let length_cap = c.mu0 * s.gamma1 * s.gamma2 * t / (c.hbar * s.d * s.d);
    FeasibilityReport::from_checks(vec![
        Check::new("packet_spread_floor", width, spread_floor, Relation::AtLeast, 1.0),
        Check::new("travel_length", length, length_cap, Relation::Less, 1.0),
        Check::new("spread_within_travel", width, length, Relation::Less, 1.0),
        Check::new("impact_parameter", s.d, appendix_d_max(s), Relation::Less, 1.0),
    ])
}

/// Every condition at once, with the environment size set to `n`.
pub fn full_report(s: &PhysicalScenario, n: f64) -> Result<FeasibilityReport> {
    full_report_with(s, n, &Thresholds::default())
}

pub fn full_report_with(s: &PhysicalScenario, n: f64, th: &Thresholds) -> Result<FeasibilityReport> {
    let s = PhysicalScenario { n, ..*s };
    s.validate()?;
    let c = &s.constants;
    let k = k_exponent_for(&s)?;
    let field = s.b_field * s.gamma_minus().abs() / c.hbar;
    let mut checks = vec![
        decoherence_bound(&s),
        Check::new("dispersion", min_dispersion(s.total_time(), s.mass, c.hbar), s.d, Relation::Less, 1.0),
        Check::new("weak_coupling", dipole_coupling(&s), th.weak_coupling * field, Relation::Less, 1.0),
        Check::new("k_exponent", k.k, 1.0, Relation::Less, 1.0),
        Check::new("tau_upper_bound", s.tau, tau_upper_bound(&s), Relation::Less, 1.0),
        mass_moment_check(&s, th),
    ];
    checks.extend(appendix1_analysis(&s).checks.into_iter().filter(|c| c.name == "impact_parameter"));
    Ok(FeasibilityReport::from_checks(checks))
}
