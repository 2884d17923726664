//! One function per subcommand. Each turns a scenario into a table and a
//! JSON summary; nothing here touches the filesystem except preset loading.

use std::f64::consts::LN_10;

use anyhow::{bail, Result};
use decolab::cavity::{
    branch_vectors, check_weak_coupling, exact_coherence, inner_aa, inner_ab, inner_bb, integrated_coupling,
    product_form_coherence, reduced_density_exact, WEAK_COUPLING_RATIO,
};
use decolab::density::{partial_trace, trace_distance, DensityMatrix};
use decolab::despagnat::{
    collapse_distinguishable, k_exponent, k_exponent_for, m_expect_collapsed, m_expect_damped, m_expect_damped_theta,
    m_expect_leading, m_expect_unitary,
};
use decolab::feasibility::{
    appendix1_analysis, builtin_presets, default_scenario, find_preset, full_report, load_presets, scenario_for,
    SpeciesPreset,
};
use decolab::realclock::{critical_particle_count, revival_killed, theta, z_damping_exponent};
use decolab::sampling::{sample_bath_states, CouplingLaw};
use decolab::undecidability::{
    is_compatible, pair_opposite_projector, projection_mixture, three_spin_essential, three_spin_state,
    undecidability_margin, PointerDephasing, Projector,
};
use decolab::validation::full_suite;
use decolab::zurek::{revival_scan, revival_time_log};
use decolab::{Bath, PhysicalScenario};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::output::{Output, Table};
use crate::scenario::Scenario;

/// Name of the environment variable listing extra species files.
pub const PRESET_PATH_VAR: &str = "DECOLAB_PRESET_PATH";

/// Largest N the revival verdict scan walks through when looking for N*.
const CRITICAL_SCAN_MAX: u64 = 1_000_000;

/// Needle species when only the environment is named.
const DEFAULT_NEEDLE: &str = "proton";

/// Environment size used by `feasibility` when none is given.
const DEFAULT_FEASIBILITY_N: f64 = 1e5;

/// Scenario plus the command-line overrides.
#[derive(Debug, Clone)]
pub struct Context {
    pub scenario: Scenario,
    pub seed: u64,
    pub preset: Option<String>,
    pub n: Option<f64>,
}

fn log10(ln: f64) -> f64 {
    ln / LN_10
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

impl Context {
    fn coupling_law(&self) -> Result<CouplingLaw> {
        Ok(*self.scenario.require(&self.scenario.coupling_law, "coupling_law")?)
    }

    fn bath(&self, n: usize, seed: u64) -> Result<Bath> {
        Ok(sample_bath_states(n, self.coupling_law()?, self.scenario.spin_states, seed)?)
    }

    fn count(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1.0 && n.fract() == 0.0 && n <= 1e7 => Ok(n as usize),
            Some(n) => bail!(decolab::Error::Parameter(format!("--n must be a whole number of spins, got {n}"))),
            None => Ok(self.scenario.count()?),
        }
    }
}

pub fn zurek_run(ctx: &Context) -> Result<Output> {
    let s = &ctx.scenario;
    let n = ctx.count()?;
    let grid = s.require(&s.times, "times")?.values();
    let bath = ctx.bath(n, ctx.seed)?;
    let ch = s.clock_channel();
    let report = revival_scan(&bath, &grid)?;

    let mut table = Table::new(&["t_s", "log10_abs_z", "phase_rad", "log10_abs_z_damped"]);
    for (i, &t) in grid.iter().enumerate() {
        let ln_damped = report.log_abs_z[i] - z_damping_exponent(&bath, t, &ch);
        table.push(vec![t.into(), log10(report.log_abs_z[i]).into(), report.phase[i].into(), log10(ln_damped).into()]);
    }
    let peaks: Vec<Value> = report
        .peaks
        .iter()
        .map(|&(t, ln_z)| {
            let e = z_damping_exponent(&bath, t, &ch);
            json!({"t_s": t, "log10_abs_z": log10(ln_z), "log10_abs_z_damped": log10(ln_z - e), "ln_suppression": -e})
        })
        .collect();
    let g = bath.mean_coupling();
    let verdict = if g > 0.0 { Some(revival_killed(n as u64, g, &ch)?) } else { None };
    let log_tr = if g > 0.0 { Some(log10(revival_time_log(n as u64, g)?)) } else { None };
    let summary = json!({
        "n": n,
        "seed": ctx.seed,
        "mean_coupling_rad_s": g,
        "clock": ch,
        "log10_floor": log10(report.log_floor),
        "peaks": peaks,
        "log10_revival_time_s": log_tr,
        "revival_verdict": verdict,
    });
    Ok(Output { name: "zurek_run", summary, table })
}

pub fn revival_scan_cmd(ctx: &Context) -> Result<Output> {
    let s = &ctx.scenario;
    let g = match ctx.coupling_law()? {
        CouplingLaw::Fixed(g) => g,
        CouplingLaw::Uniform(lo, hi) => 0.5 * (lo + hi),
    };
    let ch = s.clock_channel();
    let sizes: Vec<u64> = match (&s.sizes, ctx.n) {
        (_, Some(_)) | (None, _) => vec![ctx.count()? as u64],
        (Some(v), None) => v.clone(),
    };
    let mut table = Table::new(&["n", "fate", "ln_damping", "ln_floor_depth", "margin", "log10_revival_time_s"]);
    let mut rows = Vec::new();
    for &n in &sizes {
        let v = revival_killed(n, g, &ch)?;
        let fate = serde_json::to_value(v.fate)?.as_str().unwrap_or_default().to_string();
        table.push(vec![
            n.into(),
            fate.into(),
            v.log_damping.into(),
            v.log_floor_depth.into(),
            v.margin.into(),
            log10(v.log_revival_time).into(),
        ]);
        rows.push(v);
    }
    let monotone = rows.windows(2).all(|w| w[1].margin >= w[0].margin);
    let critical = critical_particle_count(g, &ch, CRITICAL_SCAN_MAX)?;
    let summary = json!({
        "coupling_rad_s": g,
        "clock": ch,
        "critical_n": critical,
        "critical_scan_max": CRITICAL_SCAN_MAX,
        "margin_monotone": monotone,
    });
    Ok(Output { name: "revival_scan", summary, table })
}

pub fn cavity_run(ctx: &Context) -> Result<Output> {
    let s = &ctx.scenario;
    let p = s.require(&s.pass_spec, "pass")?.params()?;
    let sizes: Vec<u64> = match (&s.sizes, ctx.n) {
        (_, Some(_)) | (None, _) => vec![ctx.count()? as u64],
        (Some(v), None) => v.clone(),
    };
    let reps = s.replicates.unwrap_or(1);
    let sys = s.system_amplitudes();
    let mut table = Table::new(&[
        "n",
        "replicate",
        "rho_pp",
        "rho_mm",
        "log10_abs_rho_pm",
        "log10_abs_rho_pm_exact",
        "ln_inner_aa",
        "ln_inner_bb",
        "log10_abs_inner_ab",
    ]);
    let mut medians = Vec::new();
    for &n in &sizes {
        let mut logs = Vec::with_capacity(reps);
        let mut exact_logs = Vec::with_capacity(reps);
        for r in 0..reps {
            let bath = ctx.bath(n as usize, ctx.seed.wrapping_add(r as u64))?;
            check_weak_coupling(&bath, &p, WEAK_COUPLING_RATIO)?;
            let bv = branch_vectors(&sys, &bath, &p)?;
            let coh = product_form_coherence(&sys, &bv);
            let exact = exact_coherence(&sys, &bath, &p)?;
            let rho = reduced_density_exact(&sys, &bath, &p)?;
            logs.push(log10(coh.log_mag));
            exact_logs.push(log10(exact.log_mag));
            table.push(vec![
                n.into(),
                r.into(),
                rho.get(0, 0).re.into(),
                rho.get(1, 1).re.into(),
                log10(coh.log_mag).into(),
                log10(exact.log_mag).into(),
                inner_aa(&bv).into(),
                inner_bb(&bv).into(),
                log10(inner_ab(&bv).log_mag).into(),
            ]);
        }
        medians.push(json!({
            "n": n,
            "median_log10_abs_rho_pm": median(logs),
            "median_log10_abs_rho_pm_exact": median(exact_logs),
        }));
    }
    let strictly_decreasing =
        medians.windows(2).all(|w| w[1]["median_log10_abs_rho_pm"].as_f64() < w[0]["median_log10_abs_rho_pm"].as_f64());
    let summary = json!({
        "seed": ctx.seed,
        "replicates": reps,
        "omega_rad_s": p.omega(),
        "medians": medians,
        "median_strictly_decreasing": strictly_decreasing,
    });
    Ok(Output { name: "cavity_run", summary, table })
}

pub fn despagnat(ctx: &Context) -> Result<Output> {
    let s = &ctx.scenario;
    let p = s.require(&s.pass_spec, "pass")?.params()?;
    let n = ctx.count()?;
    let bath = ctx.bath(n, ctx.seed)?;
    let sys = s.system_amplitudes();
    let ch = s.clock_channel();
    let unitary = m_expect_unitary(&sys, &bath, &p)?;
    let damped = m_expect_damped(&sys, &bath, &p, n, &ch)?;
    let theta_clock = theta(p.tau(), &ch);
    let leading = m_expect_leading(&sys, &bath, &p, theta_clock)?;
    let k = match &s.physical {
        Some(phys) => k_exponent_for(&PhysicalScenario { n: n as f64, ..*phys })?,
        None => k_exponent(n as f64, p.b_minus(), p.tau(), &ch)?,
    };
    let verdict = collapse_distinguishable(k.k)?;

    let mut table = Table::new(&["theta_s2", "m_damped", "log10_abs_m_damped"]);
    let thetas = s.thetas.map(|g| g.values()).unwrap_or_else(|| vec![theta_clock]);
    for th in thetas {
        let m = m_expect_damped_theta(&sys, &bath, &p, th)?;
        table.push(vec![th.into(), m.value.into(), log10(m.log_abs).into()]);
    }
    let summary = json!({
        "n": n,
        "seed": ctx.seed,
        "m_unitary": unitary,
        "m_collapsed": m_expect_collapsed(),
        "m_damped": damped,
        "m_leading_order": leading.re(),
        "theta_clock_s2": theta_clock,
        "k": k,
        "verdict": verdict,
    });
    Ok(Output { name: "despagnat", summary, table })
}

/// Built-in species followed by every file listed in `DECOLAB_PRESET_PATH`.
pub fn presets() -> Result<Vec<SpeciesPreset>> {
    let mut all = builtin_presets();
    if let Some(paths) = std::env::var_os(PRESET_PATH_VAR) {
        for path in std::env::split_paths(&paths).filter(|p| !p.as_os_str().is_empty()) {
            all.extend(load_presets(&path)?);
        }
    }
    Ok(all)
}

fn lookup<'a>(all: &'a [SpeciesPreset], name: &str) -> Result<&'a SpeciesPreset> {
    find_preset(all, name).ok_or_else(|| decolab::Error::Parameter(format!("unknown species preset \"{name}\"")).into())
}

fn physical_scenario(ctx: &Context) -> Result<PhysicalScenario> {
    let s = &ctx.scenario;
    let species = s.species.as_ref();
    let env_name = ctx.preset.as_deref().or(species.map(|sp| sp.environment.as_str()));
    let mut phys = match (env_name, &s.physical) {
        (None, Some(p)) => *p,
        (None, None) => default_scenario(),
        (Some(env_name), base) => {
            let all = presets()?;
            let env = lookup(&all, env_name)?;
            let needle = lookup(&all, species.and_then(|sp| sp.needle.as_deref()).unwrap_or(DEFAULT_NEEDLE))?;
            match base {
                Some(p) => PhysicalScenario {
                    mass: env.mass_kg,
                    gamma1: needle.gamma_j_per_t,
                    gamma2: env.gamma_j_per_t,
                    ..*p
                },
                None => scenario_for(needle, env, DEFAULT_FEASIBILITY_N),
            }
        }
    };
    phys.n = ctx.n.or(s.n).or(s.physical.map(|p| p.n)).unwrap_or(DEFAULT_FEASIBILITY_N);
    phys.validate()?;
    Ok(phys)
}

pub fn feasibility(ctx: &Context) -> Result<Output> {
    let phys = physical_scenario(ctx)?;
    let report = full_report(&phys, phys.n)?;
    let appendix = appendix1_analysis(&phys);
    let mut table = Table::new(&["check", "lhs", "rhs", "relation", "pass", "margin_log10"]);
    for c in report.checks.iter().chain(appendix.checks.iter().filter(|c| c.name != "impact_parameter")) {
        let rel = serde_json::to_value(c.relation)?.as_str().unwrap_or_default().to_string();
        // a vanishing side makes the margin infinite
        let margin = if c.margin_log10.is_finite() { c.margin_log10.into() } else { c.margin_log10.to_string().into() };
        table.push(vec![c.name.clone().into(), c.lhs.into(), c.rhs.into(), rel.into(), c.pass.into(), margin]);
    }
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    let summary = json!({
        "scenario": phys,
        "overall": report.overall,
        "failed": failed,
        "appendix_overall": appendix.overall,
        "integrated_coupling": integrated_coupling(&phys),
        "k": k_exponent_for(&phys)?,
    });
    Ok(Output { name: "feasibility", summary, table })
}

fn complex(x: [f64; 2]) -> Complex64 {
    Complex64::new(x[0], x[1])
}

pub fn undecide(ctx: &Context) -> Result<Output> {
    let s = &ctx.scenario;
    let spec = s.require(&s.undecide, "undecide")?;
    let (c1, c2) = (complex(spec.c1), complex(spec.c2));
    let psi = three_spin_state(c1, c2)?;
    let pointers = [Projector::pointer(0), Projector::pointer(1)];
    let mixture = projection_mixture(&psi, &pointers)?;
    let reduced = partial_trace(&mixture, &[0], &[2, 2, 2])?;
    let pure = DensityMatrix::from_pure(&psi)?;
    let distance = trace_distance(&pure, &mixture)?;
    let essential = three_spin_essential();
    let up = Projector::pointer(0).extend(8)?;
    let down = Projector::pointer(1).extend(8)?;

    let thetas = s.thetas.map(|g| g.values()).unwrap_or_else(|| vec![0.0]);
    let mut table = Table::new(&["theta_s2", "margin", "event"]);
    let mut last = None;
    for th in thetas {
        let u =
            undecidability_margin(&psi, &pointers, &PointerDephasing { omega: spec.omega, theta: th }, spec.epsilon)?;
        table.push(vec![th.into(), u.margin.into(), u.event.into()]);
        last = Some(u);
    }
    let monotone = table.rows.windows(2).all(|w| match (&w[0][1], &w[1][1]) {
        (crate::output::Cell::Num(a), crate::output::Cell::Num(b)) => b <= a,
        _ => false,
    });
    let summary = json!({
        "reduced_diagonal": [reduced.get(0, 0).re, reduced.get(1, 1).re],
        "trace_distance_pure_vs_mixture": distance,
        "abs_c1_c2": (c1 * c2).norm(),
        "compatible": {
            "spin1_up": is_compatible(&up, &essential),
            "spins23_opposite": is_compatible(&pair_opposite_projector(), &essential),
            "spin1_down": is_compatible(&down, &essential),
        },
        "margin_monotone": monotone,
        "epsilon": spec.epsilon,
        "event_at_last_theta": last.map(|u| u.event),
    });
    Ok(Output { name: "undecide", summary, table })
}

pub fn oracle_check(ctx: &Context) -> Result<(Output, bool)> {
    let report = full_suite(ctx.seed)?;
    let mut table = Table::new(&["check", "max_deviation", "tolerance", "pass"]);
    for c in &report.checks {
        table.push(vec![c.name.clone().into(), c.max_deviation.into(), c.tolerance.into(), c.pass.into()]);
    }
    let summary = json!({ "seed": ctx.seed, "overall": report.overall });
    Ok((Output { name: "oracle_check", summary, table }, report.overall))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(text: &str) -> Context {
        Context { scenario: Scenario::parse(text, "t").unwrap(), seed: 3, preset: None, n: None }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn zurek_needs_n() {
        let c = ctx(r#"{"coupling_law": {"fixed": 1}, "times": {"start": 0, "stop": 1, "points": 3}}"#);
        let err = zurek_run(&c).unwrap_err();
        assert!(err.downcast_ref::<crate::scenario::SchemaError>().is_some());
    }

    #[test]
    fn zurek_curve_columns() {
        let c = ctx(r#"{"n": 3, "coupling_law": {"fixed": 1}, "spin_states": "balanced",
                      "times": {"start": 0, "stop": 3.14159, "points": 9}}"#);
        let out = zurek_run(&c).unwrap();
        assert_eq!(out.table.columns, vec!["t_s", "log10_abs_z", "phase_rad", "log10_abs_z_damped"]);
        assert_eq!(out.table.rows.len(), 9);
    }

    #[test]
    fn strong_coupling_is_a_regime_error() {
        let c = ctx(r#"{"n": 2, "coupling_law": {"fixed": 5}, "pass": {"b_plus": 1, "b_minus": 10, "tau": 1}}"#);
        let err = cavity_run(&c).unwrap_err();
        assert!(matches!(err.downcast_ref::<decolab::Error>(), Some(decolab::Error::Regime(_))));
    }

    #[test]
    fn nucleon_fails_mass_moment() {
        let c = Context { preset: Some("nucleon".into()), n: Some(1e5), ..ctx("{}") };
        let out = feasibility(&c).unwrap();
        assert_eq!(out.summary["overall"], false);
        let failed = out.summary["failed"].as_array().unwrap();
        assert!(failed.iter().any(|f| f == "mass_moment"));
    }

    #[test]
    fn unknown_preset() {
        let c = Context { preset: Some("unobtainium".into()), ..ctx("{}") };
        assert!(feasibility(&c).is_err());
    }

    #[test]
    fn undecide_summary() {
        let c = ctx(r#"{"undecide": {"c1": [0.6, 0], "c2": [0.8, 0], "omega": 2},
                       "thetas": {"start": 0, "stop": 10, "points": 11}}"#);
        let out = undecide(&c).unwrap();
        assert!((out.summary["trace_distance_pure_vs_mixture"].as_f64().unwrap() - 0.48).abs() < 1e-10);
        assert_eq!(out.summary["margin_monotone"], true);
        assert_eq!(out.summary["compatible"]["spin1_down"], false);
    }
}
