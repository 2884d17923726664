//! Scenario files: one JSON object per run. Unknown keys are rejected and
//! every error carries the line and column it refers to.

use std::fmt;
use std::path::Path;

use decolab::cavity::PassParams;
use decolab::realclock::ClockChannel;
use decolab::sampling::{CouplingLaw, SpinStateLaw};
use decolab::{PhysicalScenario, QubitAmplitudes};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Zurek,
    Cavity,
}

/// `[re, im]` pairs for the needle amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl SystemSpec {
    pub fn amplitudes(&self) -> decolab::Result<QubitAmplitudes> {
        QubitAmplitudes::new(Complex64::new(self.a[0], self.a[1]), Complex64::new(self.b[0], self.b[1]))
    }
}

/// Pass parameters as angular frequencies (rad/s) and a pass time (s).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassSpec {
    pub b_plus: f64,
    pub b_minus: f64,
    pub tau: f64,
}

impl PassSpec {
    /// The coupling is taken per spin from the bath, so the common value is 0.
    pub fn params(&self) -> decolab::Result<PassParams> {
        PassParams::from_frequencies(0.0, self.b_plus, self.b_minus, self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSpec {
    pub needle: Option<String>,
    pub environment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let x = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * x,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * x).exp(),
                }
            })
            .collect()
    }

    fn check(&self) -> Result<(), String> {
        if self.points == 0 {
            return Err("grid needs at least one point".into());
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(format!("grid needs finite start <= stop, got [{}, {}]", self.start, self.stop));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err("log grid needs start > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UndecideSpec {
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    /// Pointer Bohr frequency, rad/s.
    pub omega: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    decolab::undecidability::DEFAULT_EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Table,
    Summary,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Subcommand the file is meant for; checked when present.
    pub command: Option<String>,
    pub model: Option<Model>,
    pub n: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub system: Option<SystemSpec>,
    pub coupling_law: Option<CouplingLaw>,
    #[serde(default)]
    pub spin_states: SpinStateLaw,
    #[serde(rename = "pass")]
    pub pass_spec: Option<PassSpec>,
    pub physical: Option<PhysicalScenario>,
    pub species: Option<SpeciesSpec>,
    pub clock: Option<ClockChannel>,
    pub times: Option<GridSpec>,
    pub thetas: Option<GridSpec>,
    pub sizes: Option<Vec<u64>>,
    pub replicates: Option<usize>,
    pub undecide: Option<UndecideSpec>,
    pub outputs: Option<Vec<Artifact>>,
    #[serde(skip)]
    file: String,
    #[serde(skip)]
    text: String,
}

/// A scenario file that does not match the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.column, self.message)
    }
}

impl std::error::Error for SchemaError {}

/// Position of the first `"key":` in the text, 1-based.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(col) = line.find(&needle) {
            let rest = line[col + needle.len()..].trim_start();
            if rest.starts_with(':') {
                return (i + 1, col + 1);
            }
        }
    }
    (1, 1)
}

impl Scenario {
    pub fn parse(text: &str, file: &str) -> Result<Scenario, SchemaError> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| SchemaError {
            file: file.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })?;
        s.file = file.to_string();
        s.text = text.to_string();
        if let Err((key, message)) = s.check() {
            let (line, column) = locate(text, key);
            return Err(SchemaError { file: file.to_string(), line, column, message });
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> anyhow::Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Scenario::parse(&text, &path.display().to_string())?)
    }

    /// The scenario used when no file is given.
    pub fn empty() -> Scenario {
        Scenario::parse("{}", "<default>").expect("empty scenario is valid")
    }

    fn check(&self) -> Result<(), (&'static str, String)> {
        if let Some(n) = self.n {
            if !(n >= 1.0) || !n.is_finite() {
                return Err(("n", format!("n must be a finite number >= 1, got {n}")));
            }
        }
        if let Some(law) = &self.coupling_law {
            law.validate().map_err(|e| ("coupling_law", e.to_string()))?;
        }
        if let Some(sys) = &self.system {
            sys.amplitudes().map_err(|e| ("system", e.to_string()))?;
        }
        if let Some(p) = &self.pass_spec {
            p.params().map_err(|e| ("pass", e.to_string()))?;
        }
        if let Some(p) = &self.physical {
            p.validate().map_err(|e| ("physical", e.to_string()))?;
        }
        if let Some(c) = &self.clock {
            c.validate().map_err(|e| ("clock", e.to_string()))?;
        }
        if let Some(g) = &self.times {
            g.check().map_err(|m| ("times", m))?;
        }
        if let Some(g) = &self.thetas {
            g.check().map_err(|m| ("thetas", m))?;
            if g.start < 0.0 {
                return Err(("thetas", "theta must be >= 0".into()));
            }
        }
        if let Some(sizes) = &self.sizes {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(("sizes", "sizes must be a nonempty list of counts >= 1".into()));
            }
        }
        if self.replicates == Some(0) {
            return Err(("replicates", "replicates must be >= 1".into()));
        }
        Ok(())
    }

    /// Error for a missing or unusable field, anchored like a parse error.
    pub fn field_error(&self, key: &'static str, message: impl Into<String>) -> SchemaError {
        let (line, column) = locate(&self.text, key);
        SchemaError { file: self.file.clone(), line, column, message: message.into() }
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, key: &'static str) -> Result<&'a T, SchemaError> {
        value.as_ref().ok_or_else(|| self.field_error(key, format!("missing required field \"{key}\"")))
    }

    /// `n` as a count of spins.
    pub fn count(&self) -> Result<usize, SchemaError> {
        let n = *self.require(&self.n, "n")?;
        if n.fract() != 0.0 || n > 1e7 {
            return Err(self.field_error("n", format!("n must be a whole number of spins up to 1e7, got {n}")));
        }
        Ok(n as usize)
    }

    pub fn system_amplitudes(&self) -> QubitAmplitudes {
        self.system.and_then(|s| s.amplitudes().ok()).unwrap_or_else(QubitAmplitudes::plus_x)
    }

    pub fn clock_channel(&self) -> ClockChannel {
        self.clock.or_else(|| self.physical.map(|p| ClockChannel::from_constants(&p.constants))).unwrap_or_default()
    }

    pub fn wants(&self, a: Artifact) -> bool {
        self.outputs.as_ref().is_none_or(|o| o.contains(&a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_are_anchored() {
        let err = Scenario::parse("{\n  \"n\": 3,\n  \"seed\": x\n}", "s.json").unwrap_err();
        assert_eq!((err.line, err.file.as_str()), (3, "s.json"));
        assert!(err.to_string().starts_with("s.json:3:"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Scenario::parse("{\n  \"bogus\": 1\n}", "s.json").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn zero_n_points_at_its_line() {
        let err = Scenario::parse("{\n  \"model\": \"zurek\",\n  \"n\": 0\n}", "s.json").unwrap_err();
        assert_eq!((err.line, err.column), (3, 3));
    }

    #[test]
    fn full_document() {
        let text = r#"{
            "command": "zurek-run", "model": "zurek", "n": 4, "seed": 9,
            "system": {"a": [0.6, 0.0], "b": [0.0, 0.8]},
            "coupling_law": {"uniform": [0.5, 1.5]}, "spin_states": "balanced",
            "times": {"start": 0, "stop": 10, "points": 11},
            "thetas": {"start": 1e-6, "stop": 1, "points": 7, "spacing": "log"},
            "outputs": ["table"]
        }"#;
        let s = Scenario::parse(text, "x").unwrap();
        assert_eq!(s.count().unwrap(), 4);
        assert_eq!(s.times.unwrap().values()[10], 10.0);
        let th = s.thetas.unwrap().values();
        assert!((th[6] - 1.0).abs() < 1e-15 && (th[3] - 1e-3).abs() < 1e-15);
        assert!(s.wants(Artifact::Table) && !s.wants(Artifact::Summary));
        assert!((s.system_amplitudes().b().im - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bad_values_rejected() {
        for text in [
            r#"{"coupling_law": {"uniform": [2, 1]}}"#,
            r#"{"system": {"a": [1, 0], "b": [1, 0]}}"#,
            r#"{"times": {"start": 1, "stop": 0, "points": 3}}"#,
            r#"{"sizes": []}"#,
            r#"{"n": 2.5e400}"#,
        ] {
            assert!(Scenario::parse(text, "x").is_err(), "{text}");
        }
        let s = Scenario::parse(r#"{"n": 2.5}"#, "x").unwrap();
        assert!(s.count().is_err());
    }
}
