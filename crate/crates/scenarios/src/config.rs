//! Scenario configuration: a flat JSON object with a `kind` key.
//!
//! Every key except `kind` is optional and falls back to the reference value
//! of that kind. Unknown keys are errors.

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const KINDS: [&str; 4] = ["rabi", "invariant", "reduce", "susy"];

/// Largest accepted number of time steps or grid points.
pub const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for KeyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub errors: Vec<KeyError>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.errors.iter().map(|e| e.to_string()).collect();
        write!(f, "invalid config: {}", parts.join("; "))
    }
}

impl ConfigError {
    fn single(key: &str, message: impl Into<String>) -> Self {
        Self {
            errors: vec![KeyError { key: key.into(), message: message.into() }],
        }
    }

    pub fn mentions(&self, key: &str) -> bool {
        self.errors.iter().any(|e| e.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingShape {
    Constant,
    /// `Ω·exp(−(t − t_center)²/(2 width²))`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    pub omega_a: f64,
    pub omega_b: f64,
    /// Real coupling amplitude `Ω` of `V_ab`.
    pub coupling: f64,
    pub shape: CouplingShape,
    pub t_center: f64,
    pub width: f64,
    pub t_end: f64,
    /// Upper bound on the step; the grid uses `ceil(t_end/dt)` steps.
    pub dt: f64,
    /// Level initially occupied, 0 (`a`) or 1 (`b`).
    pub initial_level: usize,
    /// Refinement factor of the self-convergence run.
    pub refine: usize,
    pub closed_form_tol: f64,
    pub guard_tol: f64,
    pub purity_tol: f64,
    pub cross_tol: f64,
    pub fidelity_tol: f64,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            omega_a: 0.0,
            omega_b: 0.0,
            coupling: 1.0,
            shape: CouplingShape::Constant,
            t_center: std::f64::consts::PI,
            width: 1.0,
            t_end: std::f64::consts::TAU,
            dt: 1e-3,
            initial_level: 0,
            refine: 10,
            closed_form_tol: 1e-6,
            guard_tol: 1e-10,
            purity_tol: 1e-8,
            cross_tol: 1e-7,
            fidelity_tol: 1e-8,
        }
    }
}

/// Circularly driven spin, `H = (ω₀/2)σz + Ω(cos ωt σx + sin ωt σy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantConfig {
    pub splitting: f64,
    pub coupling: f64,
    pub drive_frequency: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Initial invariant `c0·1 + cx·σx + cy·σy + cz·σz`.
    pub seed: [f64; 4],
    pub residual_tol: f64,
    pub order_ratio_min: f64,
    pub spread_tol: f64,
    pub fidelity_tol: f64,
    pub static_tol: f64,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        Self {
            splitting: 1.0,
            coupling: 0.25,
            drive_frequency: 1.0,
            t_end: 1.0,
            steps: 1000,
            seed: [0.0, 0.0, 0.0, 1.0],
            residual_tol: 1e-6,
            order_ratio_min: 3.5,
            spread_tol: 1e-10,
            fidelity_tol: 1e-8,
            static_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionFrame {
    /// `V(t) = exp(−iωtσz/2)`, co-rotating with the drive.
    Rotating,
    /// `V = 1`; the reduction does nothing and the checks are expected to fail.
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceConfig {
    pub splitting: f64,
    pub coupling: f64,
    pub drive_frequency: f64,
    pub t_end: f64,
    pub steps: usize,
    pub frame: ReductionFrame,
    pub variation_tol: f64,
    pub off_diagonal_tol: f64,
    pub phase_tol: f64,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self {
            splitting: 1.0,
            coupling: 0.3,
            drive_frequency: 1.0,
            t_end: 2.0,
            steps: 8000,
            frame: ReductionFrame::Rotating,
            variation_tol: 1e-8,
            off_diagonal_tol: 1e-8,
            phase_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Superpotential {
    /// `W = λx`.
    Linear,
    /// `W = λ tanh x`.
    Tanh,
    /// `W = 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePotential {
    /// `V = λ²x²`.
    Harmonic,
    /// `V = −λ(λ + s) sech²x`.
    PoschlTeller,
    /// `V = 0`.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `ψ₀` must decay to the walls.
    Decay,
    /// The walls are physical.
    Box,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SusyConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub hbar: f64,
    pub mass: f64,
    pub superpotential: Superpotential,
    pub potential: BasePotential,
    pub lambda: f64,
    pub boundary: Boundary,
    pub pairs: usize,
    pub potential_tol: f64,
    pub annihilation_tol: f64,
    pub pair_tol: f64,
    pub epsilon_tol: f64,
    pub shift_tol: f64,
    pub shift_ratio_min: f64,
    pub commutator_rel_tol: f64,
    pub order_min: f64,
}

impl Default for SusyConfig {
    fn default() -> Self {
        Self {
            x_min: -10.0,
            x_max: 10.0,
            points: 2001,
            hbar: 1.0,
            mass: 0.5,
            superpotential: Superpotential::Linear,
            potential: BasePotential::Harmonic,
            lambda: 1.0,
            boundary: Boundary::Decay,
            pairs: 5,
            potential_tol: 1e-12,
            annihilation_tol: 1e-6,
            pair_tol: 1e-3,
            epsilon_tol: 1e-4,
            shift_tol: 1e-4,
            shift_ratio_min: 4.0,
            commutator_rel_tol: 1e-12,
            order_min: 1.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KindConfig {
    Rabi(RabiConfig),
    Invariant(InvariantConfig),
    Reduce(ReduceConfig),
    Susy(SusyConfig),
}

impl KindConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            KindConfig::Rabi(_) => "rabi",
            KindConfig::Invariant(_) => "invariant",
            KindConfig::Reduce(_) => "reduce",
            KindConfig::Susy(_) => "susy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: KindConfig,
    /// Output directory from the `out` key, if any.
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        self.params.kind()
    }

    pub fn reference(kind: &str) -> Option<Self> {
        let params = match kind {
            "rabi" => KindConfig::Rabi(RabiConfig::default()),
            "invariant" => KindConfig::Invariant(InvariantConfig::default()),
            "reduce" => KindConfig::Reduce(ReduceConfig::default()),
            "susy" => KindConfig::Susy(SusyConfig::default()),
            _ => return None,
        };
        Some(Self { params, out: None })
    }
}

fn field_names<T: Serialize + Default>() -> Vec<String> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn parse_kind<T: Serialize + DeserializeOwned + Default>(body: Map<String, Value>) -> Result<T, ConfigError> {
    let known = field_names::<T>();
    let mut errors: Vec<KeyError> = body
        .keys()
        .filter(|k| !known.contains(k))
        .map(|k| KeyError {
            key: k.clone(),
            message: format!("unknown key; valid keys are {}", known.join(", ")),
        })
        .collect();
    for (k, v) in &body {
        if !known.contains(k) {
            continue;
        }
        let mut one = Map::new();
        one.insert(k.clone(), v.clone());
        if let Err(e) = serde_json::from_value::<T>(Value::Object(one)) {
            errors.push(KeyError { key: k.clone(), message: e.to_string() });
        }
    }
    if !errors.is_empty() {
        return Err(ConfigError { errors });
    }
    serde_json::from_value(Value::Object(body)).map_err(|e| ConfigError::single("config", e.to_string()))
}

struct Checker(Vec<KeyError>);

impl Checker {
    fn fail(&mut self, key: &str, message: String) {
        self.0.push(KeyError { key: key.into(), message });
    }

    fn finite(&mut self, key: &str, v: f64) {
        if !v.is_finite() {
            self.fail(key, format!("must be finite, got {v}"));
        }
    }

    fn positive(&mut self, key: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fail(key, format!("must be > 0, got {v}"));
        }
    }

    fn count(&mut self, key: &str, v: usize, lo: usize) {
        if v < lo || v > MAX_STEPS {
            self.fail(key, format!("must be in [{lo}, {MAX_STEPS}], got {v}"));
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { errors: self.0 })
        }
    }
}

fn validate(params: &KindConfig) -> Result<(), ConfigError> {
    let mut c = Checker(Vec::new());
    match params {
        KindConfig::Rabi(r) => {
            for (k, v) in [("omega_a", r.omega_a), ("omega_b", r.omega_b), ("coupling", r.coupling), ("t_center", r.t_center)] {
                c.finite(k, v);
            }
            for (k, v) in [
                ("t_end", r.t_end),
                ("dt", r.dt),
                ("width", r.width),
                ("closed_form_tol", r.closed_form_tol),
                ("guard_tol", r.guard_tol),
                ("purity_tol", r.purity_tol),
                ("cross_tol", r.cross_tol),
                ("fidelity_tol", r.fidelity_tol),
            ] {
                c.positive(k, v);
            }
            if r.initial_level > 1 {
                c.fail("initial_level", format!("must be 0 or 1, got {}", r.initial_level));
            }
            c.count("refine", r.refine, 2);
            if r.t_end > 0.0 && r.dt > 0.0 {
                let steps = (r.t_end / r.dt).ceil();
                if !(2.0..=(MAX_STEPS as f64 / r.refine.max(1) as f64)).contains(&steps) {
                    c.fail("dt", format!("t_end/dt = {steps} steps is outside the supported range"));
                }
            }
        }
        KindConfig::Invariant(r) => {
            for (k, v) in [("splitting", r.splitting), ("coupling", r.coupling), ("drive_frequency", r.drive_frequency)] {
                c.finite(k, v);
            }
            for (k, v) in [
                ("t_end", r.t_end),
                ("residual_tol", r.residual_tol),
                ("order_ratio_min", r.order_ratio_min),
                ("spread_tol", r.spread_tol),
                ("fidelity_tol", r.fidelity_tol),
                ("static_tol", r.static_tol),
            ] {
                c.positive(k, v);
            }
            c.count("steps", r.steps, 4);
            if r.seed.iter().any(|x| !x.is_finite()) || r.seed[1..].iter().all(|x| *x == 0.0) {
                c.fail("seed", "needs a finite, non-zero Pauli part so the invariant is non-degenerate".into());
            }
        }
        KindConfig::Reduce(r) => {
            for (k, v) in [("splitting", r.splitting), ("coupling", r.coupling), ("drive_frequency", r.drive_frequency)] {
                c.finite(k, v);
            }
            for (k, v) in [
                ("t_end", r.t_end),
                ("variation_tol", r.variation_tol),
                ("off_diagonal_tol", r.off_diagonal_tol),
                ("phase_tol", r.phase_tol),
            ] {
                c.positive(k, v);
            }
            c.count("steps", r.steps, 4);
        }
        KindConfig::Susy(r) => {
            c.finite("x_min", r.x_min);
            c.finite("x_max", r.x_max);
            if r.x_max.is_finite() && r.x_min.is_finite() && r.x_max <= r.x_min {
                c.fail("x_max", format!("must exceed x_min = {}", r.x_min));
            }
            c.count("points", r.points, 16);
            c.finite("lambda", r.lambda);
            for (k, v) in [
                ("hbar", r.hbar),
                ("mass", r.mass),
                ("potential_tol", r.potential_tol),
                ("annihilation_tol", r.annihilation_tol),
                ("pair_tol", r.pair_tol),
                ("epsilon_tol", r.epsilon_tol),
                ("shift_tol", r.shift_tol),
                ("shift_ratio_min", r.shift_ratio_min),
                ("commutator_rel_tol", r.commutator_rel_tol),
                ("order_min", r.order_min),
            ] {
                c.positive(k, v);
            }
            if r.pairs == 0 || r.pairs > 64 {
                c.fail("pairs", format!("must be in [1, 64], got {}", r.pairs));
            }
        }
    }
    c.finish()
}

/// Parses and validates a scenario configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::single("config", e.to_string()))?;
    let Value::Object(mut body) = value else {
        return Err(ConfigError::single("config", "expected a JSON object"));
    };
    let kind = match body.remove("kind") {
        Some(Value::String(s)) => s,
        Some(other) => return Err(ConfigError::single("kind", format!("expected a string, got {other}"))),
        None => return Err(ConfigError::single("kind", format!("missing; valid kinds are {}", KINDS.join(", ")))),
    };
    let out = match body.remove("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(ConfigError::single("out", format!("expected a path string, got {other}"))),
    };
    let params = match kind.as_str() {
        "rabi" => KindConfig::Rabi(parse_kind(body)?),
        "invariant" => KindConfig::Invariant(parse_kind(body)?),
        "reduce" => KindConfig::Reduce(parse_kind(body)?),
        "susy" => KindConfig::Susy(parse_kind(body)?),
        other => {
            return Err(ConfigError::single(
                "kind",
                format!("unknown kind {other:?}; valid kinds are {}", KINDS.join(", ")),
            ))
        }
    };
    validate(&params)?;
    Ok(ScenarioConfig { params, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rabi_gets_defaults() {
        let cfg = parse_config(r#"{"kind": "rabi"}"#).unwrap();
        assert_eq!(cfg.params, KindConfig::Rabi(RabiConfig::default()));
        assert_eq!(cfg.out, None);
    }

    #[test]
    fn misspelled_kind_lists_valid_kinds() {
        let err = parse_config(r#"{"kind": "rabl"}"#).unwrap_err();
        assert!(err.mentions("kind"));
        let msg = err.to_string();
        for k in KINDS {
            assert!(msg.contains(k), "{msg}");
        }
    }

    #[test]
    fn negative_dt_names_dt() {
        let err = parse_config(r#"{"kind": "rabi", "dt": -0.1}"#).unwrap_err();
        assert_eq!(err.errors.len(), 1);
        assert!(err.mentions("dt"));
    }

    #[test]
    fn unknown_and_mistyped_keys_are_all_reported() {
        let err = parse_config(r#"{"kind": "susy", "pionts": 10, "points": "many", "lambda": 2}"#).unwrap_err();
        assert!(err.mentions("pionts"));
        assert!(err.mentions("points"));
        assert!(!err.mentions("lambda"));
    }

    #[test]
    fn missing_kind_and_non_object() {
        assert!(parse_config(r#"{"dt": 1}"#).unwrap_err().mentions("kind"));
        assert!(parse_config("[1, 2]").unwrap_err().mentions("config"));
        assert!(parse_config("{").unwrap_err().mentions("config"));
    }

    #[test]
    fn enum_values_and_out() {
        let cfg = parse_config(r#"{"kind": "susy", "superpotential": "tanh", "potential": "poschl_teller", "out": "runs/pt"}"#)
            .unwrap();
        let KindConfig::Susy(s) = cfg.params else { panic!() };
        assert_eq!(s.superpotential, Superpotential::Tanh);
        assert_eq!(cfg.out, Some(PathBuf::from("runs/pt")));
        assert!(parse_config(r#"{"kind": "reduce", "frame": "spinning"}"#).unwrap_err().mentions("frame"));
    }

    #[test]
    fn range_checks() {
        assert!(parse_config(r#"{"kind": "susy", "x_min": 1, "x_max": 0}"#).unwrap_err().mentions("x_max"));
        assert!(parse_config(r#"{"kind": "invariant", "seed": [1, 0, 0, 0]}"#).unwrap_err().mentions("seed"));
        assert!(parse_config(r#"{"kind": "invariant", "steps": 2}"#).unwrap_err().mentions("steps"));
        assert!(parse_config(r#"{"kind": "rabi", "initial_level": 2}"#).unwrap_err().mentions("initial_level"));
    }

    #[test]
    fn reference_configs_validate() {
        for k in KINDS {
            let cfg = ScenarioConfig::reference(k).unwrap();
            validate(&cfg.params).unwrap();
        }
    }
}
