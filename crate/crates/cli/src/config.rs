//! Experiment configuration: parsing, validation and canonical form.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use floquet_core::device::SidebandKind;
use floquet_core::experiments::{DptMode, DptModel, PhaseParameter, RabiMode};

use crate::error::{CliError, Violation};

pub const PROTOCOLS: [&str; 6] = ["sideband_rabi", "ab_interference", "entangled_prep", "calibrate", "dpt_sweep", "custom_evolution"];

/// Uniform grid or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Linspace { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                &n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    fn check(&self, path: &str, out: &mut Vec<Violation>) {
        let v = self.values();
        if v.is_empty() {
            out.push(Violation::new(path, "grid is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            out.push(Violation::new(path, "grid values must be finite"));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandRabiParams {
    #[serde(default)]
    pub bond: usize,
    #[serde(default = "blue")]
    pub kind: SidebandKind,
    #[serde(default = "g_default")]
    pub g_mhz: f64,
    pub duration_ns: f64,
    #[serde(default)]
    pub mode: RabiMode,
    #[serde(default = "two")]
    pub sample_every_ns: f64,
    #[serde(default = "ramp_default")]
    pub ramp_ns: f64,
}

/// Bond phases of a three-qubit chain, rad.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainPhases {
    #[serde(default)]
    pub phi_b12: f64,
    #[serde(default)]
    pub phi_r12: f64,
    #[serde(default)]
    pub phi_b23: f64,
    #[serde(default)]
    pub phi_r23: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialLoopState {
    #[default]
    Ground,
    Entangled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTarget {
    pub parameter: String,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub targets: Vec<SweepTarget>,
    pub grid: Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbParams {
    #[serde(default = "g_default")]
    pub g_mhz: f64,
    /// Per-bond `[g_blue, g_red]`, overriding `g_mhz`.
    #[serde(default)]
    pub strengths: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub phases: ChainPhases,
    #[serde(default)]
    pub initial: InitialLoopState,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    pub duration_ns: f64,
    #[serde(default = "five")]
    pub sample_every_ns: f64,
    #[serde(default)]
    pub allow_unequal: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepMode {
    Ideal,
    #[default]
    Noisy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepParams {
    #[serde(default)]
    pub mode: PrepMode,
    #[serde(default = "x_default")]
    pub x_ns: f64,
    #[serde(default = "g_default")]
    pub hopping_mhz: f64,
}

/// `"random"` or explicit `[blue, red]` offsets per bond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Offsets {
    Named(String),
    Explicit(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrateParams {
    #[serde(default = "six")]
    pub n_qubits: usize,
    #[serde(default = "g_default")]
    pub g_mhz: f64,
    #[serde(default = "random_offsets")]
    pub offsets: Offsets,
    /// Independent random injections, each seeded from `seed + k`.
    #[serde(default = "one_usize")]
    pub injections: usize,
    #[serde(default)]
    pub shots: Option<usize>,
    #[serde(default = "phase_points_default")]
    pub phase_points: usize,
    #[serde(default)]
    pub probe_time_ns: Option<f64>,
}

/// One size or several.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

impl Sizes {
    pub fn list(&self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![*n],
            Sizes::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DptParams {
    #[serde(default = "six_sizes")]
    pub n: Sizes,
    #[serde(default = "g_default")]
    pub j_mhz: f64,
    pub bz_over_j: Grid,
    #[serde(default = "horizon_default")]
    pub horizon_ns: f64,
    #[serde(default = "two")]
    pub sample_every_ns: f64,
    #[serde(default)]
    pub mode: DptMode,
    #[serde(default = "yes")]
    pub readout: bool,
    #[serde(default)]
    pub model: DptModel,
    #[serde(default = "three")]
    pub smoothing_window: usize,
    /// Also write the Loschmidt echo and rate function maps.
    #[serde(default = "yes")]
    pub write_series: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondSpec {
    pub bond: usize,
    #[serde(default)]
    pub g_blue: f64,
    #[serde(default)]
    pub phi_blue: f64,
    #[serde(default)]
    pub g_red: f64,
    #[serde(default)]
    pub phi_red: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomParams {
    pub n_qubits: usize,
    pub couplings: Vec<BondSpec>,
    #[serde(default)]
    pub detuning_blue_mhz: f64,
    /// Product state over `0 1 + -`, one character per qubit.
    pub initial: String,
    pub duration_ns: f64,
    #[serde(default = "two")]
    pub sample_every_ns: f64,
    /// Lindblad noise from the device's first `n_qubits` qubits.
    #[serde(default)]
    pub noise: bool,
    #[serde(default = "one_ns")]
    pub dt_ns: f64,
}

fn blue() -> SidebandKind {
    SidebandKind::Blue
}
fn g_default() -> f64 {
    0.75
}
fn two() -> f64 {
    2.0
}
fn five() -> f64 {
    5.0
}
fn one() -> f64 {
    1.0
}
fn one_ns() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn three() -> usize {
    3
}
fn six() -> usize {
    6
}
fn six_sizes() -> Sizes {
    Sizes::One(6)
}
fn yes() -> bool {
    true
}
fn ramp_default() -> f64 {
    floquet_core::device::SidebandDrive::DEFAULT_RAMP_NS
}
fn x_default() -> f64 {
    30.0
}
fn horizon_default() -> f64 {
    500.0
}
fn phase_points_default() -> usize {
    24
}
fn random_offsets() -> Offsets {
    Offsets::Named("random".into())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Protocol {
    SidebandRabi(SidebandRabiParams),
    AbInterference(AbParams),
    EntangledPrep(PrepParams),
    Calibrate(CalibrateParams),
    DptSweep(DptParams),
    CustomEvolution(CustomParams),
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::SidebandRabi(_) => "sideband_rabi",
            Protocol::AbInterference(_) => "ab_interference",
            Protocol::EntangledPrep(_) => "entangled_prep",
            Protocol::Calibrate(_) => "calibrate",
            Protocol::DptSweep(_) => "dpt_sweep",
            Protocol::CustomEvolution(_) => "custom_evolution",
        }
    }

    fn params_value(&self) -> Value {
        let v = match self {
            Protocol::SidebandRabi(p) => serde_json::to_value(p),
            Protocol::AbInterference(p) => serde_json::to_value(p),
            Protocol::EntangledPrep(p) => serde_json::to_value(p),
            Protocol::Calibrate(p) => serde_json::to_value(p),
            Protocol::DptSweep(p) => serde_json::to_value(p),
            Protocol::CustomEvolution(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    /// Device file; `None` selects the bundled six-qubit table.
    pub device: Option<PathBuf>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub description: Option<String>,
}

/// A parsed config plus the warnings raised on the way.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// Canonical JSON: sorted keys, every default spelled out.
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("protocol".into(), Value::String(self.protocol.name().into()));
        m.insert("params".into(), self.protocol.params_value());
        m.insert("device".into(), self.device.as_ref().map_or(Value::Null, |p| Value::String(p.display().to_string())));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("output".into(), self.output.as_ref().map_or(Value::Null, |p| Value::String(p.display().to_string())));
        m.insert("description".into(), self.description.as_ref().map_or(Value::Null, |s| Value::String(s.clone())));
        Value::Object(m)
    }

    pub fn to_canonical_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("values serialize")
    }

    /// Every invariant breach, each with its key path.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let positive = |out: &mut Vec<Violation>, key: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                out.push(Violation::new(&format!("params.{key}"), &format!("must be positive, got {x}")));
            }
        };
        let non_negative = |out: &mut Vec<Violation>, key: &str, x: f64| {
            if !(x >= 0.0 && x.is_finite()) {
                out.push(Violation::new(&format!("params.{key}"), &format!("must be non-negative, got {x}")));
            }
        };
        match &self.protocol {
            Protocol::SidebandRabi(p) => {
                positive(&mut out, "duration_ns", p.duration_ns);
                positive(&mut out, "sample_every_ns", p.sample_every_ns);
                non_negative(&mut out, "g_mhz", p.g_mhz);
                non_negative(&mut out, "ramp_ns", p.ramp_ns);
                if p.bond > 4 {
                    out.push(Violation::new("params.bond", &format!("bond {} does not exist on a six-qubit chain", p.bond)));
                }
            }
            Protocol::AbInterference(p) => {
                positive(&mut out, "duration_ns", p.duration_ns);
                positive(&mut out, "sample_every_ns", p.sample_every_ns);
                non_negative(&mut out, "g_mhz", p.g_mhz);
                if let Some(s) = &p.strengths {
                    if s.len() != 2 {
                        out.push(Violation::new("params.strengths", &format!("need 2 bonds, got {}", s.len())));
                    }
                    if s.iter().flatten().any(|g| !(*g >= 0.0)) {
                        out.push(Violation::new("params.strengths", "strengths must be non-negative"));
                    }
                }
                if let Some(sw) = &p.sweep {
                    sw.grid.check("params.sweep.grid", &mut out);
                    for (k, t) in sw.targets.iter().enumerate() {
                        match t.parameter.parse::<PhaseParameter>() {
                            Ok(PhaseParameter::Blue(b) | PhaseParameter::Red(b)) if b > 1 => out.push(Violation::new(
                                &format!("params.sweep.targets[{k}].parameter"),
                                &format!("bond {b} is outside the three-qubit chain"),
                            )),
                            Ok(_) => {}
                            Err(e) => out.push(Violation::new(&format!("params.sweep.targets[{k}].parameter"), &e.to_string())),
                        }
                    }
                }
            }
            Protocol::EntangledPrep(p) => {
                positive(&mut out, "x_ns", p.x_ns);
                positive(&mut out, "hopping_mhz", p.hopping_mhz);
            }
            Protocol::Calibrate(p) => {
                if !(3..=12).contains(&p.n_qubits) {
                    out.push(Violation::new("params.n_qubits", &format!("must be in 3..=12, got {}", p.n_qubits)));
                }
                positive(&mut out, "g_mhz", p.g_mhz);
                if p.injections == 0 {
                    out.push(Violation::new("params.injections", "must be at least 1"));
                }
                if p.phase_points < 4 {
                    out.push(Violation::new("params.phase_points", "must be at least 4"));
                }
                if p.shots == Some(0) {
                    out.push(Violation::new("params.shots", "must be positive"));
                }
                if let Some(t) = p.probe_time_ns {
                    positive(&mut out, "probe_time_ns", t);
                }
                match &p.offsets {
                    Offsets::Named(s) if s == "random" || s == "none" => {}
                    Offsets::Named(s) => out.push(Violation::new("params.offsets", &format!("expected \"random\", \"none\" or a list, got \"{s}\""))),
                    Offsets::Explicit(v) if v.len() + 1 != p.n_qubits => out.push(Violation::new(
                        "params.offsets",
                        &format!("{} offset pairs for {} qubits", v.len(), p.n_qubits),
                    )),
                    Offsets::Explicit(_) => {}
                }
            }
            Protocol::DptSweep(p) => {
                p.bz_over_j.check("params.bz_over_j", &mut out);
                let sizes = p.n.list();
                if sizes.is_empty() || sizes.iter().any(|n| !(2..=6).contains(n)) {
                    out.push(Violation::new("params.n", &format!("sizes must be in 2..=6, got {sizes:?}")));
                }
                positive(&mut out, "j_mhz", p.j_mhz);
                positive(&mut out, "horizon_ns", p.horizon_ns);
                positive(&mut out, "sample_every_ns", p.sample_every_ns);
                if p.smoothing_window == 0 || p.smoothing_window % 2 == 0 {
                    out.push(Violation::new("params.smoothing_window", "must be a positive odd number"));
                }
            }
            Protocol::CustomEvolution(p) => {
                positive(&mut out, "duration_ns", p.duration_ns);
                positive(&mut out, "sample_every_ns", p.sample_every_ns);
                positive(&mut out, "dt_ns", p.dt_ns);
                if !(1..=8).contains(&p.n_qubits) {
                    out.push(Violation::new("params.n_qubits", &format!("must be in 1..=8, got {}", p.n_qubits)));
                }
                if p.initial.chars().count() != p.n_qubits || p.initial.chars().any(|c| !"01+-".contains(c)) {
                    out.push(Violation::new("params.initial", "one of `0 1 + -` per qubit"));
                }
                for (k, c) in p.couplings.iter().enumerate() {
                    if p.couplings[..k].iter().any(|d| d.bond == c.bond) {
                        out.push(Violation::new(&format!("params.couplings[{k}].bond"), &format!("bond {} listed twice", c.bond)));
                    }
                    if c.bond + 1 >= p.n_qubits {
                        out.push(Violation::new(&format!("params.couplings[{k}].bond"), &format!("bond {} outside the chain", c.bond)));
                    }
                    if !(c.g_blue >= 0.0 && c.g_red >= 0.0) {
                        out.push(Violation::new(&format!("params.couplings[{k}]"), "strengths must be non-negative"));
                    }
                }
            }
        }
        out
    }
}

fn typed<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, Violation> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        Violation::new(&path, &e.into_inner().to_string())
    })
}

/// Keys present in `input` but absent from the canonical re-serialization.
fn unknown_keys(input: &Value, canonical: &Value, path: &str, out: &mut Vec<String>) {
    match (input, canonical) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &p, out),
                    None => out.push(p),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Parse config text. Relative device paths are resolved against `base`.
pub fn parse_config_str(text: &str, base: Option<&Path>) -> Result<Parsed, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(vec![Violation::new("", &format!("parse error: {e}"))]))?;
    let Value::Object(top) = &value else {
        return Err(CliError::Config(vec![Violation::new("", "config must be a JSON object")]));
    };
    let mut violations = Vec::new();
    let protocol_name = match top.get("protocol") {
        Some(Value::String(s)) if PROTOCOLS.contains(&s.as_str()) => Some(s.clone()),
        Some(Value::String(s)) => {
            violations.push(Violation::new("protocol", &format!("unknown protocol `{s}`; expected one of {}", PROTOCOLS.join(", "))));
            None
        }
        Some(_) => {
            violations.push(Violation::new("protocol", "must be a string"));
            None
        }
        None => {
            violations.push(Violation::new("protocol", "missing key"));
            None
        }
    };
    let params = top.get("params").cloned().unwrap_or(Value::Object(Map::new()));
    let protocol = protocol_name.and_then(|name| {
        let r = match name.as_str() {
            "sideband_rabi" => typed(params, "params").map(Protocol::SidebandRabi),
            "ab_interference" => typed(params, "params").map(Protocol::AbInterference),
            "entangled_prep" => typed(params, "params").map(Protocol::EntangledPrep),
            "calibrate" => typed(params, "params").map(Protocol::Calibrate),
            "dpt_sweep" => typed(params, "params").map(Protocol::DptSweep),
            _ => typed(params, "params").map(Protocol::CustomEvolution),
        };
        r.map_err(|v| violations.push(v)).ok()
    });
    let device = match top.get("device") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => {
            let p = PathBuf::from(s);
            let resolved = match base {
                Some(b) if p.is_relative() => b.join(&p),
                _ => p,
            };
            if !resolved.exists() {
                violations.push(Violation::new("device", &format!("file `{}` does not exist", resolved.display())));
            }
            Some(resolved)
        }
        Some(_) => {
            violations.push(Violation::new("device", "must be a path string"));
            None
        }
    };
    let seed = match top.get("seed") {
        None | Some(Value::Null) => 0,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            violations.push(Violation::new("seed", "must be a non-negative integer"));
            0
        }),
    };
    let string_key = |key: &str, violations: &mut Vec<Violation>| match top.get(key) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            violations.push(Violation::new(key, "must be a string"));
            None
        }
    };
    let output = string_key("output", &mut violations).map(PathBuf::from);
    let description = string_key("description", &mut violations);
    let Some(protocol) = protocol else {
        return Err(CliError::Config(violations));
    };
    let config = ExperimentConfig { protocol, device, seed, output, description };
    violations.extend(config.violations());
    if !violations.is_empty() {
        return Err(CliError::Config(violations));
    }
    let mut unknown = Vec::new();
    unknown_keys(&value, &config.to_value(), "", &mut unknown);
    let warnings = unknown.into_iter().map(|k| format!("unknown key `{k}` ignored")).collect();
    Ok(Parsed { config, warnings })
}

pub fn parse_config(path: &Path) -> Result<Parsed, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(vec![Violation::new("", &format!("cannot read `{}`: {e}", path.display()))]))?;
    parse_config_str(&text, path.parent())
}
