//! Run configuration.
//!
//! A run is described by one TOML document with typed blocks. The effective
//! configuration is assembled from four layers, later ones winning key by
//! key: built-in defaults, an optional preset, the `--config` file, and
//! command-line overrides. Validation runs once on the merged document and
//! reports every violation together.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::constitutive::{Laws, PressureLaw, ViscosityLaw};
use crate::error::{Error, Result};
use crate::evolve::{InitialData, SchemeConfig};
use crate::steady::BoundaryData;

/// Environment variable selecting the root under which output directories
/// are created when `--out` is not given.
pub const OUT_ENV: &str = "BAROTROPIC_NS_OUT";

const DEFAULTS: &str = r#"
seed = 0

[scheme]
n = 200
cfl_hyperbolic = 0.5
cfl_parabolic = 0.5
t_final = 10.0
stride = 100
vacuum_floor = 1e-8
right_closure = "neumann"

[evolve]
initial = "steady"

[sigma_map]
v_star_min = 0.1
v_star_max = 2.0
v_star_count = 40
alpha_min = 0.05
alpha_max = 4.0
alpha_count = 80

[diagnostics]
h3_delta1 = 0.6
h3_delta2 = 5.0
decay_tol = 1e-6

[figures]
kind = "connection"
w_max = 30.0
snapshot_times = [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]
"#;

const FIG4: &str = r#"
[problem]
half_length = 1.0
epsilon = 0.1
u_minus = 0.5
u_plus = 1.0
pressure = { type = "saint-venant", kappa = 1.0 }
viscosity = { type = "power", c = 1.0, a = 1.0 }

[scheme]
n = 200
t_final = 10.0

[evolve]
initial = "tanh(0.25,20)"

[figures]
kind = "dynamics"
"#;

const FIG3: &str = r#"
[problem]
half_length = 1.0
epsilon = 0.1
u_minus = 0.5
u_plus = 1.0
pressure = { type = "saint-venant", kappa = 1.0 }
viscosity = { type = "power", c = 1.0, a = 1.0 }

[figures]
kind = "connection"
"#;

const FIG2: &str = r#"
[problem]
half_length = 1.0
epsilon = 0.1
pressure = { type = "saint-venant", kappa = 1.0 }
viscosity = { type = "power", c = 1.0, a = 1.0 }

[figures]
kind = "g-curves"
alpha = 400.0
v_star_squared = 1000.0
w_max = 30.0
viscosity_variants = [
    { type = "power", c = 0.5, a = 0.5 },
    { type = "power", c = 1.0, a = 1.0 },
    { type = "power", c = 2.0, a = 2.0 },
]
"#;

const FIG1: &str = r#"
[problem]
half_length = 1.0
epsilon = 0.5
u_minus = 0.8
u_plus = 2.0
v_minus = 1.0
pressure = { type = "power", kappa = 1.0, gamma = 2.0 }
viscosity = { type = "power", c = 1.0, a = 1.0 }

[figures]
kind = "no-connection"
alpha = 3.0
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Steady,
    Evolve,
    SigmaMap,
    HyperbolicCheck,
    Figures,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Steady => "steady",
            Mode::Evolve => "evolve",
            Mode::SigmaMap => "sigma-map",
            Mode::HyperbolicCheck => "hyperbolic-check",
            Mode::Figures => "figures",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hard-coded parameter sets reproducing the published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    fn document(self) -> &'static str {
        match self {
            Preset::Fig1 => FIG1,
            Preset::Fig2 => FIG2,
            Preset::Fig3 => FIG3,
            Preset::Fig4 => FIG4,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown preset `{s}` (expected one of fig1, fig2, fig3, fig4)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PressureSpec {
    Power { kappa: f64, gamma: f64 },
    SaintVenant { kappa: f64 },
}

impl PressureSpec {
    pub fn law(self) -> PressureLaw {
        match self {
            PressureSpec::Power { kappa, gamma } => PressureLaw::PowerLaw { kappa, gamma },
            PressureSpec::SaintVenant { kappa } => PressureLaw::SaintVenant { kappa },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ViscositySpec {
    Power { c: f64, a: f64 },
    Constant { c: f64 },
}

impl ViscositySpec {
    pub fn law(self) -> ViscosityLaw {
        match self {
            ViscositySpec::Power { c, a } => ViscosityLaw::PowerLaw { c, a },
            ViscositySpec::Constant { c } => ViscosityLaw::Constant { c },
        }
    }

    pub fn describe(self) -> String {
        match self {
            ViscositySpec::Power { c, a } => format!("nu = {c} u^{a}"),
            ViscositySpec::Constant { c } => format!("nu = {c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub half_length: f64,
    pub epsilon: f64,
    pub pressure: PressureSpec,
    pub viscosity: ViscositySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_plus: Option<f64>,
    /// Left momentum; when absent it is fixed by the stationary jump relation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_minus: Option<f64>,
}

impl ProblemConfig {
    pub fn laws(&self) -> Result<Laws> {
        Laws::new(self.pressure.law(), self.viscosity.law())
    }

    pub fn boundary_values(&self) -> Result<(f64, f64)> {
        match (self.u_minus, self.u_plus) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Configuration(
                "problem.u_minus and problem.u_plus are required for this mode".into(),
            )),
        }
    }

    pub fn boundary(&self, laws: &Laws) -> Result<BoundaryData> {
        let (u_minus, u_plus) = self.boundary_values()?;
        let b = match self.v_minus {
            Some(v_minus) => BoundaryData {
                half_length: self.half_length,
                epsilon: self.epsilon,
                u_minus,
                u_plus,
                v_minus,
            },
            None => BoundaryData::with_jump_momentum(self.half_length, self.epsilon, u_minus, u_plus, laws)?,
        };
        b.validate()?;
        Ok(b)
    }
}

/// Initial data for `evolve`, written `steady`, `tanh(a,b)`,
/// `perturbed-steady(amplitude)` or `state:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Steady,
    Tanh { a: f64, b: f64 },
    PerturbedSteady { amplitude: f64 },
    State(PathBuf),
}

impl InitialSpec {
    pub fn to_initial_data(&self, seed: u64) -> Option<InitialData> {
        match *self {
            InitialSpec::Steady => Some(InitialData::Steady),
            InitialSpec::Tanh { a, b } => Some(InitialData::Tanh { a, b }),
            InitialSpec::PerturbedSteady { amplitude } => Some(InitialData::PerturbedSteady { amplitude, seed }),
            InitialSpec::State(_) => None,
        }
    }
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

impl FromStr for InitialSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        if s == "steady" {
            return Ok(InitialSpec::Steady);
        }
        if let Some(path) = s.strip_prefix("state:") {
            return Ok(InitialSpec::State(PathBuf::from(path)));
        }
        if let Some(args) = call_args(s, "tanh") {
            if let [a, b] = args[..] {
                return Ok(InitialSpec::Tanh { a: num(a)?, b: num(b)? });
            }
        }
        if let Some(args) = call_args(s, "perturbed-steady") {
            if let [a] = args[..] {
                return Ok(InitialSpec::PerturbedSteady { amplitude: num(a)? });
            }
        }
        Err(format!(
            "unrecognised initial data `{s}` (expected steady, tanh(a,b), perturbed-steady(amplitude) or state:PATH)"
        ))
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::Steady => write!(f, "steady"),
            InitialSpec::Tanh { a, b } => write!(f, "tanh({a},{b})"),
            InitialSpec::PerturbedSteady { amplitude } => write!(f, "perturbed-steady({amplitude})"),
            InitialSpec::State(p) => write!(f, "state:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaMapConfig {
    pub v_star_min: f64,
    pub v_star_max: f64,
    pub v_star_count: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_count: usize,
}

impl SigmaMapConfig {
    fn axis(min: f64, max: f64, count: usize) -> Vec<f64> {
        if count == 1 {
            return vec![min];
        }
        (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect()
    }

    pub fn v_star_axis(&self) -> Vec<f64> {
        Self::axis(self.v_star_min, self.v_star_max, self.v_star_count)
    }

    pub fn alpha_axis(&self) -> Vec<f64> {
        Self::axis(self.alpha_min, self.alpha_max, self.alpha_count)
    }
}

/// Jump to be checked by `hyperbolic-check`. With `w_plus` and `c` both
/// absent the speed is solved from the jump relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub rho_minus: f64,
    pub w_minus: f64,
    pub rho_plus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub h3_delta1: f64,
    pub h3_delta2: f64,
    pub decay_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureKind {
    /// Trajectories of the stationary equation blocked by an equilibrium.
    NoConnection,
    /// `g(w)` for several viscosity laws.
    GCurves,
    /// `f(u)` for several `α` and the connection at `α*`.
    Connection,
    /// Density and momentum snapshots of an `evolve` run.
    Dynamics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiguresConfig {
    pub kind: FigureKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_star_squared: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub viscosity_variants: Vec<ViscositySpec>,
    pub w_max: f64,
    pub snapshot_times: Vec<f64>,
}

/// Fully resolved and validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    pub problem: ProblemConfig,
    pub scheme: SchemeConfig,
    #[serde(serialize_with = "display")]
    pub initial: InitialSpec,
    pub sigma_map: SigmaMapConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperbolic: Option<JumpSpec>,
    pub diagnostics: DiagnosticsConfig,
    pub figures: FiguresConfig,
}

fn display<S: serde::Serializer, T: fmt::Display>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

impl RunConfig {
    /// The resolved configuration as a TOML document. The output directory
    /// is left out so that identical runs echo identical text.
    /// The document is itself a valid `--config` file; mode and preset are
    /// recorded as comments.
    pub fn to_toml(&self) -> Result<String> {
        let fail = |e: &dyn fmt::Display| Error::Configuration(format!("cannot serialise configuration: {e}"));
        let mut table = match Value::try_from(self).map_err(|e| fail(&e))? {
            Value::Table(t) => t,
            other => return Err(fail(&format!("unexpected {}", other.type_str()))),
        };
        table.remove("mode");
        table.remove("preset");
        let mut evolve = Table::new();
        if let Some(initial) = table.remove("initial") {
            evolve.insert("initial".into(), initial);
        }
        table.insert("evolve".into(), Value::Table(evolve));
        let mut text = format!("# mode = {}\n", self.mode);
        if let Some(p) = self.preset {
            text.push_str(&format!("# preset = {}\n", p.name()));
        }
        text.push_str(&toml::to_string(&table).map_err(|e| fail(&e))?);
        Ok(text)
    }

    pub fn h3_gate(&self) -> (f64, f64) {
        (self.diagnostics.h3_delta1, self.diagnostics.h3_delta2)
    }
}

/// Command-line layer. Every field is optional and overrides the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub t_final: Option<f64>,
    pub seed: Option<u64>,
    pub cfl_hyperbolic: Option<f64>,
    pub cfl_parabolic: Option<f64>,
    pub stride: Option<usize>,
    pub initial: Option<String>,
    pub rho_minus: Option<f64>,
    pub w_minus: Option<f64>,
    pub rho_plus: Option<f64>,
    pub w_plus: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Document {
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    problem: ProblemDoc,
    scheme: Option<SchemeDoc>,
    evolve: Option<EvolveDoc>,
    sigma_map: Option<Table>,
    hyperbolic: Option<HyperbolicDoc>,
    diagnostics: Option<Table>,
    figures: Option<Table>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    half_length: Option<f64>,
    epsilon: Option<f64>,
    pressure: Option<PressureSpec>,
    viscosity: Option<ViscositySpec>,
    u_minus: Option<f64>,
    u_plus: Option<f64>,
    v_minus: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct SchemeDoc {
    n: Option<usize>,
    cfl_hyperbolic: Option<f64>,
    cfl_parabolic: Option<f64>,
    t_final: Option<f64>,
    stride: Option<usize>,
    vacuum_floor: Option<f64>,
    right_closure: Option<crate::evolve::RightClosure>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct EvolveDoc {
    initial: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperbolicDoc {
    rho_minus: Option<f64>,
    w_minus: Option<f64>,
    rho_plus: Option<f64>,
    w_plus: Option<f64>,
    c: Option<f64>,
}

fn parse_table(text: &str, origin: &str) -> Result<Table> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Configuration(format!("{origin}: {e}")))?;
    // Type-check the layer on its own so errors keep their line context.
    Document::deserialize(Value::Table(table.clone())).map_err(|e| Error::Configuration(format!("{origin}: {e}")))?;
    Ok(table)
}

fn text_with_line_context(text: &str, origin: &str) -> Result<Table> {
    toml::from_str::<Document>(text).map_err(|e| Error::Configuration(format!("{origin}: {e}")))?;
    parse_table(text, origin)
}

/// Deep merge: tables merge key by key, every other value is replaced.
fn merge(base: &mut Table, layer: Table) {
    for (key, value) in layer {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(l)) => merge(b, l),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn flag_table(o: &Overrides) -> Table {
    let mut root = Table::new();
    let mut put = |block: Option<&str>, key: &str, value: Option<Value>| {
        let Some(value) = value else { return };
        let target = match block {
            Some(b) => root
                .entry(b)
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .expect("flag blocks are tables"),
            None => &mut root,
        };
        target.insert(key.to_string(), value);
    };
    let int = |x: Option<usize>| x.map(|v| Value::Integer(v as i64));
    let float = |x: Option<f64>| x.map(Value::Float);
    put(None, "seed", o.seed.map(|v| Value::Integer(v as i64)));
    put(
        None,
        "out",
        o.out.as_ref().map(|p| Value::String(p.display().to_string())),
    );
    put(Some("scheme"), "n", int(o.n));
    put(Some("scheme"), "t_final", float(o.t_final));
    put(Some("scheme"), "cfl_hyperbolic", float(o.cfl_hyperbolic));
    put(Some("scheme"), "cfl_parabolic", float(o.cfl_parabolic));
    put(Some("scheme"), "stride", int(o.stride));
    put(Some("evolve"), "initial", o.initial.clone().map(Value::String));
    put(Some("hyperbolic"), "rho_minus", float(o.rho_minus));
    put(Some("hyperbolic"), "w_minus", float(o.w_minus));
    put(Some("hyperbolic"), "rho_plus", float(o.rho_plus));
    put(Some("hyperbolic"), "w_plus", float(o.w_plus));
    put(Some("hyperbolic"), "c", float(o.c));
    root
}

fn positive(bad: &mut Vec<String>, key: &str, value: f64) {
    if !(value > 0.0 && value.is_finite()) {
        bad.push(format!("{key} must be positive and finite (got {value})"));
    }
}

fn typed<T: serde::de::DeserializeOwned>(table: &Table, block: &str, bad: &mut Vec<String>) -> Option<T> {
    let value = table.get(block).cloned().unwrap_or_else(|| Value::Table(Table::new()));
    match T::deserialize(value) {
        Ok(x) => Some(x),
        Err(e) => {
            bad.push(format!("{block}: {}", e.message().trim()));
            None
        }
    }
}

/// Assembles, type-checks and validates the configuration of one run.
/// `env_out` is the value of [`OUT_ENV`], if set.
pub fn parse_config(mode: Mode, overrides: &Overrides, env_out: Option<&Path>) -> Result<RunConfig> {
    let mut merged = parse_table(DEFAULTS, "built-in defaults")?;
    if let Some(preset) = overrides.preset {
        merge(&mut merged, parse_table(preset.document(), preset.name())?);
    }
    if let Some(path) = &overrides.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        merge(&mut merged, text_with_line_context(&text, &path.display().to_string())?);
    }
    merge(&mut merged, flag_table(overrides));

    let doc = Document::deserialize(Value::Table(merged.clone()))
        .map_err(|e| Error::Configuration(format!("merged configuration: {e}")))?;

    let mut bad = Vec::new();
    let p = &doc.problem;
    let mut require = |key: &str, present: bool| {
        if !present {
            bad.push(format!("problem.{key} is required"));
        }
    };
    require("half_length", p.half_length.is_some());
    require("epsilon", p.epsilon.is_some());
    require("pressure", p.pressure.is_some());
    require("viscosity", p.viscosity.is_some());
    for (key, value) in [
        ("problem.half_length", p.half_length),
        ("problem.epsilon", p.epsilon),
        ("problem.u_minus", p.u_minus),
        ("problem.u_plus", p.u_plus),
        ("problem.v_minus", p.v_minus),
    ] {
        if let Some(v) = value {
            positive(&mut bad, key, v);
        }
    }
    if let Some(law) = p.pressure {
        if let Err(e) = law.law().validate() {
            bad.push(format!("problem.pressure: {e}"));
        }
    }
    if let Some(law) = p.viscosity {
        if let Err(e) = law.law().validate() {
            bad.push(format!("problem.viscosity: {e}"));
        }
    }

    let scheme: Option<SchemeConfig> = typed(&merged, "scheme", &mut bad);
    if let Some(s) = &scheme {
        if let Err(Error::Configuration(msg)) = s.validate() {
            bad.extend(msg.split("; ").map(|m| format!("scheme: {m}")));
        }
    }

    let initial_text = doc.evolve.and_then(|e| e.initial).unwrap_or_default();
    let initial = match initial_text.parse::<InitialSpec>() {
        Ok(spec) => {
            if let InitialSpec::Tanh { a, b } = spec {
                if !(a.is_finite() && b.is_finite()) {
                    bad.push("evolve.initial: tanh parameters must be finite".into());
                }
            }
            if let InitialSpec::PerturbedSteady { amplitude } = spec {
                if !(amplitude.is_finite() && amplitude.abs() < 1.0) {
                    bad.push(format!(
                        "evolve.initial: perturbation amplitude must lie in (-1, 1) (got {amplitude})"
                    ));
                }
            }
            Some(spec)
        }
        Err(e) => {
            bad.push(format!("evolve.initial: {e}"));
            None
        }
    };

    let sigma_map: Option<SigmaMapConfig> = typed(&merged, "sigma_map", &mut bad);
    if let Some(m) = &sigma_map {
        for (key, value) in [
            ("sigma_map.v_star_min", m.v_star_min),
            ("sigma_map.v_star_max", m.v_star_max),
            ("sigma_map.alpha_min", m.alpha_min),
            ("sigma_map.alpha_max", m.alpha_max),
        ] {
            positive(&mut bad, key, value);
        }
        if m.v_star_max < m.v_star_min {
            bad.push("sigma_map.v_star_max must not be below sigma_map.v_star_min".into());
        }
        if m.alpha_max < m.alpha_min {
            bad.push("sigma_map.alpha_max must not be below sigma_map.alpha_min".into());
        }
        if m.v_star_count == 0 || m.alpha_count == 0 {
            bad.push("sigma_map.v_star_count and sigma_map.alpha_count must be at least 1".into());
        }
    }

    let hyperbolic = doc.hyperbolic.and_then(|h| {
        let any = h.rho_minus.or(h.w_minus).or(h.rho_plus).or(h.w_plus).or(h.c).is_some();
        if !any {
            return None;
        }
        let mut missing = |key: &str, v: Option<f64>| {
            if v.is_none() {
                bad.push(format!("hyperbolic.{key} is required when a jump is given"));
            }
            v.unwrap_or(f64::NAN)
        };
        let spec = JumpSpec {
            rho_minus: missing("rho_minus", h.rho_minus),
            w_minus: missing("w_minus", h.w_minus),
            rho_plus: missing("rho_plus", h.rho_plus),
            w_plus: h.w_plus,
            c: h.c,
        };
        if h.w_plus.is_some() != h.c.is_some() {
            bad.push(
                "hyperbolic.w_plus and hyperbolic.c must be given together (or both omitted to solve for them)".into(),
            );
        }
        for (key, v) in [
            ("hyperbolic.rho_minus", h.rho_minus),
            ("hyperbolic.rho_plus", h.rho_plus),
        ] {
            if let Some(v) = v {
                positive(&mut bad, key, v);
            }
        }
        Some(spec)
    });

    let diagnostics: Option<DiagnosticsConfig> = typed(&merged, "diagnostics", &mut bad);
    if let Some(d) = &diagnostics {
        positive(&mut bad, "diagnostics.h3_delta1", d.h3_delta1);
        positive(&mut bad, "diagnostics.h3_delta2", d.h3_delta2);
        if !(d.decay_tol >= 0.0 && d.decay_tol.is_finite()) {
            bad.push(format!(
                "diagnostics.decay_tol must be nonnegative (got {})",
                d.decay_tol
            ));
        }
    }

    let figures: Option<FiguresConfig> = typed(&merged, "figures", &mut bad);
    if let Some(f) = &figures {
        positive(&mut bad, "figures.w_max", f.w_max);
        if let Some(a) = f.alpha {
            positive(&mut bad, "figures.alpha", a);
        }
        if let Some(v) = f.v_star_squared {
            positive(&mut bad, "figures.v_star_squared", v);
        }
        for (i, a) in f.alphas.iter().enumerate() {
            positive(&mut bad, &format!("figures.alphas[{i}]"), *a);
        }
        if mode == Mode::Figures {
            match f.kind {
                FigureKind::NoConnection if f.alpha.is_none() => {
                    bad.push("figures.alpha is required for the no-connection figure".into())
                }
                FigureKind::GCurves => {
                    if f.alpha.is_none() {
                        bad.push("figures.alpha is required for the g-curves figure".into());
                    }
                    if f.v_star_squared.is_none() && p.v_minus.is_none() {
                        bad.push(
                            "figures.v_star_squared (or problem.v_minus) is required for the g-curves figure".into(),
                        );
                    }
                }
                _ => {}
            }
        }
    }

    let needs_boundary = match mode {
        Mode::Steady | Mode::Evolve | Mode::SigmaMap => true,
        Mode::HyperbolicCheck => hyperbolic.is_none(),
        Mode::Figures => figures.as_ref().is_some_and(|f| f.kind != FigureKind::GCurves),
    };
    let needs_increasing = matches!(mode, Mode::Steady | Mode::Evolve)
        || (mode == Mode::Figures
            && figures
                .as_ref()
                .is_some_and(|f| matches!(f.kind, FigureKind::Connection | FigureKind::Dynamics)));
    if needs_boundary {
        if p.u_minus.is_none() {
            bad.push(format!("problem.u_minus is required for {mode}"));
        }
        if p.u_plus.is_none() {
            bad.push(format!("problem.u_plus is required for {mode}"));
        }
    }
    if let (Some(a), Some(b)) = (p.u_minus, p.u_plus) {
        if needs_increasing && a >= b {
            bad.push(format!(
                "problem.u_minus must be below problem.u_plus for {mode} (got {a} >= {b})"
            ));
        }
        if a == b && p.v_minus.is_none() && needs_boundary {
            bad.push("problem.v_minus is required when u_minus = u_plus (the jump relation cannot fix it)".into());
        }
    }

    if !bad.is_empty() {
        return Err(Error::Configuration(format!(
            "invalid configuration:\n  - {}",
            bad.join("\n  - ")
        )));
    }

    let preset_dir = overrides.preset.map(|p| format!("-{}", p.name())).unwrap_or_default();
    let out = doc.out.unwrap_or_else(|| {
        env_out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("out"))
            .join(format!("{mode}{preset_dir}"))
    });
    let unwrap = "validated above";
    Ok(RunConfig {
        mode,
        preset: overrides.preset,
        seed: doc.seed.unwrap_or(0),
        out,
        problem: ProblemConfig {
            half_length: p.half_length.expect(unwrap),
            epsilon: p.epsilon.expect(unwrap),
            pressure: p.pressure.expect(unwrap),
            viscosity: p.viscosity.expect(unwrap),
            u_minus: p.u_minus,
            u_plus: p.u_plus,
            v_minus: p.v_minus,
        },
        scheme: scheme.expect(unwrap),
        initial: initial.expect(unwrap),
        sigma_map: sigma_map.expect(unwrap),
        hyperbolic,
        diagnostics: diagnostics.expect(unwrap),
        figures: figures.expect(unwrap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(mode: Mode, p: Preset) -> Result<RunConfig> {
        parse_config(
            mode,
            &Overrides {
                preset: Some(p),
                ..Overrides::default()
            },
            None,
        )
    }

    fn from_text(mode: Mode, text: &str) -> Result<RunConfig> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        parse_config(
            mode,
            &Overrides {
                config: Some(path),
                ..Overrides::default()
            },
            None,
        )
    }

    #[test]
    fn fig4_preset() {
        let cfg = preset(Mode::Steady, Preset::Fig4).unwrap();
        let p = cfg.problem;
        assert_eq!(
            (p.half_length, p.epsilon, p.u_minus, p.u_plus),
            (1.0, 0.1, Some(0.5), Some(1.0))
        );
        assert_eq!(p.pressure, PressureSpec::SaintVenant { kappa: 1.0 });
        assert_eq!(p.viscosity, ViscositySpec::Power { c: 1.0, a: 1.0 });
        assert_eq!(cfg.initial, InitialSpec::Tanh { a: 0.25, b: 20.0 });
        let b = p.boundary(&p.laws().unwrap()).unwrap();
        assert!((b.v_minus * b.v_minus - 0.375).abs() < 1e-15);
    }

    #[test]
    fn every_preset_resolves_for_figures() {
        for p in Preset::ALL {
            preset(Mode::Figures, p).unwrap();
        }
    }

    #[test]
    fn missing_viscosity_is_named() {
        let err = from_text(
            Mode::Steady,
            "[problem]\nhalf_length = 1.0\nepsilon = 0.1\nu_minus = 0.5\nu_plus = 1.0\npressure = { type = \"saint-venant\", kappa = 1.0 }\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("problem.viscosity"), "{err}");
    }

    #[test]
    fn all_violations_reported_together() {
        let err = from_text(
            Mode::Steady,
            "[problem]\nhalf_length = 1.0\nepsilon = -0.1\nu_minus = 1.5\nu_plus = 1.0\n\
             pressure = { type = \"saint-venant\", kappa = 1.0 }\nviscosity = { type = \"power\", c = 1.0, a = 1.0 }\n\
             [scheme]\ncfl_parabolic = 3.0\n",
        )
        .unwrap_err()
        .to_string();
        for key in ["problem.epsilon", "problem.u_minus must be below", "cfl_parabolic"] {
            assert!(err.contains(key), "{key} missing from: {err}");
        }
    }

    #[test]
    fn parse_errors_carry_line_context() {
        let err = from_text(Mode::Steady, "[problem]\nhalf_length = 1.0\nepsilon = \"small\"\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3") || err.contains("3 |"), "{err}");
        let err = from_text(Mode::Steady, "[problem]\nhalf_lenght = 1.0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("half_lenght"), "{err}");
    }

    #[test]
    fn flags_override_file_and_preset() {
        let cfg = parse_config(
            Mode::Evolve,
            &Overrides {
                preset: Some(Preset::Fig4),
                n: Some(64),
                t_final: Some(0.5),
                initial: Some("perturbed-steady(0.01)".into()),
                seed: Some(7),
                ..Overrides::default()
            },
            Some(Path::new("/tmp/root")),
        )
        .unwrap();
        assert_eq!(cfg.scheme.n, 64);
        assert_eq!(cfg.scheme.t_final, 0.5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.initial, InitialSpec::PerturbedSteady { amplitude: 0.01 });
        assert_eq!(cfg.out, PathBuf::from("/tmp/root/evolve-fig4"));
    }

    #[test]
    fn echo_round_trips_through_the_loader() {
        let cfg = preset(Mode::Evolve, Preset::Fig4).unwrap();
        let text = cfg.to_toml().unwrap();
        assert!(!text.contains("out ="));
        assert!(text.starts_with("# mode = evolve\n# preset = fig4\n"));
        let mut again = from_text(Mode::Evolve, &text).unwrap();
        again.preset = cfg.preset;
        again.out = cfg.out.clone();
        assert_eq!(again, cfg);
    }

    #[test]
    fn initial_spec_parsing() {
        assert_eq!(
            "tanh( 0.25 , 20 )".parse::<InitialSpec>(),
            Ok(InitialSpec::Tanh { a: 0.25, b: 20.0 })
        );
        assert_eq!(
            "state:out/final_state.csv".parse::<InitialSpec>(),
            Ok(InitialSpec::State("out/final_state.csv".into()))
        );
        assert!("tanh(1)".parse::<InitialSpec>().is_err());
        assert!("sine".parse::<InitialSpec>().is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!("fig9".parse::<Preset>(), Err(Error::Usage(_))));
    }
}
