//! Run configuration: JSON schema, dotted-path overrides, and validation
//! that reports every problem with the path of the offending field.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dielectric::DielectricModel;
use crate::error::Error;
use crate::fabry_perot::AngleMap;
use crate::fitting::{DispersionGuess, FitOptions};
use crate::io::DEFAULT_DIGITS;
use crate::pump_probe::{ClassicalOptics, ClassicalSetup, ModelKind};
use crate::quantum::QmParams;
use crate::spectrum::uniform_grid;
use crate::transfer_matrix::{CavityStackTemplate, LayerStack};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POLARITON_ENGINE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Unpumped transmission spectrum.
    Linear,
    /// Ground, excited and differential transmission at one detuning.
    Transient,
    /// Transient spectra over a list of detunings plus a summary table.
    Sweep,
    /// Coupled-mode branch energies versus tilt angle.
    Dispersion,
    /// Transfer-matrix T/R/A of a layer stack, optionally over tilt angles.
    Tmm,
    /// Least-squares fit of Lorentz bands or dispersion data.
    Fit,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Linear,
        Command::Transient,
        Command::Sweep,
        Command::Dispersion,
        Command::Tmm,
        Command::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Linear => "linear",
            Command::Transient => "transient",
            Command::Sweep => "sweep",
            Command::Dispersion => "dispersion",
            Command::Tmm => "tmm",
            Command::Fit => "fit",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Uniform wavenumber grid (cm^-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            min: 1900.0,
            max: 2060.0,
            step: 0.05,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> crate::Result<Vec<f64>> {
        uniform_grid(self.min, self.max, self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransientSection {
    /// Excited fraction; defaults to `qm.f_pu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Detunings `omega_c - omega0` for `sweep` (cm^-1).
    #[serde(default)]
    pub detunings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    pub e_vib: f64,
    pub g0: f64,
    pub map: AngleMap,
    /// Tilt angles in degrees.
    pub angles: Vec<f64>,
}

fn default_center() -> f64 {
    1983.0
}

fn default_half_window() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TmmSection {
    /// Explicit stack; mutually exclusive with `cavity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<LayerStack>,
    /// Mirror/spacer/mirror template; requires `spacer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityStackTemplate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacer: Option<DielectricModel>,
    /// Tilt angles (degrees). Empty: the stack's own angle (or normal incidence).
    #[serde(default)]
    pub angles: Vec<f64>,
    /// Band centre separating lower and upper polariton peaks (cm^-1).
    #[serde(default = "default_center")]
    pub center: f64,
    /// Polariton peak search half window (cm^-1).
    #[serde(default = "default_half_window")]
    pub half_window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// Lorentz bands to an absorbance spectrum (`wavenumber_cm-1,absorbance`).
    Lorentz,
    /// Coupled modes to branch energies (`theta_deg,e_lp_cm-1,e_up_cm-1`).
    Dispersion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub kind: FitKind,
    /// Observation CSV, relative paths resolved against the config file.
    pub observations: PathBuf,
    /// Sample path length for absorbance (cm); `lorentz` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_cm: Option<f64>,
    /// Starting oscillators; `lorentz` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<DielectricModel>,
    /// Starting values; `dispersion` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guess: Option<DispersionGuess>,
    #[serde(default)]
    pub options: FitOptions,
}

fn default_digits() -> usize {
    DEFAULT_DIGITS
}

fn default_model() -> ModelKind {
    ModelKind::Quantum
}

/// Everything a run needs. Sections not used by the command may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the command given on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Seed for multi-start fits.
    #[serde(default)]
    pub seed: u64,
    /// Significant digits of floats in CSV output (1-17).
    #[serde(default = "default_digits")]
    pub significant_digits: usize,
    /// Model(s) used by `linear`, `transient` and `sweep`.
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qm: Option<QmParams>,
    /// Classical setup; derived from `qm` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSetup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmm: Option<TmmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
}

/// One validation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// JSON schema of [`RunConfig`].
pub fn schema() -> Value {
    serde_json::to_value(schemars::schema_for!(RunConfig)).expect("schema serializes")
}

/// Apply a `dotted.path=value` override. The value is parsed as JSON when
/// possible and taken as a string otherwise; numeric segments index arrays.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), Diagnostic> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Diagnostic::new("--set", format!("`{assignment}` is not key=value")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(Diagnostic::new("--set", "empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    let mut cur = doc;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| {
                    Diagnostic::new(path, format!("`{seg}` is not an array index"))
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    Diagnostic::new(path, format!("index {idx} out of range (length {len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(Diagnostic::new(
                    path,
                    format!("`{}` is not an object", segments[..i].join(".")),
                ))
            }
        };
    }
    unreachable!("loop returns on the last segment")
}

/// Read a config file, apply overrides and deserialize it.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic::new(
            "--config",
            format!("cannot read {}: {e}", path.display()),
        )]
    })?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| {
        vec![Diagnostic::new(
            "",
            format!("{}: line {}: {e}", path.display(), e.line()),
        )]
    })?;
    let mut diags = Vec::new();
    for o in overrides {
        if let Err(d) = apply_override(&mut doc, o) {
            diags.push(d);
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        vec![Diagnostic::new(path, e.into_inner().to_string())]
    })
}

fn push_error(diags: &mut Vec<Diagnostic>, section: &str, err: Error) {
    match err {
        Error::InvalidParameter { field, reason } => {
            let path = if field.starts_with(section) {
                field
            } else {
                format!("{section}.{field}")
            };
            diags.push(Diagnostic::new(path, reason));
        }
        other => diags.push(Diagnostic::new(section, other.to_string())),
    }
}

fn check(diags: &mut Vec<Diagnostic>, section: &str, result: crate::Result<()>) {
    if let Err(e) = result {
        push_error(diags, section, e);
    }
}

impl RunConfig {
    /// Directory used to resolve relative input paths.
    pub fn resolve_input(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Excited fraction for `transient`/`sweep`: `transient.fraction`, else `qm.f_pu`.
    pub fn fraction(&self) -> Option<f64> {
        self.transient
            .as_ref()
            .and_then(|t| t.fraction)
            .or(self.qm.map(|q| q.f_pu))
    }

    fn uses_classical(&self, command: Command) -> bool {
        matches!(command, Command::Linear | Command::Transient | Command::Sweep)
            && self.model != ModelKind::Quantum
    }

    fn uses_quantum(&self, command: Command) -> bool {
        matches!(command, Command::Linear | Command::Transient | Command::Sweep)
            && self.model != ModelKind::Classical
    }

    /// Full schema-level and physical validation for `command`.
    /// `base_dir` resolves relative input files.
    pub fn validate(&self, command: Command, base_dir: &Path) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        if let Some(c) = self.command {
            if c != command {
                d.push(Diagnostic::new(
                    "command",
                    format!("config is for `{c}` but `{command}` was requested"),
                ));
            }
        }
        check(&mut d, "grid", self.grid.points().map(|_| ()));
        if !(1..=17).contains(&self.significant_digits) {
            d.push(Diagnostic::new("significant_digits", "must lie in 1..=17"));
        }
        if let Some(q) = &self.qm {
            check(&mut d, "qm", q.validate());
        }
        if let Some(c) = &self.classical {
            check(&mut d, "classical", c.validate());
        }
        if self.uses_quantum(command) && self.qm.is_none() {
            d.push(Diagnostic::new("qm", format!("required by `{command}` with the quantum model")));
        }
        if self.uses_classical(command) {
            if self.classical.is_none() && self.qm.is_none() {
                d.push(Diagnostic::new(
                    "classical",
                    "classical model needs `classical`, or `qm` to derive it from",
                ));
            }
            if let (Some(c), Some(q)) = (&self.classical, &self.qm) {
                if self.model == ModelKind::Both {
                    self.check_shared(&mut d, c, q);
                }
            }
        }
        match command {
            Command::Linear => {
                if let Some(q) = &self.qm {
                    if self.uses_quantum(command) && q.f_pu != 0.0 {
                        d.push(Diagnostic::new(
                            "qm.f_pu",
                            "linear spectra are unpumped; use `transient` for f_pu > 0",
                        ));
                    }
                }
            }
            Command::Transient | Command::Sweep => self.check_transient(&mut d, command),
            Command::Dispersion => self.check_dispersion(&mut d),
            Command::Tmm => self.check_tmm(&mut d),
            Command::Fit => self.check_fit(&mut d, base_dir),
        }
        d
    }

    fn check_shared(&self, d: &mut Vec<Diagnostic>, c: &ClassicalSetup, q: &QmParams) {
        if let Ok(center) = c.band_center() {
            if (center - q.omega0).abs() > 1e-9 {
                d.push(Diagnostic::new(
                    "classical.medium",
                    format!("band centre {center} differs from qm.omega0 {}", q.omega0),
                ));
            }
        }
        if (c.hot_center - q.omega12()).abs() > 1e-9 {
            d.push(Diagnostic::new(
                "classical.hot_center",
                format!("{} differs from qm omega12 {}", c.hot_center, q.omega12()),
            ));
        }
    }

    fn check_transient(&self, d: &mut Vec<Diagnostic>, command: Command) {
        match self.fraction() {
            None => d.push(Diagnostic::new(
                "transient.fraction",
                "excited fraction missing (set transient.fraction or qm.f_pu)",
            )),
            Some(f) if !(0.0..=0.5).contains(&f) => d.push(Diagnostic::new(
                "transient.fraction",
                format!("{f} outside [0, 0.5]"),
            )),
            Some(_) => {}
        }
        if let (Some(t), Some(q)) = (&self.transient, &self.qm) {
            if let Some(f) = t.fraction {
                if f != q.f_pu && q.f_pu != 0.0 {
                    d.push(Diagnostic::new(
                        "transient.fraction",
                        format!("{f} conflicts with qm.f_pu = {}", q.f_pu),
                    ));
                }
            }
        }
        if command == Command::Sweep {
            let detunings = self.transient.as_ref().map(|t| t.detunings.as_slice()).unwrap_or(&[]);
            if detunings.is_empty() {
                d.push(Diagnostic::new("transient.detunings", "sweep needs at least one detuning"));
            }
            for (i, x) in detunings.iter().enumerate() {
                if !x.is_finite() {
                    d.push(Diagnostic::new(format!("transient.detunings[{i}]"), "not finite"));
                }
            }
            if self.uses_classical(command) {
                if let Some(ClassicalSetup {
                    optics: ClassicalOptics::Stack { .. },
                    ..
                }) = &self.classical
                {
                    d.push(Diagnostic::new(
                        "classical.optics",
                        "detuning sweeps need a fabry_perot cavity; tilt stacks with `tmm`",
                    ));
                }
            }
        }
    }

    fn check_dispersion(&self, d: &mut Vec<Diagnostic>) {
        let Some(s) = &self.dispersion else {
            d.push(Diagnostic::new("dispersion", "required by `dispersion`"));
            return;
        };
        if !(s.e_vib > 0.0) {
            d.push(Diagnostic::new("dispersion.e_vib", "must be > 0"));
        }
        if !(s.g0 >= 0.0) {
            d.push(Diagnostic::new("dispersion.g0", "must be >= 0"));
        }
        if !(s.map.e0 > 0.0) {
            d.push(Diagnostic::new("dispersion.map.e0", "must be > 0"));
        }
        if !(s.map.n_c >= 1.0) {
            d.push(Diagnostic::new("dispersion.map.n_c", "must be >= 1"));
        }
        if s.angles.is_empty() {
            d.push(Diagnostic::new("dispersion.angles", "at least one angle required"));
        }
        for (i, a) in s.angles.iter().enumerate() {
            if let Err(e) = s.map.mode(*a) {
                push_error(d, &format!("dispersion.angles[{i}]"), e);
            }
        }
    }

    fn check_tmm(&self, d: &mut Vec<Diagnostic>) {
        let Some(t) = &self.tmm else {
            d.push(Diagnostic::new("tmm", "required by `tmm`"));
            return;
        };
        match (&t.stack, &t.cavity) {
            (Some(_), Some(_)) => d.push(Diagnostic::new("tmm", "give either `stack` or `cavity`, not both")),
            (None, None) => d.push(Diagnostic::new("tmm", "needs `stack` or `cavity`")),
            (Some(s), None) => {
                for (i, a) in t.angles.iter().enumerate() {
                    let mut s = s.clone();
                    s.theta_deg = *a;
                    check(d, &format!("tmm.angles[{i}]"), s.validate());
                }
                if t.angles.is_empty() {
                    check(d, "tmm.stack", s.validate());
                }
            }
            (None, Some(c)) => {
                check(d, "tmm.cavity", c.validate());
                match &t.spacer {
                    None => d.push(Diagnostic::new("tmm.spacer", "required with `cavity`")),
                    Some(m) => check(d, "tmm.spacer", m.validate()),
                }
                for (i, a) in t.angles.iter().enumerate() {
                    if !(0.0..90.0).contains(a) {
                        d.push(Diagnostic::new(format!("tmm.angles[{i}]"), "must lie in [0, 90)"));
                    }
                }
            }
        }
        if !(t.half_window > 0.0) {
            d.push(Diagnostic::new("tmm.half_window", "must be > 0"));
        }
    }

    fn check_fit(&self, d: &mut Vec<Diagnostic>, base_dir: &Path) {
        let Some(f) = &self.fit else {
            d.push(Diagnostic::new("fit", "required by `fit`"));
            return;
        };
        let obs = Self::resolve_input(base_dir, &f.observations);
        if !obs.is_file() {
            d.push(Diagnostic::new(
                "fit.observations",
                format!("file not found: {}", obs.display()),
            ));
        }
        match f.kind {
            FitKind::Lorentz => {
                match f.path_cm {
                    None => d.push(Diagnostic::new("fit.path_cm", "required for lorentz fits")),
                    Some(p) if !(p > 0.0) => d.push(Diagnostic::new("fit.path_cm", "must be > 0")),
                    _ => {}
                }
                match &f.initial {
                    None => d.push(Diagnostic::new("fit.initial", "required for lorentz fits")),
                    Some(m) => check(d, "fit.initial", m.validate()),
                }
            }
            FitKind::Dispersion => match &f.guess {
                None => d.push(Diagnostic::new("fit.guess", "required for dispersion fits")),
                Some(g) => {
                    if !(g.g0 > 0.0) {
                        d.push(Diagnostic::new("fit.guess.g0", "starting coupling must be > 0"));
                    }
                    if !(g.n_c > 1.0) {
                        d.push(Diagnostic::new("fit.guess.n_c", "must be > 1"));
                    }
                }
            },
        }
        if f.options.max_iterations == 0 {
            d.push(Diagnostic::new("fit.options.max_iterations", "must be >= 1"));
        }
    }

    /// Copy with every implicit choice written out, as recorded in sidecars.
    /// The output directory is left out: it does not affect results.
    pub fn resolved(&self, command: Command, seed: u64) -> crate::Result<RunConfig> {
        let mut r = self.clone();
        r.command = Some(command);
        r.seed = seed;
        r.output_dir = None;
        if self.uses_classical(command) && r.classical.is_none() {
            let q = r.qm.expect("validated: qm present");
            r.classical = Some(ClassicalSetup::matched_to(&q)?);
        }
        if matches!(command, Command::Transient | Command::Sweep) {
            let fraction = self.fraction();
            let t = r.transient.get_or_insert_with(TransientSection::default);
            t.fraction = fraction;
        }
        Ok(r)
    }
}
