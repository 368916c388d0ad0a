//! Scenario files: flat `key = value` text, strict keys, SI-suffixed values.
//!
//! ```text
//! # comment
//! kind = focused_image
//! source.wavelength = 692.9 nm
//! ```
//!
//! Every key is validated against the table in [`KEYS`]; keys that do not
//! apply to the chosen `kind` are rejected just like misspelled ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use ghostsim_core::coincidence::{DetectorSpec, HbtConfig};
use serde::Serialize;

use crate::units::{format_quantity, parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self { line: Some(line), key: key.map(str::to_owned), message: message.into() }
    }

    fn field(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: Some(key.to_owned()), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, key: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FocusedImage,
    Z2Sweep,
    Hbt,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FocusedImage => "focused_image",
            ScenarioKind::Z2Sweep => "z2_sweep",
            ScenarioKind::Hbt => "hbt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Montecarlo,
    Analytic,
    Both,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Montecarlo => "montecarlo",
            Method::Analytic => "analytic",
            Method::Both => "both",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "montecarlo" | "mc" => Some(Method::Montecarlo),
            "analytic" => Some(Method::Analytic),
            "both" => Some(Method::Both),
            _ => None,
        }
    }

    pub fn runs_montecarlo(self) -> bool {
        matches!(self, Method::Montecarlo | Method::Both)
    }

    pub fn runs_analytic(self) -> bool {
        matches!(self, Method::Analytic | Method::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceShape {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub wavelength: f64,
    pub shape: SourceShape,
    /// Uniform: half-width. Gaussian: 1/e² radius.
    pub half_width: f64,
    pub coherence_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub z2_min: f64,
    pub z2_max: f64,
    pub z2_steps: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.z2_steps;
        let last = (n - 1) as f64;
        (0..n).map(|i| (self.z2_min * (last - i as f64) + self.z2_max * i as f64) / last).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskSpec {
    DoubleSlit { width: f64, center_separation: f64 },
    PinholePair { d1: f64, d2: f64, separation: f64 },
    Slit { width: f64, center: f64 },
    Uniform,
}

impl MaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MaskSpec::DoubleSlit { .. } => "double_slit",
            MaskSpec::PinholePair { .. } => "pinhole_pair",
            MaskSpec::Slit { .. } => "slit",
            MaskSpec::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub n_realizations: usize,
    pub detector_aperture: f64,
    /// Spacing of reported `x2` samples (focused images only).
    pub scan_step: Option<f64>,
}

/// Explicit sample counts; unset counts are derived from the geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridOverrides {
    pub source_points: Option<usize>,
    pub object_points: Option<usize>,
    pub detector_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingConfig {
    pub source: SourceConfig,
    pub z1: f64,
    /// Focused images only.
    pub z2: Option<f64>,
    /// Sweeps only.
    pub sweep: Option<SweepConfig>,
    pub mask: MaskSpec,
    pub ensemble: EnsembleSettings,
    pub grid: GridOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbtSettings {
    pub coherence_time: f64,
    pub dt: f64,
    pub duration: f64,
    pub start_rate: f64,
    pub stop_rate: f64,
    pub jitter: f64,
    pub dead_time: f64,
    pub bin_width: f64,
    pub window: f64,
    pub runs: usize,
    pub shared_trace: bool,
}

impl HbtSettings {
    pub fn with_jitter(&self, jitter: f64) -> Self {
        Self { jitter, ..self.clone() }
    }

    pub fn to_core(&self) -> Result<HbtConfig, ConfigError> {
        let det = |rate: f64| {
            DetectorSpec::new(rate, self.jitter, self.dead_time).map_err(|e| ConfigError::general(e.to_string()))
        };
        let cfg = HbtConfig {
            tau0: self.coherence_time,
            dt: self.dt,
            duration: self.duration,
            start: det(self.start_rate)?,
            stop: det(self.stop_rate)?,
            bin_width: self.bin_width,
            window: self.window,
            shared_trace: self.shared_trace,
        };
        cfg.validate().map_err(|e| ConfigError::general(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub method: Method,
    pub seed: u64,
    pub output: OutputConfig,
    /// Present for `focused_image` and `z2_sweep`.
    pub imaging: Option<ImagingConfig>,
    /// Present for `hbt`.
    pub hbt: Option<HbtSettings>,
}

#[derive(Debug, Clone, Copy)]
enum ValueType {
    Quantity(Dimension),
    Count,
    Seed,
    Bool,
    Word(&'static [&'static str]),
    Path,
}

/// Every accepted key with its value type.
const KEYS: &[(&str, ValueType)] = &[
    ("kind", ValueType::Word(&["focused_image", "z2_sweep", "hbt"])),
    ("method", ValueType::Word(&["montecarlo", "mc", "analytic", "both"])),
    ("seed", ValueType::Seed),
    ("output.dir", ValueType::Path),
    ("output.svg", ValueType::Bool),
    ("source.wavelength", ValueType::Quantity(Dimension::Length)),
    ("source.profile", ValueType::Word(&["uniform", "gaussian"])),
    ("source.half_width", ValueType::Quantity(Dimension::Length)),
    ("source.coherence_time", ValueType::Quantity(Dimension::Time)),
    ("geometry.z1", ValueType::Quantity(Dimension::Length)),
    ("geometry.z2", ValueType::Quantity(Dimension::Length)),
    ("sweep.z2_min", ValueType::Quantity(Dimension::Length)),
    ("sweep.z2_max", ValueType::Quantity(Dimension::Length)),
    ("sweep.z2_steps", ValueType::Count),
    ("mask.kind", ValueType::Word(&["double_slit", "pinhole_pair", "slit", "uniform"])),
    ("mask.width", ValueType::Quantity(Dimension::Length)),
    ("mask.center_separation", ValueType::Quantity(Dimension::Length)),
    ("mask.center", ValueType::Quantity(Dimension::Length)),
    ("mask.d1", ValueType::Quantity(Dimension::Length)),
    ("mask.d2", ValueType::Quantity(Dimension::Length)),
    ("mask.separation", ValueType::Quantity(Dimension::Length)),
    ("ensemble.n_realizations", ValueType::Count),
    ("ensemble.detector_aperture", ValueType::Quantity(Dimension::Length)),
    ("ensemble.scan_step", ValueType::Quantity(Dimension::Length)),
    ("grid.source_points", ValueType::Count),
    ("grid.object_points", ValueType::Count),
    ("grid.detector_points", ValueType::Count),
    ("hbt.dt", ValueType::Quantity(Dimension::Time)),
    ("hbt.duration", ValueType::Quantity(Dimension::Time)),
    ("hbt.start_rate", ValueType::Quantity(Dimension::Rate)),
    ("hbt.stop_rate", ValueType::Quantity(Dimension::Rate)),
    ("hbt.jitter", ValueType::Quantity(Dimension::Time)),
    ("hbt.dead_time", ValueType::Quantity(Dimension::Time)),
    ("hbt.bin_width", ValueType::Quantity(Dimension::Time)),
    ("hbt.window", ValueType::Quantity(Dimension::Time)),
    ("hbt.runs", ValueType::Count),
    ("hbt.shared_trace", ValueType::Bool),
];

/// Default coherence time of imaging sources; it does not enter the
/// spatial correlation.
pub const DEFAULT_COHERENCE_TIME: f64 = 1e-10;
pub const DEFAULT_REALIZATIONS: usize = 4096;
const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Debug, Clone)]
enum Value {
    Number(f64),
    Count(usize),
    Seed(u64),
    Bool(bool),
    Word(String),
}

/// Parsed entries, consumed as the config is assembled.
struct Fields {
    entries: BTreeMap<&'static str, (usize, Value)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        match self.take(key) {
            Some(Value::Number(v)) => Some(v),
            _ => None,
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        match self.take(key) {
            Some(Value::Count(v)) => Some(v),
            _ => None,
        }
    }

    fn flag(&mut self, key: &str) -> Option<bool> {
        match self.take(key) {
            Some(Value::Bool(v)) => Some(v),
            _ => None,
        }
    }

    fn word(&mut self, key: &str) -> Option<String> {
        match self.take(key) {
            Some(Value::Word(v)) => Some(v),
            _ => None,
        }
    }

    fn required_number(&mut self, key: &str, kind: &str) -> Result<f64, ConfigError> {
        self.number(key).ok_or_else(|| missing(key, kind))
    }
}

fn missing(key: &str, context: &str) -> ConfigError {
    ConfigError::field(key, format!("missing required key for {context}"))
}

fn parse_value(key: &str, ty: ValueType, raw: &str, line: usize) -> Result<Value, ConfigError> {
    let err = |m: String| ConfigError::at(line, Some(key), m);
    match ty {
        ValueType::Quantity(dim) => parse_quantity(raw, dim).map(Value::Number).map_err(|e| err(e.0)),
        ValueType::Count => {
            raw.parse::<usize>().map(Value::Count).map_err(|_| err(format!("`{raw}` is not a non-negative integer")))
        }
        ValueType::Seed => {
            raw.parse::<u64>().map(Value::Seed).map_err(|_| err(format!("`{raw}` is not an unsigned 64-bit integer")))
        }
        ValueType::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(err(format!("`{raw}` is not `true` or `false`"))),
        },
        ValueType::Word(words) => {
            if words.contains(&raw) {
                Ok(Value::Word(raw.to_owned()))
            } else {
                Err(err(format!("`{raw}` is not one of {}", words.join(", "))))
            }
        }
        ValueType::Path => Ok(Value::Word(raw.to_owned())),
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<&'static str, Entry>, ConfigError> {
    let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at(line, None, format!("expected `key = value`, found `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&(name, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(ConfigError::at(line, Some(key), "unknown key"));
        };
        if value.is_empty() {
            return Err(ConfigError::at(line, Some(key), "empty value"));
        }
        if let Some(prev) = entries.get(name) {
            return Err(ConfigError::at(line, Some(key), format!("duplicate key (first set on line {})", prev.line)));
        }
        entries.insert(name, Entry { line, value: value.to_owned() });
    }
    Ok(entries)
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let tokens = tokenize(text)?;
    let lines: BTreeMap<&'static str, usize> = tokens.iter().map(|(k, e)| (*k, e.line)).collect();
    let mut parsed = BTreeMap::new();
    for (key, entry) in &tokens {
        let ty = KEYS.iter().find(|(k, _)| k == key).expect("known key").1;
        parsed.insert(*key, (entry.line, parse_value(key, ty, &entry.value, entry.line)?));
    }
    let mut fields = Fields { entries: parsed };
    let attach_line = |mut e: ConfigError| {
        if e.line.is_none() {
            e.line = e.key.as_deref().and_then(|k| lines.get(k).copied());
        }
        e
    };
    let cfg = assemble(&mut fields).map_err(attach_line)?;
    if let Some((key, (line, _))) = fields.entries.iter().next() {
        return Err(ConfigError::at(*line, Some(key), format!("key does not apply to kind `{}`", cfg.kind.name())));
    }
    cfg.validate().map_err(attach_line)?;
    Ok(cfg)
}

fn assemble(f: &mut Fields) -> Result<ScenarioConfig, ConfigError> {
    let kind = match f.word("kind").ok_or_else(|| missing("kind", "every scenario"))?.as_str() {
        "focused_image" => ScenarioKind::FocusedImage,
        "z2_sweep" => ScenarioKind::Z2Sweep,
        _ => ScenarioKind::Hbt,
    };
    let default_method = if kind == ScenarioKind::Hbt { Method::Montecarlo } else { Method::Both };
    let method = f.word("method").map_or(default_method, |w| Method::from_word(&w).expect("checked word"));
    let seed = match f.take("seed") {
        Some(Value::Seed(s)) => s,
        _ => 0,
    };
    let output =
        OutputConfig { dir: f.word("output.dir").map(PathBuf::from), svg: f.flag("output.svg").unwrap_or(true) };
    let kname = kind.name();

    let (imaging, hbt) = match kind {
        ScenarioKind::Hbt => {
            let mut q = |key: &str| f.required_number(key, "kind `hbt`");
            let coherence_time = q("source.coherence_time")?;
            let dt = q("hbt.dt")?;
            let duration = q("hbt.duration")?;
            let start_rate = q("hbt.start_rate")?;
            let stop_rate = q("hbt.stop_rate")?;
            let bin_width = q("hbt.bin_width")?;
            let window = q("hbt.window")?;
            let settings = HbtSettings {
                coherence_time,
                dt,
                duration,
                start_rate,
                stop_rate,
                jitter: f.number("hbt.jitter").unwrap_or(0.0),
                dead_time: f.number("hbt.dead_time").unwrap_or(0.0),
                bin_width,
                window,
                runs: f.count("hbt.runs").unwrap_or(1),
                shared_trace: f.flag("hbt.shared_trace").unwrap_or(true),
            };
            (None, Some(settings))
        }
        _ => {
            let ctx = format!("kind `{kname}`");
            let source = SourceConfig {
                wavelength: f.required_number("source.wavelength", &ctx)?,
                shape: match f.word("source.profile").as_deref() {
                    Some("gaussian") => SourceShape::Gaussian,
                    _ => SourceShape::Uniform,
                },
                half_width: f.required_number("source.half_width", &ctx)?,
                coherence_time: f.number("source.coherence_time").unwrap_or(DEFAULT_COHERENCE_TIME),
            };
            let z1 = f.required_number("geometry.z1", &ctx)?;
            let (z2, sweep) = if kind == ScenarioKind::FocusedImage {
                (Some(f.number("geometry.z2").unwrap_or(z1)), None)
            } else {
                let sweep = SweepConfig {
                    z2_min: f.required_number("sweep.z2_min", &ctx)?,
                    z2_max: f.required_number("sweep.z2_max", &ctx)?,
                    z2_steps: f.count("sweep.z2_steps").ok_or_else(|| missing("sweep.z2_steps", &ctx))?,
                };
                (None, Some(sweep))
            };
            let mask_kind = f.word("mask.kind").ok_or_else(|| missing("mask.kind", &ctx))?;
            let mctx = format!("mask.kind `{mask_kind}`");
            let mask = match mask_kind.as_str() {
                "double_slit" => MaskSpec::DoubleSlit {
                    width: f.required_number("mask.width", &mctx)?,
                    center_separation: f.required_number("mask.center_separation", &mctx)?,
                },
                "pinhole_pair" => MaskSpec::PinholePair {
                    d1: f.required_number("mask.d1", &mctx)?,
                    d2: f.required_number("mask.d2", &mctx)?,
                    separation: f.required_number("mask.separation", &mctx)?,
                },
                "slit" => MaskSpec::Slit {
                    width: f.required_number("mask.width", &mctx)?,
                    center: f.number("mask.center").unwrap_or(0.0),
                },
                _ => MaskSpec::Uniform,
            };
            let ensemble = EnsembleSettings {
                n_realizations: f.count("ensemble.n_realizations").unwrap_or(DEFAULT_REALIZATIONS),
                detector_aperture: f.number("ensemble.detector_aperture").unwrap_or(0.0),
                scan_step: if kind == ScenarioKind::FocusedImage { f.number("ensemble.scan_step") } else { None },
            };
            let grid = GridOverrides {
                source_points: f.count("grid.source_points"),
                object_points: f.count("grid.object_points"),
                detector_points: f.count("grid.detector_points"),
            };
            (Some(ImagingConfig { source, z1, z2, sweep, mask, ensemble, grid }), None)
        }
    };
    Ok(ScenarioConfig { kind, method, seed, output, imaging, hbt })
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(key, format!("must be positive, got {v:e}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(key, format!("must be non-negative, got {v:e}")))
    }
}

fn points(key: &str, n: Option<usize>) -> Result<(), ConfigError> {
    match n {
        Some(n) if !(2..=MAX_GRID_POINTS).contains(&n) => {
            Err(ConfigError::field(key, format!("must lie in [2, {MAX_GRID_POINTS}], got {n}")))
        }
        _ => Ok(()),
    }
}

impl ScenarioConfig {
    /// Checks every invariant; [`parse_scenario`] calls this, so it only
    /// matters for configs built or modified in code.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let kind = self.kind.name();
        match self.kind {
            ScenarioKind::Hbt => {
                if self.method != Method::Montecarlo {
                    return Err(ConfigError::field(
                        "method",
                        format!("kind `hbt` is simulated only; method `{}` is not available", self.method.name()),
                    ));
                }
                if self.imaging.is_some() {
                    return Err(ConfigError::general("kind `hbt` takes no imaging settings"));
                }
                let h = self.hbt.as_ref().ok_or_else(|| ConfigError::general("kind `hbt` needs hbt settings"))?;
                positive("source.coherence_time", h.coherence_time)?;
                positive("hbt.dt", h.dt)?;
                positive("hbt.duration", h.duration)?;
                positive("hbt.start_rate", h.start_rate)?;
                positive("hbt.stop_rate", h.stop_rate)?;
                positive("hbt.bin_width", h.bin_width)?;
                positive("hbt.window", h.window)?;
                non_negative("hbt.jitter", h.jitter)?;
                non_negative("hbt.dead_time", h.dead_time)?;
                if h.runs == 0 {
                    return Err(ConfigError::field("hbt.runs", "must be at least 1"));
                }
                h.to_core()?;
            }
            ScenarioKind::FocusedImage | ScenarioKind::Z2Sweep => {
                if self.hbt.is_some() {
                    return Err(ConfigError::general(format!("kind `{kind}` takes no hbt settings")));
                }
                let im = self
                    .imaging
                    .as_ref()
                    .ok_or_else(|| ConfigError::general(format!("kind `{kind}` needs imaging settings")))?;
                positive("source.wavelength", im.source.wavelength)?;
                positive("source.half_width", im.source.half_width)?;
                positive("source.coherence_time", im.source.coherence_time)?;
                positive("geometry.z1", im.z1)?;
                match (self.kind, im.z2, &im.sweep) {
                    (ScenarioKind::FocusedImage, Some(z2), None) => positive("geometry.z2", z2)?,
                    (ScenarioKind::Z2Sweep, None, Some(s)) => {
                        positive("sweep.z2_min", s.z2_min)?;
                        positive("sweep.z2_max", s.z2_max)?;
                        if s.z2_max <= s.z2_min {
                            return Err(ConfigError::field("sweep.z2_max", "must exceed sweep.z2_min"));
                        }
                        if s.z2_steps < 2 {
                            return Err(ConfigError::field("sweep.z2_steps", "must be at least 2"));
                        }
                    }
                    (ScenarioKind::FocusedImage, _, _) => {
                        return Err(ConfigError::general("focused_image needs geometry.z2 and no sweep"));
                    }
                    _ => return Err(ConfigError::general("z2_sweep needs sweep settings and no geometry.z2")),
                }
                match im.mask {
                    MaskSpec::DoubleSlit { width, center_separation } => {
                        positive("mask.width", width)?;
                        positive("mask.center_separation", center_separation)?;
                        if center_separation < width {
                            return Err(ConfigError::field("mask.center_separation", "must be at least mask.width"));
                        }
                    }
                    MaskSpec::PinholePair { d1, d2, separation } => {
                        positive("mask.d1", d1)?;
                        positive("mask.d2", d2)?;
                        positive("mask.separation", separation)?;
                        if separation < (d1 + d2) / 2.0 {
                            return Err(ConfigError::field("mask.separation", "pinholes overlap"));
                        }
                    }
                    MaskSpec::Slit { width, center } => {
                        positive("mask.width", width)?;
                        if !center.is_finite() {
                            return Err(ConfigError::field("mask.center", "must be finite"));
                        }
                    }
                    MaskSpec::Uniform => {}
                }
                let e = &im.ensemble;
                if self.method.runs_montecarlo() && e.n_realizations < 2 {
                    return Err(ConfigError::field("ensemble.n_realizations", "must be at least 2"));
                }
                non_negative("ensemble.detector_aperture", e.detector_aperture)?;
                if let Some(step) = e.scan_step {
                    positive("ensemble.scan_step", step)?;
                    if self.kind != ScenarioKind::FocusedImage {
                        return Err(ConfigError::field("ensemble.scan_step", "applies to focused_image only"));
                    }
                    if im.grid.detector_points.is_some() {
                        return Err(ConfigError::field(
                            "grid.detector_points",
                            "cannot be combined with ensemble.scan_step",
                        ));
                    }
                }
                points("grid.source_points", im.grid.source_points)?;
                points("grid.object_points", im.grid.object_points)?;
                points("grid.detector_points", im.grid.detector_points)?;
            }
        }
        Ok(())
    }

    /// Normalized document: every setting, defaults included, in canonical
    /// order and base units. Parsing it gives back an equal config.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        let len = |v: f64| format_quantity(v, Dimension::Length);
        let time = |v: f64| format_quantity(v, Dimension::Time);
        let rate = |v: f64| format_quantity(v, Dimension::Rate);

        put("kind", self.kind.name().into());
        put("method", self.method.name().into());
        put("seed", self.seed.to_string());
        if let Some(dir) = &self.output.dir {
            put("output.dir", dir.display().to_string());
        }
        put("output.svg", self.output.svg.to_string());
        if let Some(im) = &self.imaging {
            put("source.wavelength", len(im.source.wavelength));
            put(
                "source.profile",
                match im.source.shape {
                    SourceShape::Uniform => "uniform".into(),
                    SourceShape::Gaussian => "gaussian".into(),
                },
            );
            put("source.half_width", len(im.source.half_width));
            put("source.coherence_time", time(im.source.coherence_time));
            put("geometry.z1", len(im.z1));
            if let Some(z2) = im.z2 {
                put("geometry.z2", len(z2));
            }
            if let Some(s) = &im.sweep {
                put("sweep.z2_min", len(s.z2_min));
                put("sweep.z2_max", len(s.z2_max));
                put("sweep.z2_steps", s.z2_steps.to_string());
            }
            put("mask.kind", im.mask.name().into());
            match im.mask {
                MaskSpec::DoubleSlit { width, center_separation } => {
                    put("mask.width", len(width));
                    put("mask.center_separation", len(center_separation));
                }
                MaskSpec::PinholePair { d1, d2, separation } => {
                    put("mask.d1", len(d1));
                    put("mask.d2", len(d2));
                    put("mask.separation", len(separation));
                }
                MaskSpec::Slit { width, center } => {
                    put("mask.width", len(width));
                    put("mask.center", len(center));
                }
                MaskSpec::Uniform => {}
            }
            put("ensemble.n_realizations", im.ensemble.n_realizations.to_string());
            put("ensemble.detector_aperture", len(im.ensemble.detector_aperture));
            if let Some(step) = im.ensemble.scan_step {
                put("ensemble.scan_step", len(step));
            }
            for (key, n) in [
                ("grid.source_points", im.grid.source_points),
                ("grid.object_points", im.grid.object_points),
                ("grid.detector_points", im.grid.detector_points),
            ] {
                if let Some(n) = n {
                    put(key, n.to_string());
                }
            }
        }
        if let Some(h) = &self.hbt {
            put("source.coherence_time", time(h.coherence_time));
            put("hbt.dt", time(h.dt));
            put("hbt.duration", time(h.duration));
            put("hbt.start_rate", rate(h.start_rate));
            put("hbt.stop_rate", rate(h.stop_rate));
            put("hbt.jitter", time(h.jitter));
            put("hbt.dead_time", time(h.dead_time));
            put("hbt.bin_width", time(h.bin_width));
            put("hbt.window", time(h.window));
            put("hbt.runs", h.runs.to_string());
            put("hbt.shared_trace", h.shared_trace.to_string());
        }
        out
    }
}
