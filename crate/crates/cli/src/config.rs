// SPDX-License-Identifier: Apache-2.0

//! Sectioned `key = value` scenario files.
//!
//! ```text
//! [spectrum]
//! shape = q_gaussian
//! q = 1.39
//! coupling = 8.6 MHz
//! fwhm = 9.4 MHz
//!
//! [environment]
//! cavity = 2.69 GHz
//! kappa = 0.4 MHz
//!
//! [outputs]
//! list = u, intensity
//! ```
//!
//! Every dimensioned value carries its unit. `[hole]` may repeat; all other sections
//! appear at most once.

use std::collections::BTreeSet;
use std::fmt;

use cavity_core::{DriveKind, HoleProfile, InitialCavityState, Lineshape, C64};

use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 10] =
    ["spectrum", "hole", "environment", "drive", "initial", "grid", "outputs", "correlation", "frequency", "sweep"];

fn lex(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "section header is missing ']'"))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(line, format!("unknown section [{name}]")));
            }
            if name != "hole" {
                if let Some(prev) = sections.iter().find(|s| s.name == name) {
                    return Err(ConfigError::at(line, format!("[{name}] already defined on line {}", prev.line)));
                }
            }
            sections.push(Section { name, line, entries: Vec::new() });
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| ConfigError::at(line, "expected 'key = value'"))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, "expected 'key = value'"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, "key outside of any section"))?;
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::at(line, format!("'{key}' already set on line {}", prev.line)));
        }
        section.entries.push(Entry { key, value, line });
    }
    Ok(sections)
}

/// Typed access to one section, rejecting keys that are never read.
struct Reader<'a> {
    section: &'a Section,
    allowed: &'static [&'static str],
    rabi: Option<f64>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a Section, allowed: &'static [&'static str], rabi: Option<f64>) -> Result<Self, ConfigError> {
        for e in &section.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(ConfigError::at(
                    e.line,
                    format!("unknown key '{}' in [{}] (expected one of: {})", e.key, section.name, allowed.join(", ")),
                ));
            }
        }
        Ok(Reader { section, allowed, rabi })
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        debug_assert!(self.allowed.contains(&key));
        self.section.entries.iter().find(|e| e.key == key)
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::at(self.section.line, format!("[{}] needs '{key}'", self.section.name))
    }

    fn quantity(&self, key: &str, dim: Dimension) -> Result<Option<(f64, usize)>, ConfigError> {
        self.entry(key)
            .map(|e| {
                parse_quantity(&e.value, dim, self.rabi)
                    .map(|x| (x, e.line))
                    .map_err(|m| ConfigError::at(e.line, format!("{key}: {m}")))
            })
            .transpose()
    }

    fn get(&self, key: &str, dim: Dimension) -> Result<Option<f64>, ConfigError> {
        Ok(self.quantity(key, dim)?.map(|q| q.0))
    }

    fn require(&self, key: &str, dim: Dimension) -> Result<f64, ConfigError> {
        self.get(key, dim)?.ok_or_else(|| self.missing(key))
    }

    fn word(&self, key: &str) -> Option<(String, usize)> {
        self.entry(key).map(|e| (e.value.to_ascii_lowercase(), e.line))
    }

    fn list(&self, key: &str) -> Option<(Vec<String>, usize)> {
        self.entry(key).map(|e| {
            let items = e.value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            (items, e.line)
        })
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.entry(key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|_| ConfigError::at(e.line, format!("{key}: expected a whole number, got '{}'", e.value)))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Value(f64),
    /// Chosen so the normal modes sit at ω_s ± Ω_R/2.
    Calibrate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub shape: Lineshape,
    /// Absolute ensemble centre, rad/µs.
    pub center: f64,
    pub coupling: Coupling,
    pub fwhm: f64,
    /// Ω_R, rad/µs: hole placement scale and calibration target.
    pub rabi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleConfig {
    /// Offset from the ensemble centre, rad/µs.
    pub offset: f64,
    pub half_width: f64,
    pub profile: HoleProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Value(f64),
    /// Peak coherent photon number max_t |y|².
    Photons(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub kind: DriveKind,
    pub amplitude: Amplitude,
    /// Absolute carrier, rad/µs.
    pub carrier: f64,
    pub t_on: f64,
    pub t_off: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub dt: f64,
    pub horizon: f64,
    pub v_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    U,
    Y,
    VDiag,
    Coefficients,
    Intensity,
    G1Grid,
    G2Grid,
    QuantumCorrelation,
    SelfEnergy,
    Response,
    LocalizedModes,
}

impl Output {
    pub const ALL: [Output; 11] = [
        Output::U,
        Output::Y,
        Output::VDiag,
        Output::Coefficients,
        Output::Intensity,
        Output::G1Grid,
        Output::G2Grid,
        Output::QuantumCorrelation,
        Output::SelfEnergy,
        Output::Response,
        Output::LocalizedModes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::U => "u",
            Output::Y => "y",
            Output::VDiag => "v_diag",
            Output::Coefficients => "coefficients",
            Output::Intensity => "intensity",
            Output::G1Grid => "g1_grid",
            Output::G2Grid => "g2_grid",
            Output::QuantumCorrelation => "quantum_correlation",
            Output::SelfEnergy => "self_energy",
            Output::Response => "response",
            Output::LocalizedModes => "localized_modes",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Output::ALL.into_iter().find(|o| o.name() == s.to_ascii_lowercase())
    }

    pub fn is_two_time(self) -> bool {
        matches!(self, Output::G1Grid | Output::G2Grid | Output::QuantumCorrelation)
    }

    pub fn needs_time_solve(self) -> bool {
        !matches!(self, Output::SelfEnergy | Output::Response | Output::LocalizedModes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationConfig {
    pub t_step: f64,
    pub t_max: f64,
    pub tau_step: f64,
    pub tau_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyConfig {
    /// Offsets from the cavity, rad/µs.
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Coupling,
    Kappa,
    SpinTemperature,
    EnvTemperature,
    Fwhm,
    Q,
    HoleOffset,
    DriveAmplitude,
    TOff,
}

impl SweepParameter {
    const ALL: [SweepParameter; 9] = [
        SweepParameter::Coupling,
        SweepParameter::Kappa,
        SweepParameter::SpinTemperature,
        SweepParameter::EnvTemperature,
        SweepParameter::Fwhm,
        SweepParameter::Q,
        SweepParameter::HoleOffset,
        SweepParameter::DriveAmplitude,
        SweepParameter::TOff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Coupling => "coupling",
            SweepParameter::Kappa => "kappa",
            SweepParameter::SpinTemperature => "spin_temperature",
            SweepParameter::EnvTemperature => "env_temperature",
            SweepParameter::Fwhm => "fwhm",
            SweepParameter::Q => "q",
            SweepParameter::HoleOffset => "hole_offset",
            SweepParameter::DriveAmplitude => "drive_amplitude",
            SweepParameter::TOff => "t_off",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            SweepParameter::SpinTemperature | SweepParameter::EnvTemperature => Dimension::Temperature,
            SweepParameter::Q => Dimension::Number,
            SweepParameter::TOff => Dimension::Time,
            _ => Dimension::Frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spectrum: SpectrumConfig,
    pub holes: Vec<HoleConfig>,
    pub kappa: f64,
    pub spin_temperature: f64,
    pub env_temperature: f64,
    /// Absolute cavity frequency, rad/µs.
    pub cavity: f64,
    pub drive: Option<DriveConfig>,
    pub initial: Option<InitialCavityState>,
    pub grid: GridConfig,
    pub outputs: BTreeSet<Output>,
    pub format: SeriesFormat,
    /// From `[outputs] directory`, relative to the config file.
    pub directory: Option<String>,
    pub correlation: CorrelationConfig,
    pub frequency: Option<FrequencyConfig>,
    pub sweep: Option<SweepConfig>,
}

fn section<'a>(all: &'a [Section], name: &str) -> Option<&'a Section> {
    all.iter().find(|s| s.name == name)
}

pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
    parse_with(text, true)
}

/// As `parse`; with `require_outputs = false` a missing `[outputs]` section is allowed
/// (the `modes` command picks its own output).
pub fn parse_with(text: &str, require_outputs: bool) -> Result<Scenario, ConfigError> {
    let sections = lex(text)?;

    // [spectrum] first: it fixes the 'rabi' unit used everywhere else
    let spec = section(&sections, "spectrum").ok_or_else(|| ConfigError::global("missing [spectrum] section"))?;
    let env = section(&sections, "environment").ok_or_else(|| ConfigError::global("missing [environment] section"))?;
    let env_r = Reader::new(env, &["cavity", "kappa", "spin_temperature", "env_temperature", "temperature"], None)?;
    let cavity = env_r.require("cavity", Dimension::Frequency)?;

    let sr = Reader::new(spec, &["shape", "q", "center", "coupling", "fwhm", "rabi"], None)?;
    let coupling = match sr.word("coupling") {
        Some((w, _)) if w == "calibrate" => Coupling::Calibrate,
        Some(_) => {
            let (c, line) = sr.quantity("coupling", Dimension::Frequency)?.expect("present");
            if c < 0.0 {
                return Err(ConfigError::at(line, "coupling must be non-negative"));
            }
            Coupling::Value(c)
        }
        None => return Err(sr.missing("coupling")),
    };
    let rabi = match (sr.get("rabi", Dimension::Frequency)?, coupling) {
        (Some(r), _) => r,
        (None, Coupling::Value(c)) => 2.0 * c,
        (None, Coupling::Calibrate) => {
            return Err(ConfigError::at(spec.line, "'coupling = calibrate' needs 'rabi' (the target splitting)"))
        }
    };
    let sr = Reader { rabi: Some(rabi), ..sr };
    let (shape_name, shape_line) = sr.word("shape").ok_or_else(|| sr.missing("shape"))?;
    let shape = match shape_name.as_str() {
        "gaussian" => Lineshape::Gaussian,
        "lorentzian" => Lineshape::Lorentzian,
        "q_gaussian" | "q-gaussian" | "qgaussian" => {
            Lineshape::QGaussian { q: sr.require("q", Dimension::Number)? }
        }
        other => {
            return Err(ConfigError::at(
                shape_line,
                format!("unknown shape '{other}' (gaussian, lorentzian or q_gaussian)"),
            ))
        }
    };
    if !matches!(shape, Lineshape::QGaussian { .. }) {
        if let Some(e) = sr.entry("q") {
            return Err(ConfigError::at(e.line, "'q' only applies to shape = q_gaussian"));
        }
    }
    let spectrum = SpectrumConfig {
        shape,
        center: sr.get("center", Dimension::Frequency)?.unwrap_or(cavity),
        coupling,
        fwhm: sr.require("fwhm", Dimension::Frequency)?,
        rabi,
    };
    let ctx = Some(rabi);

    let mut holes = Vec::new();
    for h in sections.iter().filter(|s| s.name == "hole") {
        let hr = Reader::new(h, &["offset", "center", "half_width", "profile"], ctx)?;
        let offset = match (hr.get("offset", Dimension::Frequency)?, hr.get("center", Dimension::Frequency)?) {
            (Some(o), None) => o,
            (None, Some(c)) => c - spectrum.center,
            (Some(_), Some(_)) => return Err(ConfigError::at(h.line, "give either 'offset' or 'center', not both")),
            (None, None) => return Err(ConfigError::at(h.line, "[hole] needs 'offset' or 'center'")),
        };
        let profile = match hr.word("profile") {
            None => HoleProfile::Rectangular,
            Some((w, _)) if w == "rectangular" => HoleProfile::Rectangular,
            Some((w, _)) if w == "smooth" || w == "smooth_notch" => HoleProfile::SmoothNotch,
            Some((w, line)) => {
                return Err(ConfigError::at(line, format!("unknown hole profile '{w}' (rectangular or smooth)")))
            }
        };
        let half_width = hr.get("half_width", Dimension::Frequency)?.unwrap_or(0.02 * rabi);
        holes.push(HoleConfig { offset, half_width, profile });
    }

    let env_r = Reader { rabi: ctx, ..env_r };
    let both = env_r.get("temperature", Dimension::Temperature)?;
    let pick = |key: &str| -> Result<f64, ConfigError> {
        match (env_r.quantity(key, Dimension::Temperature)?, both) {
            (Some((_, line)), Some(_)) => {
                Err(ConfigError::at(line, format!("'{key}' conflicts with 'temperature' (which sets both)")))
            }
            (Some((t, _)), None) => Ok(t),
            (None, b) => Ok(b.unwrap_or(0.0)),
        }
    };
    let (spin_temperature, env_temperature) = (pick("spin_temperature")?, pick("env_temperature")?);
    let kappa = env_r.get("kappa", Dimension::Frequency)?.unwrap_or(0.0);

    let drive = section(&sections, "drive").map(|d| parse_drive(d, ctx, cavity)).transpose()?.flatten();
    let initial = section(&sections, "initial").map(|s| parse_initial(s, ctx)).transpose()?;

    let grid = match section(&sections, "grid") {
        None => GridConfig { dt: 0.0005, horizon: 2.0, v_stride: 4 },
        Some(g) => {
            let gr = Reader::new(g, &["dt", "horizon", "v_stride"], ctx)?;
            GridConfig {
                dt: gr.get("dt", Dimension::Time)?.unwrap_or(0.0005),
                horizon: gr.get("horizon", Dimension::Time)?.unwrap_or(2.0),
                v_stride: gr.count("v_stride")?.unwrap_or(4),
            }
        }
    };

    let (mut outputs, mut format, mut directory, mut list_line) = (BTreeSet::new(), SeriesFormat::Csv, None, 0);
    match section(&sections, "outputs") {
        None if require_outputs => return Err(ConfigError::global("no outputs requested")),
        None => {}
        Some(out) => {
            let or = Reader::new(out, &["list", "format", "directory"], ctx)?;
            let (names, line) = or.list("list").ok_or_else(|| ConfigError::at(out.line, "no outputs requested"))?;
            list_line = line;
            for n in &names {
                let o = Output::parse(n).ok_or_else(|| {
                    let all: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
                    ConfigError::at(line, format!("unknown output '{n}' (expected one of: {})", all.join(", ")))
                })?;
                outputs.insert(o);
            }
            if outputs.is_empty() && require_outputs {
                return Err(ConfigError::at(line, "no outputs requested"));
            }
            format = match or.word("format") {
                None => SeriesFormat::Csv,
                Some((w, _)) if w == "csv" => SeriesFormat::Csv,
                Some((w, _)) if w == "json" => SeriesFormat::Json,
                Some((w, line)) => return Err(ConfigError::at(line, format!("unknown format '{w}' (csv or json)"))),
            };
            directory = or.entry("directory").map(|e| e.value.clone());
        }
    }

    let half = grid.horizon / 2.0;
    let correlation = match section(&sections, "correlation") {
        None => CorrelationConfig { t_step: 0.01, t_max: half, tau_step: 0.01, tau_max: half },
        Some(c) => {
            let cr = Reader::new(c, &["t_step", "t_max", "tau_step", "tau_max"], ctx)?;
            CorrelationConfig {
                t_step: cr.get("t_step", Dimension::Time)?.unwrap_or(0.01),
                t_max: cr.get("t_max", Dimension::Time)?.unwrap_or(half),
                tau_step: cr.get("tau_step", Dimension::Time)?.unwrap_or(0.01),
                tau_max: cr.get("tau_max", Dimension::Time)?.unwrap_or(half),
            }
        }
    };
    if outputs.iter().any(|o| o.is_two_time()) {
        if initial.is_none() {
            return Err(ConfigError::at(list_line, "two-time outputs need an [initial] section"));
        }
        let line = section(&sections, "correlation").map_or(list_line, |s| s.line);
        if correlation.t_step <= 0.0 || correlation.tau_step <= 0.0 {
            return Err(ConfigError::at(line, "correlation steps must be positive"));
        }
        if correlation.t_max + correlation.tau_max > grid.horizon * (1.0 + 1e-12) {
            return Err(ConfigError::at(line, "t_max + tau_max exceeds the grid horizon"));
        }
    }

    let frequency = section(&sections, "frequency")
        .map(|f| -> Result<FrequencyConfig, ConfigError> {
            let fr = Reader::new(f, &["min", "max", "points"], ctx)?;
            let fc = FrequencyConfig {
                min: fr.require("min", Dimension::Frequency)?,
                max: fr.require("max", Dimension::Frequency)?,
                points: fr.count("points")?.unwrap_or(2001),
            };
            if !(fc.max > fc.min) || fc.points < 2 {
                return Err(ConfigError::at(f.line, "need min < max and at least 2 points"));
            }
            Ok(fc)
        })
        .transpose()?;

    let sweep = section(&sections, "sweep")
        .map(|s| -> Result<SweepConfig, ConfigError> {
            let sw = Reader::new(s, &["parameter", "values"], ctx)?;
            let (name, pline) = sw.word("parameter").ok_or_else(|| sw.missing("parameter"))?;
            let parameter = SweepParameter::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
                let all: Vec<&str> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
                ConfigError::at(pline, format!("unknown sweep parameter '{name}' (expected one of: {})", all.join(", ")))
            })?;
            let (items, vline) = sw.list("values").ok_or_else(|| sw.missing("values"))?;
            if items.is_empty() {
                return Err(ConfigError::at(vline, "sweep needs at least one value"));
            }
            // a unit on the last value applies to bare numbers before it: "0.5, 1, 4 MHz"
            let unit = items.last().map(|v| unit_suffix(v)).unwrap_or_default();
            let values = items
                .iter()
                .map(|v| {
                    let text = if unit_suffix(v).is_empty() { format!("{v} {unit}") } else { v.clone() };
                    parse_quantity(&text, parameter.dimension(), ctx).map_err(|m| ConfigError::at(vline, m))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if parameter == SweepParameter::DriveAmplitude && drive.is_none() {
                return Err(ConfigError::at(pline, "sweeping drive_amplitude needs a [drive] section"));
            }
            if parameter == SweepParameter::TOff && drive.is_none() {
                return Err(ConfigError::at(pline, "sweeping t_off needs a [drive] section"));
            }
            if parameter == SweepParameter::Q && !matches!(shape, Lineshape::QGaussian { .. }) {
                return Err(ConfigError::at(pline, "sweeping q needs shape = q_gaussian"));
            }
            Ok(SweepConfig { parameter, values })
        })
        .transpose()?;

    Ok(Scenario {
        spectrum,
        holes,
        kappa,
        spin_temperature,
        env_temperature,
        cavity,
        drive,
        initial,
        grid,
        outputs,
        format,
        directory,
        correlation,
        frequency,
        sweep,
    })
}

fn unit_suffix(v: &str) -> String {
    let t = v.trim();
    match t.find(|c: char| c.is_whitespace()) {
        Some(i) => t[i..].trim().to_string(),
        None => {
            // "4MHz": unit glued to the number
            match parse_quantity(t, Dimension::Number, None) {
                Ok(_) => String::new(),
                Err(_) => t.trim_start_matches(|c: char| c.is_ascii_digit() || "+-.eE".contains(c)).to_string(),
            }
        }
    }
}

fn parse_drive(d: &Section, rabi: Option<f64>, cavity: f64) -> Result<Option<DriveConfig>, ConfigError> {
    let dr = Reader::new(
        d,
        &["kind", "amplitude", "photons", "carrier", "t_on", "t_off", "t_flip", "modulation", "phase"],
        rabi,
    )?;
    let (kind_name, kind_line) = dr.word("kind").ok_or_else(|| dr.missing("kind"))?;
    let t_on = dr.get("t_on", Dimension::Time)?.unwrap_or(0.0);
    let t_off = match dr.word("t_off") {
        Some((w, _)) if w == "never" || w == "inf" => f64::INFINITY,
        Some(_) => dr.require("t_off", Dimension::Time)?,
        None => f64::INFINITY,
    };
    let kind = match kind_name.as_str() {
        "none" => return Ok(None),
        "rectangular" => DriveKind::Rectangular,
        "phase_flip" => DriveKind::PhaseFlip { t_flip: dr.require("t_flip", Dimension::Time)? },
        "sinusoidal" => DriveKind::Sinusoidal {
            modulation: match dr.get("modulation", Dimension::Frequency)? {
                Some(m) => m,
                None => rabi.ok_or_else(|| dr.missing("modulation"))?,
            },
            phase: dr.get("phase", Dimension::Number)?.unwrap_or(0.0),
        },
        other => {
            return Err(ConfigError::at(
                kind_line,
                format!("unknown drive kind '{other}' (none, rectangular, phase_flip or sinusoidal)"),
            ))
        }
    };
    let amplitude = match (dr.quantity("amplitude", Dimension::Frequency)?, dr.quantity("photons", Dimension::Number)?) {
        (Some((a, _)), None) => Amplitude::Value(a),
        (None, Some((n, line))) => {
            if !(n > 0.0) {
                return Err(ConfigError::at(line, "photons must be positive"));
            }
            Amplitude::Photons(n)
        }
        (Some(_), Some((_, line))) => return Err(ConfigError::at(line, "give either 'amplitude' or 'photons'")),
        (None, None) => return Err(ConfigError::at(d.line, "[drive] needs 'amplitude' or 'photons'")),
    };
    let carrier = match dr.word("carrier") {
        None => cavity,
        Some((w, _)) if w == "cavity" => cavity,
        Some(_) => dr.require("carrier", Dimension::Frequency)?,
    };
    let cfg = DriveConfig { kind, amplitude, carrier, t_on, t_off };
    probe(&cfg).validate().map_err(|e| ConfigError::at(d.line, e.to_string()))?;
    Ok(Some(cfg))
}

/// Drive spec with a placeholder amplitude, for validation.
fn probe(cfg: &DriveConfig) -> cavity_core::DriveSpec {
    let a = match cfg.amplitude {
        Amplitude::Value(a) => a,
        Amplitude::Photons(_) => 1.0,
    };
    cavity_core::DriveSpec { kind: cfg.kind, amplitude: a, carrier: cfg.carrier, t_on: cfg.t_on, t_off: cfg.t_off }
}

fn parse_initial(s: &Section, rabi: Option<f64>) -> Result<InitialCavityState, ConfigError> {
    let ir = Reader::new(s, &["state", "alpha_re", "alpha_im", "mean_photons"], rabi)?;
    let (state, line) = ir.word("state").unwrap_or(("vacuum".into(), s.line));
    let init = match state.as_str() {
        "vacuum" => InitialCavityState::Vacuum,
        "coherent" => InitialCavityState::coherent(C64::new(
            ir.get("alpha_re", Dimension::Number)?.unwrap_or(0.0),
            ir.get("alpha_im", Dimension::Number)?.unwrap_or(0.0),
        )),
        "thermal" => InitialCavityState::Thermal { mean_photons: ir.require("mean_photons", Dimension::Number)? },
        other => {
            return Err(ConfigError::at(line, format!("unknown state '{other}' (vacuum, coherent or thermal)")))
        }
    };
    init.validate().map_err(|e| ConfigError::at(s.line, e.to_string()))?;
    Ok(init)
}
