//! Run configuration: documented defaults, flat key=value files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pvolume::ccsolve::SolveMode;
use pvolume::potentials::Model;
use pvolume::refpairs::Bc;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("config key '{key}': cannot use '{value}': {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{path}:{line}: expected key=value")]
    Syntax { path: PathBuf, line: usize },
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Every parameter any subcommand reads. Defaults are listed in [`KEYS`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub m: i32,
    pub intensity: f64,
    pub n: usize,
    pub bc: Bc,
    pub c3f: Option<f64>,
    pub m0: f64,
    pub oracle: bool,
    pub x00: f64,
    pub xmax: f64,
    pub gamma_e: f64,
    pub gamma_l: f64,
    pub gamma_i: f64,
    pub xmax_lo: f64,
    pub xmax_hi: f64,
    pub points: Option<usize>,
    pub x00_lo: f64,
    pub x00_hi: f64,
    pub n_max: usize,
    pub label: bool,
    pub mode: SolveMode,
    pub rtol: f64,
    pub atol: f64,
    pub refine_tol: f64,
    pub tracking_tol: f64,
    pub mu: f64,
    pub c6: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub dipole: Option<f64>,
    pub laser: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub resonances: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub seedless: bool,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Adiabatic,
            m: 0,
            intensity: 6.0,
            n: 3,
            bc: Bc::Bc2,
            c3f: None,
            m0: 0.0,
            oracle: false,
            x00: 0.147,
            xmax: 100.0,
            gamma_e: 0.0,
            gamma_l: 0.0,
            gamma_i: 0.0,
            xmax_lo: 20.0,
            xmax_hi: 500.0,
            points: None,
            x00_lo: 0.142152,
            x00_hi: 0.152135,
            n_max: 4,
            label: true,
            mode: SolveMode::Outward,
            rtol: 1e-11,
            atol: 1e-15,
            refine_tol: 1e-7,
            tracking_tol: 1e-3,
            mu: 66.452_725_966_5,
            c6: 6890.0,
            alpha1: 401.0,
            alpha2: 401.0,
            dipole: None,
            laser: None,
            format: None,
            out: None,
            resonances: None,
            gnuplot: None,
            trace: None,
            cache_dir: None,
            seedless: false,
            workers: None,
        }
    }
}

/// Keys with their default and meaning, in documentation order.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("model", "adiabatic", "effective potential: diabatic, adiabatic or nonadiabatic"),
    ("m", "0", "magnetic quantum number"),
    ("intensity", "6", "reduced intensity"),
    ("n", "3", "number of coupled odd partial waves"),
    ("bc", "BC2", "reference pair: BC2 or BC23 (BC2k for lk only)"),
    ("c3f", "auto", "BC23 reference coefficient; auto is |c3| of the model"),
    ("m0", "0", "constant term used by lk expansions"),
    ("oracle", "false", "coeffs: extract coefficients numerically"),
    ("x00", "0.147", "nodal parameter"),
    ("xmax", "100", "solve: matching radius"),
    ("gamma_e", "0", "nodal line energy slope (flag --gammaE)"),
    ("gamma_l", "0", "nodal line l(l+1) slope (flag --gammaL)"),
    ("gamma_i", "0", "nodal line intensity slope (flag --gammaI)"),
    ("xmax_lo", "20", "fit grid start"),
    ("xmax_hi", "500", "fit grid end"),
    ("points", "auto", "grid density: fit 50, scan and figures 150, table3 24 candidate x00"),
    ("x00_lo", "0.142152", "scan range start"),
    ("x00_hi", "0.152135", "scan range end"),
    ("n_max", "4", "fig2: largest channel count"),
    ("label", "true", "scan: label resonances by tracking n = 1..n"),
    ("mode", "outward", "solver: outward or inward"),
    ("rtol", "1e-11", "integrator relative tolerance"),
    ("atol", "1e-15", "integrator absolute tolerance"),
    ("refine_tol", "1e-7", "initial pole bisection width"),
    ("tracking_tol", "1e-3", "pole matching tolerance across n"),
    ("mu", "66.4527259665", "units: reduced mass in Da"),
    ("c6", "6890", "units: C6 in Eh a0^6"),
    ("alpha1", "401", "units: polarizability of atom 1 in a0^3"),
    ("alpha2", "401", "units: polarizability of atom 2 in a0^3"),
    ("dipole", "none", "units: dipole strength D in J m^3"),
    ("laser", "none", "units: laser intensity in W/m^2"),
    ("format", "auto", "csv or json; auto picks the subcommand's natural format"),
    ("out", "stdout", "primary output path"),
    ("resonances", "none", "scan, fig2: resonance list JSON path"),
    ("gnuplot", "none", "scan, fig1, fig2: two-column plot data path"),
    ("trace", "none", "fit: trace CSV path"),
    ("cache_dir", "$PVOLUME_CACHE_DIR or .pvolume-cache", "result cache directory"),
    ("seedless", "false", "bypass the result cache"),
    ("workers", "all cores", "worker threads"),
];

/// Maps file keys and flag ids to canonical keys.
pub fn canonical_key(raw: &str) -> String {
    let k = raw.trim().to_ascii_lowercase().replace('-', "_");
    match k.as_str() {
        "gammae" => "gamma_e".into(),
        "gammal" => "gamma_l".into(),
        "gammai" => "gamma_i".into(),
        _ => k,
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn optional<T: FromStr>(key: &str, value: &str, none: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    if value.trim().eq_ignore_ascii_case(none) {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn parse_mode(key: &str, value: &str) -> Result<SolveMode, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "outward" => Ok(SolveMode::Outward),
        "inward" => Ok(SolveMode::Inward),
        _ => Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "expected outward or inward".into() }),
    }
}

fn show<T: fmt::Debug>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or_else(|| none.to_string(), |x| format!("{x:?}"))
}

fn show_path(v: &Option<PathBuf>) -> String {
    v.as_ref().map_or_else(String::new, |p| p.display().to_string())
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, raw_key: &str, value: &str) -> Result<(), ConfigError> {
        let key = canonical_key(raw_key);
        let k = key.as_str();
        match k {
            "model" => self.model = parse(k, value)?,
            "m" => self.m = parse(k, value)?,
            "intensity" => self.intensity = parse(k, value)?,
            "n" => self.n = parse(k, value)?,
            "bc" => self.bc = parse(k, value)?,
            "c3f" => self.c3f = optional(k, value, "auto")?,
            "m0" => self.m0 = parse(k, value)?,
            "oracle" => self.oracle = parse(k, value)?,
            "x00" => self.x00 = parse(k, value)?,
            "xmax" => self.xmax = parse(k, value)?,
            "gamma_e" => self.gamma_e = parse(k, value)?,
            "gamma_l" => self.gamma_l = parse(k, value)?,
            "gamma_i" => self.gamma_i = parse(k, value)?,
            "xmax_lo" => self.xmax_lo = parse(k, value)?,
            "xmax_hi" => self.xmax_hi = parse(k, value)?,
            "points" => self.points = optional(k, value, "auto")?,
            "x00_lo" => self.x00_lo = parse(k, value)?,
            "x00_hi" => self.x00_hi = parse(k, value)?,
            "n_max" => self.n_max = parse(k, value)?,
            "label" => self.label = parse(k, value)?,
            "mode" => self.mode = parse_mode(k, value)?,
            "rtol" => self.rtol = parse(k, value)?,
            "atol" => self.atol = parse(k, value)?,
            "refine_tol" => self.refine_tol = parse(k, value)?,
            "tracking_tol" => self.tracking_tol = parse(k, value)?,
            "mu" => self.mu = parse(k, value)?,
            "c6" => self.c6 = parse(k, value)?,
            "alpha1" => self.alpha1 = parse(k, value)?,
            "alpha2" => self.alpha2 = parse(k, value)?,
            "dipole" => self.dipole = optional(k, value, "none")?,
            "laser" => self.laser = optional(k, value, "none")?,
            "format" => self.format = optional(k, value, "auto")?,
            "out" => self.out = path(value),
            "resonances" => self.resonances = path(value),
            "gnuplot" => self.gnuplot = path(value),
            "trace" => self.trace = path(value),
            "cache_dir" => self.cache_dir = path(value),
            "seedless" => self.seedless = parse(k, value)?,
            "workers" => self.workers = optional(k, value, "auto")?,
            _ => return Err(ConfigError::UnknownKey(raw_key.trim().to_string())),
        }
        Ok(())
    }

    /// Canonical text of one key, as hashed and logged.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model" => self.model.to_string(),
            "m" => self.m.to_string(),
            "intensity" => format!("{:?}", self.intensity),
            "n" => self.n.to_string(),
            "bc" => self.bc.to_string(),
            "c3f" => show(&self.c3f, "auto"),
            "m0" => format!("{:?}", self.m0),
            "oracle" => self.oracle.to_string(),
            "x00" => format!("{:?}", self.x00),
            "xmax" => format!("{:?}", self.xmax),
            "gamma_e" => format!("{:?}", self.gamma_e),
            "gamma_l" => format!("{:?}", self.gamma_l),
            "gamma_i" => format!("{:?}", self.gamma_i),
            "xmax_lo" => format!("{:?}", self.xmax_lo),
            "xmax_hi" => format!("{:?}", self.xmax_hi),
            "points" => show(&self.points, "auto"),
            "x00_lo" => format!("{:?}", self.x00_lo),
            "x00_hi" => format!("{:?}", self.x00_hi),
            "n_max" => self.n_max.to_string(),
            "label" => self.label.to_string(),
            "mode" => format!("{:?}", self.mode).to_ascii_lowercase(),
            "rtol" => format!("{:?}", self.rtol),
            "atol" => format!("{:?}", self.atol),
            "refine_tol" => format!("{:?}", self.refine_tol),
            "tracking_tol" => format!("{:?}", self.tracking_tol),
            "mu" => format!("{:?}", self.mu),
            "c6" => format!("{:?}", self.c6),
            "alpha1" => format!("{:?}", self.alpha1),
            "alpha2" => format!("{:?}", self.alpha2),
            "dipole" => show(&self.dipole, "none"),
            "laser" => show(&self.laser, "none"),
            "format" => self.format.map_or_else(|| "auto".into(), |f| f.to_string()),
            "out" => show_path(&self.out),
            "resonances" => show_path(&self.resonances),
            "gnuplot" => show_path(&self.gnuplot),
            "trace" => show_path(&self.trace),
            "cache_dir" => show_path(&self.cache_dir),
            "seedless" => self.seedless.to_string(),
            "workers" => show(&self.workers, "auto"),
            _ => return None,
        })
    }

    /// SHA-256 over the command name, the crate version and the given keys.
    pub fn hash(&self, command: &str, keys: &[&str]) -> String {
        let mut text = format!("pvolume {}\ncommand={command}\n", env!("CARGO_PKG_VERSION"));
        let mut sorted: Vec<&str> = keys.to_vec();
        sorted.sort_unstable();
        for k in sorted {
            let v = self.get(k).expect("known key");
            text.push_str(&format!("{k}={v}\n"));
        }
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses a flat key=value file. Blank lines and lines starting with '#' are skipped.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| ConfigError::Syntax { path: origin.into(), line: i + 1 })?;
        if k.trim().is_empty() {
            return Err(ConfigError::Syntax { path: origin.into(), line: i + 1 });
        }
        pairs.push((canonical_key(k), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Reads a config file over the defaults.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    resolve(Some(path), &[])
}

/// Defaults, then the file, then flags. A flag that changes a file value is logged.
pub fn resolve(file: Option<&Path>, flags: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut from_file = Vec::new();
    if let Some(p) = file {
        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.into(), source })?;
        from_file = parse_config_text(&text, p)?;
        for (k, v) in &from_file {
            cfg.set(k, v)?;
        }
    }
    for (raw, v) in flags {
        let k = canonical_key(raw);
        let before = cfg.get(&k);
        cfg.set(&k, v)?;
        if from_file.iter().any(|(fk, _)| *fk == k) && before != cfg.get(&k) {
            log::info!(
                "{k}: flag value {} overrides config file value {}",
                cfg.get(&k).unwrap_or_default(),
                before.unwrap_or_default()
            );
        }
    }
    Ok(cfg)
}
