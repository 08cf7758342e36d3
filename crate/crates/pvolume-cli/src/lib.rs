//! Command-line front end: argument parsing, configuration, caching and output routing.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;
pub mod repro;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::cache::{cache_dir, Cache};
use crate::config::{resolve, ConfigError};
use crate::output::Outputs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] pvolume::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Compute(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Compute(_) | CliError::Io { .. } => EXIT_DOMAIN,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pvolume", version, about = "Generalized p-wave scattering volume in a non-resonant light field")]
struct Cli {
    /// Flat key=value configuration file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the primary output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Result cache directory (default: $PVOLUME_CACHE_DIR or .pvolume-cache)
    #[arg(long, global = true, value_name = "PATH")]
    cache_dir: Option<PathBuf>,
    /// Bypass the result cache
    #[arg(long, global = true)]
    seedless: bool,
    /// Worker threads for parallel solves
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Physics {
    #[arg(long, allow_negative_numbers = true)]
    m: Option<i32>,
    #[arg(long)]
    intensity: Option<f64>,
}

#[derive(Args, Debug)]
struct Integration {
    #[arg(long = "gammaE", allow_negative_numbers = true)]
    gamma_e: Option<f64>,
    #[arg(long = "gammaL", allow_negative_numbers = true)]
    gamma_l: Option<f64>,
    #[arg(long = "gammaI", allow_negative_numbers = true)]
    gamma_i: Option<f64>,
    /// outward or inward
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Table3,
    Fig1,
    Fig2,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced units σ, ε, β and the reduced intensity
    Units {
        /// Reduced mass in Da
        #[arg(long)]
        mu: Option<f64>,
        /// C6 in Eh a0^6
        #[arg(long)]
        c6: Option<f64>,
        /// Polarizability volume of atom 1 in a0^3
        #[arg(long)]
        alpha1: Option<f64>,
        /// Polarizability volume of atom 2 in a0^3
        #[arg(long)]
        alpha2: Option<f64>,
        /// Dipole strength in J m^3
        #[arg(long)]
        dipole: Option<f64>,
        /// Laser intensity in W/m^2
        #[arg(long)]
        laser: Option<f64>,
        /// Reduced intensity (used when no laser intensity is given)
        #[arg(long)]
        intensity: Option<f64>,
    },
    /// Multipole coefficients c2..c6 of an effective p-wave potential
    Coeffs {
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        physics: Physics,
        /// Extract the coefficients numerically from the two-channel eigenvalue
        #[arg(long)]
        oracle: bool,
    },
    /// Analytic large-x expansions of M, A and u
    Lk {
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        c3f: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        m0: Option<f64>,
    },
    /// Coupled-channel threshold solution at one x_max
    Solve {
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        x00: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        xmax: Option<f64>,
        #[command(flatten)]
        integration: Integration,
    },
    /// Fit of M(x_max) to the asymptotic basis
    Fit {
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        x00: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        xmax_lo: Option<f64>,
        #[arg(long)]
        xmax_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Also write the trace CSV here
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        integration: Integration,
    },
    /// M0 across x00 with located and labeled resonances
    Scan {
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        x00_lo: Option<f64>,
        #[arg(long)]
        x00_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Label resonances by tracking n = 1..n (true or false)
        #[arg(long)]
        label: Option<bool>,
        #[arg(long)]
        refine_tol: Option<f64>,
        #[arg(long)]
        tracking_tol: Option<f64>,
        /// Also write the resonance list JSON here
        #[arg(long, value_name = "PATH")]
        resonances: Option<PathBuf>,
        /// Also write gnuplot data here
        #[arg(long, value_name = "PATH")]
        gnuplot: Option<PathBuf>,
        #[command(flatten)]
        integration: Integration,
    },
    /// Regenerate the fit table (table3) or the figure data (fig1, fig2)
    Repro {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        physics: Physics,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        x00_lo: Option<f64>,
        #[arg(long)]
        x00_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_name = "PATH")]
        resonances: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        gnuplot: Option<PathBuf>,
        #[command(flatten)]
        integration: Integration,
    },
}

/// Values given on the command line, as (key, raw text).
fn explicit_flags(m: &ArgMatches, into: &mut Vec<(String, String)>) {
    for id in m.ids() {
        let id = id.as_str();
        // ids also name argument groups; only real keys carry values
        if !config::KEYS.iter().any(|(k, _, _)| *k == id) || m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        let Ok(Some(mut raw)) = m.try_get_raw(id) else { continue };
        let Some(v) = raw.next() else { continue };
        into.retain(|(k, _)| k != id);
        into.push((id.to_string(), v.to_string_lossy().into_owned()));
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Runs one invocation, writing the primary output to `stdout` unless `--out` is set.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    eprint!("{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&matches, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(matches: &ArgMatches, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (sub, sub_m) = matches.subcommand().ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let command = if sub == "repro" {
        let t = sub_m.get_one::<Target>("target").expect("required positional");
        format!("repro {}", t.to_possible_value().expect("named variant").get_name())
    } else {
        sub.to_string()
    };
    let mut flags = Vec::new();
    explicit_flags(matches, &mut flags);
    explicit_flags(sub_m, &mut flags);
    let file = matches.get_one::<PathBuf>("config").or_else(|| sub_m.get_one::<PathBuf>("config"));
    let mut cfg = resolve(file.map(PathBuf::as_path), &flags)?;
    cfg.format = Some(cfg.format.unwrap_or_else(|| commands::default_format(&command)));
    log::debug!("resolved configuration: {cfg:?}");

    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(ConfigError::BadValue { key: "workers".into(), value: "0".into(), reason: "must be positive".into() }.into());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            log::warn!("worker pool already initialized: {e}");
        }
    }

    let hash = cfg.hash(&command, &commands::result_keys(&command));
    let cache = (commands::cacheable(&command) && !cfg.seedless).then(|| Cache::new(cache_dir(cfg.cache_dir.as_deref())));
    let outputs: Outputs = match cache.as_ref().and_then(|c| c.get(&hash)) {
        Some(o) => {
            log::info!("{command}: served from cache ({hash})");
            o
        }
        None => {
            let o = commands::execute(&command, &cfg, &hash)?;
            if let Some(c) = &cache {
                if let Err(e) = c.put(&hash, &o) {
                    log::warn!("cache write failed: {e}");
                }
            }
            o
        }
    };

    match &cfg.out {
        Some(p) => write_file(p, &outputs.primary)?,
        None => stdout
            .write_all(outputs.primary.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    for (name, target) in [("resonances", &cfg.resonances), ("gnuplot", &cfg.gnuplot), ("trace", &cfg.trace)] {
        if let Some(p) = target {
            match outputs.artifacts.get(name) {
                Some(text) => write_file(p, text)?,
                None => log::warn!("{command} produces no {name} output; --{name} ignored"),
            }
        }
    }
    Ok(())
}
