//! Run configuration: CLI flags, optional flat key=value config file, and
//! the QRCLAB_SEED environment variable, resolved in that priority order
//! with documented defaults last.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qrclab::experiments::{PhasePoint, ScramblerMode};
use qrclab::measurement::ShotConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Concentration,
    EchoState,
    Discriminate,
    Lemma1,
    VarianceScaling,
    Alpha,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Concentration => "concentration",
            Experiment::EchoState => "echo-state",
            Experiment::Discriminate => "discriminate",
            Experiment::Lemma1 => "lemma1",
            Experiment::VarianceScaling => "variance-scaling",
            Experiment::Alpha => "alpha",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "concentration" => Some(Experiment::Concentration),
            "echo-state" => Some(Experiment::EchoState),
            "discriminate" => Some(Experiment::Discriminate),
            "lemma1" => Some(Experiment::Lemma1),
            "variance-scaling" => Some(Experiment::VarianceScaling),
            "alpha" => Some(Experiment::Alpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Fully resolved run configuration; everything an experiment needs to be
/// reproduced byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub ns: Vec<usize>,
    pub realizations: usize,
    pub washout: usize,
    pub measure_steps: usize,
    pub w: f64,
    pub h: f64,
    pub dt: f64,
    pub j_s: f64,
    /// "exact" or a shot count.
    pub shots: String,
    pub seed: u64,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub phase_preset: Option<String>,
    /// Echo-state convergence threshold.
    pub threshold: f64,
    /// Discrimination series length; None = 3 n^2 per n.
    pub series_length: Option<usize>,
    /// "redraw" or "fixed" scrambler per realization (discriminate).
    pub scrambler_mode: String,
    /// Constant input bit for the alpha experiment.
    pub input_bit: u8,
}

impl RunConfig {
    pub fn shot_config(&self) -> Result<ShotConfig> {
        parse_shots(&self.shots).map_err(|e| anyhow!("shots: {e}"))
    }

    pub fn scrambler_mode_enum(&self) -> Result<ScramblerMode> {
        match self.scrambler_mode.as_str() {
            "redraw" => Ok(ScramblerMode::RedrawEachStep),
            "fixed" => Ok(ScramblerMode::FixedPerRealization),
            other => bail!("scrambler_mode must be 'redraw' or 'fixed', got '{other}'"),
        }
    }

    /// Single hyperparameter point used by concentration; presets win over
    /// explicit w/h.
    pub fn phase(&self) -> Result<PhasePoint> {
        match &self.phase_preset {
            Some(name) => {
                PhasePoint::by_name(name).ok_or_else(|| anyhow!("unknown phase preset '{name}'"))
            }
            None => Ok(PhasePoint::new("custom", self.w, self.h)),
        }
    }

    /// Phase list for echo-state: a preset or explicit (w, h) selects one
    /// point, otherwise both the thermal-main and localized phases run.
    pub fn echo_phases(&self, w_or_h_explicit: bool) -> Result<Vec<PhasePoint>> {
        if self.phase_preset.is_some() || w_or_h_explicit {
            Ok(vec![self.phase()?])
        } else {
            Ok(vec![PhasePoint::thermal_main(), PhasePoint::localized()])
        }
    }
}

const DEFAULT_NS: &[usize] = &[3, 4, 5, 6, 7];
const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(
    name = "qrclab",
    version,
    about = "Spin-reservoir concentration experiments",
    after_help = "Defaults: ns=3,4,5,6,7  realizations=100 (10000 for lemma1/variance-scaling)\n\
                  washout=200  measure-steps=200  w=1e-2  h=10  dt=10  j-s=1  shots=exact\n\
                  format=csv  output=<experiment>.<format>  threshold=1e-10\n\
                  series-length=auto (3n^2)  scrambler-mode=redraw  input-bit=1\n\
                  Seed precedence: --seed, then config file, then QRCLAB_SEED, then 7.\n\
                  Flags override --config file values; the file overrides the environment."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Temporal variances of single-qubit observables vs register size
    Concentration(CommonArgs),
    /// Trace-distance convergence of two initial conditions
    EchoState(CommonArgs),
    /// Constant |0>/|1> series through symmetric vs Haar scramblers
    Discriminate(CommonArgs),
    /// Monte Carlo convergence of the block-Haar ensemble mean
    Lemma1(CommonArgs),
    /// Variance of observable expectations over scrambler draws
    VarianceScaling(CommonArgs),
    /// Sector-population recurrence trajectory
    Alpha(CommonArgs),
}

impl Command {
    pub fn experiment(&self) -> Experiment {
        match self {
            Command::Concentration(_) => Experiment::Concentration,
            Command::EchoState(_) => Experiment::EchoState,
            Command::Discriminate(_) => Experiment::Discriminate,
            Command::Lemma1(_) => Experiment::Lemma1,
            Command::VarianceScaling(_) => Experiment::VarianceScaling,
            Command::Alpha(_) => Experiment::Alpha,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Concentration(a)
            | Command::EchoState(a)
            | Command::Discriminate(a)
            | Command::Lemma1(a)
            | Command::VarianceScaling(a)
            | Command::Alpha(a) => a,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Register sizes, comma separated (e.g. 3,4,5)
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Ensemble size (sample count for lemma1/variance-scaling)
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Inputs discarded before measuring
    #[arg(long)]
    pub washout: Option<usize>,
    /// Measured inputs (echo-state: total inputs; discriminate: unused;
    /// alpha: recurrence steps)
    #[arg(long)]
    pub measure_steps: Option<usize>,
    /// Disorder width W in J_s units
    #[arg(long)]
    pub w: Option<f64>,
    /// Uniform field h in J_s units
    #[arg(long)]
    pub h: Option<f64>,
    /// Input interval dt in 1/J_s units
    #[arg(long)]
    pub dt: Option<f64>,
    /// Coupling scale J_s
    #[arg(long)]
    pub j_s: Option<f64>,
    /// "exact" or a shot count per observable per step
    #[arg(long)]
    pub shots: Option<String>,
    /// Base RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results file path
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// thermal-main, thermal-sm or localized; overrides --w/--h
    #[arg(long)]
    pub phase_preset: Option<String>,
    /// Echo-state entry convergence threshold
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Discrimination series length (default 3n^2)
    #[arg(long)]
    pub series_length: Option<usize>,
    /// "redraw" (2-design process) or "fixed" (one draw per realization)
    #[arg(long)]
    pub scrambler_mode: Option<String>,
    /// Constant input bit for alpha (0 or 1)
    #[arg(long)]
    pub input_bit: Option<u8>,
    /// Flat key=value config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parsed key=value config file contents.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "ns",
    "realizations",
    "washout",
    "measure_steps",
    "w",
    "h",
    "dt",
    "j_s",
    "shots",
    "seed",
    "output",
    "format",
    "phase_preset",
    "threshold",
    "series_length",
    "scrambler_mode",
    "input_bit",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "config line {}: expected key=value, got '{line}'",
                    lineno + 1
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("config line {}: unknown key '{key}'", lineno + 1);
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                bail!("config line {}: duplicate key '{key}'", lineno + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_key<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key '{key}': malformed value '{raw}' ({e})")),
        }
    }

    fn parse_ns(&self) -> Result<Option<Vec<usize>>> {
        match self.get("ns") {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|e| anyhow!("config key 'ns': malformed value '{tok}' ({e})"))
                })
                .collect::<Result<Vec<usize>>>()
                .map(Some),
        }
    }
}

fn parse_shots(raw: &str) -> Result<ShotConfig> {
    if raw == "exact" {
        return Ok(ShotConfig::Exact);
    }
    let n: u64 = raw
        .parse()
        .map_err(|_| anyhow!("expected 'exact' or a positive integer, got '{raw}'"))?;
    ShotConfig::finite(n).map_err(|e| anyhow!("{e}"))
}

fn parse_format(raw: &str) -> Result<OutputFormat> {
    match raw {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => bail!("format must be 'csv' or 'json', got '{other}'"),
    }
}

/// Resolve the final configuration. `env_seed` injects the QRCLAB_SEED
/// lookup so tests can exercise the precedence without mutating the process
/// environment. Also returns whether w or h were set explicitly (used by
/// echo-state phase selection).
pub fn resolve(
    experiment: Experiment,
    args: &CommonArgs,
    file: &ConfigFile,
    env_seed: Option<String>,
) -> Result<(RunConfig, bool)> {
    if let Some(file_exp) = file.get("experiment") {
        let parsed = Experiment::from_name(file_exp)
            .ok_or_else(|| anyhow!("config key 'experiment': unknown experiment '{file_exp}'"))?;
        if parsed != experiment {
            bail!(
                "conflicting experiment selection: command line says '{}', config file says '{file_exp}'",
                experiment.name()
            );
        }
    }

    let ns = match (&args.ns, file.parse_ns()?) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => v,
        (None, None) => DEFAULT_NS.to_vec(),
    };
    if ns.is_empty() {
        bail!("ns: need at least one register size");
    }
    if let Some(bad) = ns.iter().find(|&&n| n == 0 || n > 14) {
        bail!("ns: register size {bad} out of range (1..=14)");
    }

    let default_realizations = match experiment {
        Experiment::Lemma1 | Experiment::VarianceScaling => 10_000,
        _ => 100,
    };
    let realizations = args
        .realizations
        .or(file.parse_key("realizations")?)
        .unwrap_or(default_realizations);
    if realizations == 0 {
        bail!("realizations: must be >= 1");
    }

    let washout = args.washout.or(file.parse_key("washout")?).unwrap_or(200);
    let measure_steps = args
        .measure_steps
        .or(file.parse_key("measure_steps")?)
        .unwrap_or(200);
    if measure_steps == 0 {
        bail!("measure_steps: must be >= 1");
    }

    let w_explicit = args.w.is_some() || file.get("w").is_some();
    let h_explicit = args.h.is_some() || file.get("h").is_some();
    let w = args.w.or(file.parse_key("w")?).unwrap_or(1e-2);
    let h = args.h.or(file.parse_key("h")?).unwrap_or(1e1);
    let dt = args.dt.or(file.parse_key("dt")?).unwrap_or(10.0);
    let j_s = args.j_s.or(file.parse_key("j_s")?).unwrap_or(1.0);
    let bad = |v: f64| v.is_nan();
    if bad(w) || bad(dt) || bad(j_s) || w < 0.0 || dt <= 0.0 || j_s <= 0.0 {
        bail!("w must be >= 0 and dt, j_s must be > 0");
    }

    let shots = args
        .shots
        .clone()
        .or(file.get("shots").map(|s| s.to_string()))
        .unwrap_or_else(|| "exact".to_string());
    parse_shots(&shots).map_err(|e| anyhow!("shots: {e}"))?;

    let seed = match (args.seed, file.parse_key::<u64>("seed")?) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => match env_seed {
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| anyhow!("QRCLAB_SEED: malformed value '{raw}'"))?,
            None => DEFAULT_SEED,
        },
    };

    let format = match (&args.format, file.get("format")) {
        (Some(raw), _) => parse_format(raw)?,
        (None, Some(raw)) => parse_format(raw)?,
        (None, None) => OutputFormat::Csv,
    };

    let output_path = args
        .output
        .clone()
        .or(file.get("output").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", experiment.name(), format.extension())));

    let phase_preset = args
        .phase_preset
        .clone()
        .or(file.get("phase_preset").map(|s| s.to_string()));
    if let Some(name) = &phase_preset {
        if PhasePoint::by_name(name).is_none() {
            bail!("phase_preset: unknown preset '{name}' (thermal-main, thermal-sm, localized)");
        }
    }

    let threshold = args
        .threshold
        .or(file.parse_key("threshold")?)
        .unwrap_or(1e-10);
    if threshold.is_nan() || threshold <= 0.0 {
        bail!("threshold: must be > 0");
    }

    let series_length = match (args.series_length, file.parse_key("series_length")?) {
        (Some(v), _) | (None, Some(v)) => {
            if v == 0 {
                bail!("series_length: must be >= 1");
            }
            Some(v)
        }
        (None, None) => None,
    };

    let scrambler_mode = args
        .scrambler_mode
        .clone()
        .or(file.get("scrambler_mode").map(|s| s.to_string()))
        .unwrap_or_else(|| "redraw".to_string());
    if !["redraw", "fixed"].contains(&scrambler_mode.as_str()) {
        bail!("scrambler_mode: must be 'redraw' or 'fixed', got '{scrambler_mode}'");
    }

    let input_bit = args.input_bit.or(file.parse_key("input_bit")?).unwrap_or(1);
    if input_bit > 1 {
        bail!("input_bit: must be 0 or 1");
    }

    if experiment == Experiment::Alpha && ns.len() != 1 {
        bail!("alpha: exactly one register size required (the column layout depends on n)");
    }
    if experiment == Experiment::Lemma1 {
        if let Some(bad) = ns.iter().find(|&&n| n > 6) {
            bail!("lemma1: n={bad} too large (n <= 6)");
        }
    }
    if experiment == Experiment::VarianceScaling {
        if let Some(bad) = ns.iter().find(|&&n| n > 8) {
            bail!("variance-scaling: n={bad} too large (n <= 8)");
        }
    }

    let config = RunConfig {
        experiment,
        ns,
        realizations,
        washout,
        measure_steps,
        w,
        h,
        dt,
        j_s,
        shots,
        seed,
        output_path,
        format,
        phase_preset,
        threshold,
        series_length,
        scrambler_mode,
        input_bit,
    };
    Ok((config, w_explicit || h_explicit))
}

/// Parse argv and the optional config file into a resolved configuration.
pub fn parse_cli(cli: &Cli, env_seed: Option<String>) -> Result<(RunConfig, bool)> {
    let args = cli.command.args();
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    resolve(cli.command.experiment(), args, &file, env_seed)
}
