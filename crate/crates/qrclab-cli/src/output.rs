//! Bit-stable CSV/JSON emission.
//!
//! All ensemble experiments share a long-format row with a fixed column set;
//! unused columns stay empty. The alpha experiment emits its own wide table
//! (step, alpha_0 .. alpha_n) since its width depends on the register size.
//! A sidecar `<output>.meta.json` records the resolved configuration, seed,
//! library version and wall time; the results file itself contains nothing
//! run-dependent beyond the data, so identical (config, seed) runs are
//! byte-identical.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};

/// One atomic result: exactly one numeric value with its coordinates.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub n: Option<usize>,
    pub realization: Option<usize>,
    pub scrambler: Option<String>,
    pub phase: Option<String>,
    pub input: Option<String>,
    pub observable: Option<String>,
    pub step: Option<usize>,
    pub count: Option<usize>,
    pub value: f64,
}

impl ResultRow {
    pub fn new(experiment: &'static str, value: f64) -> Self {
        Self {
            experiment,
            n: None,
            realization: None,
            scrambler: None,
            phase: None,
            input: None,
            observable: None,
            step: None,
            count: None,
            value,
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "n",
    "realization",
    "scrambler",
    "phase",
    "input",
    "observable",
    "step",
    "count",
    "value",
];

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_str(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_rows_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.experiment.to_string(),
            opt_usize(row.n),
            opt_usize(row.realization),
            opt_str(&row.scrambler),
            opt_str(&row.phase),
            opt_str(&row.input),
            opt_str(&row.observable),
            opt_usize(row.step),
            opt_usize(row.count),
            format_value(row.value),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_rows_json<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// The alpha trajectory table: header step,alpha_0..alpha_n.
pub fn write_alpha_csv<W: Write>(out: W, states: &[Vec<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let sectors = states.first().map(|s| s.len()).unwrap_or(0);
    let mut header = vec!["step".to_string()];
    header.extend((0..sectors).map(|l| format!("alpha_{l}")));
    writer.write_record(&header)?;
    for (step, state) in states.iter().enumerate() {
        let mut record = vec![step.to_string()];
        record.extend(state.iter().map(|v| format_value(*v)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_alpha_json<W: Write>(mut out: W, states: &[Vec<f64>]) -> Result<()> {
    let rows: Vec<serde_json::Value> = states
        .iter()
        .enumerate()
        .map(|(step, state)| {
            let mut map = serde_json::Map::new();
            map.insert("step".into(), serde_json::json!(step));
            for (l, v) in state.iter().enumerate() {
                map.insert(format!("alpha_{l}"), serde_json::json!(v));
            }
            serde_json::Value::Object(map)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    config: &'a RunConfig,
    seed: u64,
    version: &'static str,
    wall_time_seconds: f64,
}

/// Write `<output>.meta.json` next to the results file.
pub fn write_metadata(config: &RunConfig, wall_time_seconds: f64) -> Result<()> {
    let meta = Metadata {
        config,
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds,
    };
    let path = sidecar_path(&config.output_path);
    let file = std::fs::File::create(&path)
        .with_context(|| format!("creating metadata sidecar {}", path.display()))?;
    serde_json::to_writer_pretty(&file, &meta)?;
    Ok(())
}

pub fn sidecar_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    output.with_file_name(name)
}

/// Write the results file in the configured format.
pub fn write_results(config: &RunConfig, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(&config.output_path)
        .with_context(|| format!("creating results file {}", config.output_path.display()))?;
    match config.format {
        OutputFormat::Csv => write_rows_csv(file, rows),
        OutputFormat::Json => write_rows_json(file, rows),
    }
}

pub fn write_alpha_results(config: &RunConfig, states: &[Vec<f64>]) -> Result<()> {
    let file = std::fs::File::create(&config.output_path)
        .with_context(|| format!("creating results file {}", config.output_path.display()))?;
    match config.format {
        OutputFormat::Csv => write_alpha_csv(file, states),
        OutputFormat::Json => write_alpha_json(file, states),
    }
}
