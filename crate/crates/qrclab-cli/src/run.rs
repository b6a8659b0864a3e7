//! Experiment dispatch: resolved config in, results + metadata files out.

use std::time::Instant;

use anyhow::{Context, Result};

use qrclab::experiments::{
    self, alpha, ConcentrationConfig, DiscriminationConfig, EchoStateConfig, Scrambler,
    VarianceScalingConfig,
};
use qrclab::symmetry::AlphaVector;

use crate::config::{Experiment, RunConfig};
use crate::output::{self, ResultRow};

/// Execute the configured experiment and write the results file plus the
/// metadata sidecar. The results bytes depend only on (config, seed).
pub fn run(config: &RunConfig, w_or_h_explicit: bool) -> Result<()> {
    // one BLAS thread per rayon worker; parallelism lives at the ensemble level
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let started = Instant::now();
    match config.experiment {
        Experiment::Alpha => {
            let states = run_alpha(config)?;
            output::write_alpha_results(config, &states)?;
        }
        _ => {
            let rows = collect_rows(config, w_or_h_explicit)?;
            output::write_results(config, &rows)?;
        }
    }
    output::write_metadata(config, started.elapsed().as_secs_f64())
        .context("writing metadata sidecar")?;
    Ok(())
}

fn run_alpha(config: &RunConfig) -> Result<Vec<Vec<f64>>> {
    let n = config.ns[0];
    let bit = if config.input_bit == 0 {
        alpha::InputBit::Zero
    } else {
        alpha::InputBit::One
    };
    let start = AlphaVector::uniform(n + 1)?;
    let traj = alpha::trajectory(&start, bit, config.measure_steps)?;
    Ok(traj
        .states
        .iter()
        .map(|state| state.values().to_vec())
        .collect())
}

fn collect_rows(config: &RunConfig, w_or_h_explicit: bool) -> Result<Vec<ResultRow>> {
    match config.experiment {
        Experiment::Concentration => {
            let phase = config.phase()?;
            let cfg = ConcentrationConfig {
                ns: config.ns.clone(),
                realizations: config.realizations,
                washout: config.washout,
                measure_steps: config.measure_steps,
                j_s: config.j_s,
                h: phase.h,
                w: phase.w,
                dt: config.dt,
                shots: config.shot_config()?,
                seed: config.seed,
            };
            let rows = experiments::run_concentration(&cfg)?;
            Ok(rows
                .into_iter()
                .map(|r| ResultRow {
                    n: Some(r.n),
                    scrambler: Some("ising".into()),
                    phase: Some(phase.label.clone()),
                    observable: Some(r.observable),
                    count: Some(r.realizations),
                    ..ResultRow::new("concentration", r.mean_variance)
                })
                .collect())
        }
        Experiment::EchoState => {
            let cfg = EchoStateConfig {
                ns: config.ns.clone(),
                realizations: config.realizations,
                inputs_count: config.measure_steps,
                phases: config.echo_phases(w_or_h_explicit)?,
                threshold: config.threshold,
                j_s: config.j_s,
                dt: config.dt,
                seed: config.seed,
            };
            let result = experiments::run_echo_state(&cfg)?;
            let mut rows: Vec<ResultRow> = result
                .curves
                .into_iter()
                .map(|r| ResultRow {
                    n: Some(r.n),
                    scrambler: Some("ising".into()),
                    phase: Some(r.phase),
                    observable: Some("trace_distance".into()),
                    step: Some(r.step),
                    count: Some(config.realizations),
                    ..ResultRow::new("echo-state", r.mean_trace_distance)
                })
                .collect();
            rows.extend(result.converged.into_iter().map(|r| ResultRow {
                n: Some(r.n),
                scrambler: Some("ising".into()),
                phase: Some(r.phase),
                observable: Some("converged_entries".into()),
                count: Some(r.realizations),
                ..ResultRow::new("echo-state", r.mean_converged_entries)
            }));
            Ok(rows)
        }
        Experiment::Discriminate => {
            let cfg = DiscriminationConfig {
                ns: config.ns.clone(),
                realizations: config.realizations,
                series_length: config.series_length,
                mode: config.scrambler_mode_enum()?,
                scramblers: vec![Scrambler::Symmetric, Scrambler::Haar],
                seed: config.seed,
            };
            let rows = experiments::run_discrimination(&cfg)?;
            Ok(rows
                .into_iter()
                .map(|r| ResultRow {
                    n: Some(r.n),
                    realization: Some(r.realization),
                    scrambler: Some(r.scrambler.to_string()),
                    input: Some(r.input_class.to_string()),
                    observable: Some(format!("z{}", r.qubit)),
                    ..ResultRow::new("discriminate", r.expectation)
                })
                .collect())
        }
        Experiment::Lemma1 => {
            let checkpoints = decade_checkpoints(config.realizations);
            let mut rows = Vec::new();
            for &n in &config.ns {
                for r in experiments::verify_lemma1(n, &checkpoints, config.seed)? {
                    rows.push(ResultRow {
                        n: Some(r.n),
                        scrambler: Some("block-haar".into()),
                        observable: Some("trace_distance".into()),
                        count: Some(r.samples),
                        ..ResultRow::new("lemma1", r.trace_distance)
                    });
                }
            }
            Ok(rows)
        }
        Experiment::VarianceScaling => {
            let cfg = VarianceScalingConfig {
                ns: config.ns.clone(),
                samples: config.realizations,
                seed: config.seed,
            };
            let rows = experiments::verify_variance_scaling(&cfg)?;
            Ok(rows
                .into_iter()
                .map(|r| ResultRow {
                    n: Some(r.n),
                    scrambler: Some(r.scrambler.to_string()),
                    observable: Some(r.observable),
                    count: Some(r.samples),
                    ..ResultRow::new("variance-scaling", r.variance)
                })
                .collect())
        }
        Experiment::Alpha => unreachable!("alpha writes its own table"),
    }
}

/// 100, 1000, ... up to and including `samples`.
fn decade_checkpoints(samples: usize) -> Vec<usize> {
    let mut points = Vec::new();
    let mut c = 100usize;
    while c < samples {
        points.push(c);
        c *= 10;
    }
    points.push(samples);
    points
}
