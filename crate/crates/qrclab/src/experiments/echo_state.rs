//! Echo-state verification: trace-distance convergence of two random initial
//! conditions driven by the same reservoir and input series, plus the count
//! of matrix entries that converged below a threshold.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qla::{self, DensityMatrix, RngStream};
use crate::reservoir::{
    build_ising, random_initial_state, reservoir_step, InputSeries, IsingParams, ReservoirConfig,
};

use super::{streams, PhasePoint};

#[derive(Debug, Clone)]
pub struct EchoStateConfig {
    pub ns: Vec<usize>,
    pub realizations: usize,
    /// Number of inputs injected into each pair of initial conditions.
    pub inputs_count: usize,
    pub phases: Vec<PhasePoint>,
    /// Absolute threshold below which a real or imaginary entry of
    /// rho_A - rho_B counts as converged.
    pub threshold: f64,
    pub j_s: f64,
    pub dt: f64,
    pub seed: u64,
}

impl EchoStateConfig {
    pub fn default_with(
        ns: Vec<usize>,
        realizations: usize,
        inputs_count: usize,
        seed: u64,
    ) -> Self {
        Self {
            ns,
            realizations,
            inputs_count,
            phases: vec![PhasePoint::thermal_main(), PhasePoint::localized()],
            threshold: 1e-10,
            j_s: 1.0,
            dt: 10.0,
            seed,
        }
    }
}

/// Mean trace distance between the two branches after each input.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoCurveRow {
    pub n: usize,
    pub phase: String,
    pub w: f64,
    pub h: f64,
    pub step: usize,
    pub mean_trace_distance: f64,
}

/// Mean count N_c of converged real/imaginary entries of rho_A - rho_B
/// after the full input series (out of 2 * 4^n).
#[derive(Debug, Clone, PartialEq)]
pub struct EchoConvergedRow {
    pub n: usize,
    pub phase: String,
    pub w: f64,
    pub h: f64,
    pub mean_converged_entries: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone)]
pub struct EchoStateResult {
    pub curves: Vec<EchoCurveRow>,
    pub converged: Vec<EchoConvergedRow>,
}

/// Drive two states through the same reservoir and inputs, recording the
/// trace distance after every step.
pub fn trace_distance_curve(
    config: &ReservoirConfig,
    inputs: &InputSeries,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
) -> Result<(Vec<f64>, DensityMatrix, DensityMatrix)> {
    if inputs.is_empty() {
        return Err(Error::invalid("input series is empty"));
    }
    let mut a = rho_a.clone();
    let mut b = rho_b.clone();
    let mut curve = Vec::with_capacity(inputs.len());
    for k in 0..inputs.len() {
        let rho_i = inputs.state_at(k)?;
        a = reservoir_step(config, &a, &rho_i)?;
        b = reservoir_step(config, &b, &rho_i)?;
        curve.push(qla::trace_distance(&a, &b)?);
    }
    Ok((curve, a, b))
}

/// Count real and imaginary parts of rho_A - rho_B entries below `threshold`
/// in absolute value.
pub fn converged_entries(rho_a: &DensityMatrix, rho_b: &DensityMatrix, threshold: f64) -> usize {
    rho_a
        .matrix()
        .iter()
        .zip(rho_b.matrix().iter())
        .map(|(x, y)| {
            let d = x - y;
            usize::from(d.re.abs() < threshold) + usize::from(d.im.abs() < threshold)
        })
        .sum()
}

pub fn run_echo_state(cfg: &EchoStateConfig) -> Result<EchoStateResult> {
    if cfg.threshold.is_nan() || cfg.threshold <= 0.0 {
        return Err(Error::invalid("threshold must be positive"));
    }
    if cfg.inputs_count == 0 || cfg.realizations == 0 {
        return Err(Error::invalid(
            "need inputs_count >= 1 and realizations >= 1",
        ));
    }
    let mut curves = Vec::new();
    let mut converged = Vec::new();
    for (phase_idx, phase) in cfg.phases.iter().enumerate() {
        for &n in &cfg.ns {
            let params = IsingParams {
                n_qubits: n,
                j_s: cfg.j_s,
                h: phase.h,
                w: phase.w,
                dt: cfg.dt,
            };
            let per_real: Vec<(Vec<f64>, usize)> = (0..cfg.realizations)
                .into_par_iter()
                .map(|r| -> Result<(Vec<f64>, usize)> {
                    let task = (phase_idx as u64) << 40 | r as u64;
                    let mut rng = RngStream::new(cfg.seed, streams::sid(streams::ECHO, n, task));
                    let (_, unitary) = build_ising(&params, &mut rng)?;
                    let config = ReservoirConfig::single_input(n, unitary)?;
                    let rho_a = random_initial_state(n, &mut rng)?;
                    let rho_b = random_initial_state(n, &mut rng)?;
                    let inputs = InputSeries::random_scalars(cfg.inputs_count, &mut rng);
                    let (curve, fa, fb) = trace_distance_curve(&config, &inputs, &rho_a, &rho_b)?;
                    let nc = converged_entries(&fa, &fb, cfg.threshold);
                    Ok((curve, nc))
                })
                .collect::<Result<_>>()?;

            for step in 0..cfg.inputs_count {
                let mean =
                    per_real.iter().map(|(c, _)| c[step]).sum::<f64>() / cfg.realizations as f64;
                curves.push(EchoCurveRow {
                    n,
                    phase: phase.label.clone(),
                    w: phase.w,
                    h: phase.h,
                    step: step + 1,
                    mean_trace_distance: mean,
                });
            }
            let mean_nc =
                per_real.iter().map(|(_, nc)| *nc as f64).sum::<f64>() / cfg.realizations as f64;
            converged.push(EchoConvergedRow {
                n,
                phase: phase.label.clone(),
                w: phase.w,
                h: phase.h,
                mean_converged_entries: mean_nc,
                realizations: cfg.realizations,
            });
        }
    }
    Ok(EchoStateResult { curves, converged })
}
