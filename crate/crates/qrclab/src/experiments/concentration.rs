//! Temporal variance of single-qubit observables under random inputs,
//! swept over register size: the concentration dichotomy experiment.
//!
//! Per realization the disordered Ising reservoir is driven by uniform
//! random scalars; after the washout, the temporal variance of each recorded
//! expectation series is computed and averaged across realizations. The
//! sigma^z series on any qubit stay input-responsive while sigma^x and
//! sigma^y collapse exponentially with n.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measurement::{ObservableSet, ShotConfig};
use crate::qla::RngStream;
use crate::reservoir::{
    build_ising, random_initial_state, run_trajectory, InputSeries, IsingParams, ReservoirConfig,
    TrajectoryOptions,
};

use super::{sample_variance, streams};

#[derive(Debug, Clone)]
pub struct ConcentrationConfig {
    pub ns: Vec<usize>,
    pub realizations: usize,
    pub washout: usize,
    pub measure_steps: usize,
    pub j_s: f64,
    pub h: f64,
    pub w: f64,
    pub dt: f64,
    pub shots: ShotConfig,
    pub seed: u64,
}

impl ConcentrationConfig {
    /// Thermal-main phase, scaled-down ensemble.
    pub fn default_with(ns: Vec<usize>, realizations: usize, seed: u64) -> Self {
        Self {
            ns,
            realizations,
            washout: 200,
            measure_steps: 200,
            j_s: 1.0,
            h: 1e1,
            w: 1e-2,
            dt: 10.0,
            shots: ShotConfig::Exact,
            seed,
        }
    }
}

/// Mean temporal variance of one observable's expectation series.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub n: usize,
    /// Observable label, e.g. "z1" = sigma^z on qubit 1.
    pub observable: String,
    pub mean_variance: f64,
    pub realizations: usize,
}

/// Record the input qubit (0) and one fixed non-input qubit (1), all three
/// Pauli axes each.
pub fn run_concentration(cfg: &ConcentrationConfig) -> Result<Vec<ConcentrationRow>> {
    if cfg.measure_steps < 2 {
        return Err(Error::invalid("need measure_steps >= 2"));
    }
    if cfg.realizations == 0 {
        return Err(Error::invalid("need at least one realization"));
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        if n < 2 {
            return Err(Error::invalid("concentration sweep needs n >= 2"));
        }
        let params = IsingParams {
            n_qubits: n,
            j_s: cfg.j_s,
            h: cfg.h,
            w: cfg.w,
            dt: cfg.dt,
        };
        let labels = ["x0", "y0", "z0", "x1", "y1", "z1"];
        let observables = ObservableSet::single_qubit_paulis(n)?.subset(&labels)?;
        let steps = cfg.washout + cfg.measure_steps;

        let variances: Vec<Vec<f64>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| -> Result<Vec<f64>> {
                let mut rng =
                    RngStream::new(cfg.seed, streams::sid(streams::CONCENTRATION, n, r as u64));
                let (_, unitary) = build_ising(&params, &mut rng)?;
                let config = ReservoirConfig::single_input(n, unitary)?;
                let rho_0 = random_initial_state(n, &mut rng)?;
                let inputs = InputSeries::random_scalars(steps, &mut rng);
                let opts = TrajectoryOptions {
                    washout: cfg.washout,
                    shots: cfg.shots,
                    record_states: false,
                };
                let traj = run_trajectory(
                    &config,
                    &inputs,
                    &rho_0,
                    &observables,
                    &opts,
                    Some(&mut rng),
                )?;
                Ok((0..observables.len())
                    .map(|col| {
                        let series: Vec<f64> = traj.expectations.column(col).to_vec();
                        sample_variance(&series)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;

        for (col, label) in labels.iter().enumerate() {
            let mean = variances.iter().map(|v| v[col]).sum::<f64>() / cfg.realizations as f64;
            rows.push(ConcentrationRow {
                n,
                observable: (*label).to_string(),
                mean_variance: mean,
                realizations: cfg.realizations,
            });
        }
    }
    Ok(rows)
}
