//! Sector-population recurrence for constant basis-state injection under a
//! magnetization-symmetric scrambler, and its Monte Carlo verification.
//!
//! For a constant series of |1> inputs the mean populations evolve as
//!
//! ```text
//! alpha'_n = alpha_n + (1/n) alpha_{n-1}
//! alpha'_l = (l/n) alpha_l + (1 - (l-1)/n) alpha_{l-1}    (0 < l < n)
//! alpha'_0 = 0
//! ```
//!
//! which is a stochastic matrix moving mass up the Hamming-weight ladder:
//! each sector keeps fraction l/n and promotes the rest. The |0> series is
//! the mirror image l <-> n-l, implemented through that duality. The step is
//! computed as an exact mass transfer (`kept + promoted == alpha_l` in
//! floating point), so the simplex sum is conserved to machine precision and
//! the fixed point (0, ..., 0, 1) is exactly invariant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qla::{DensityMatrix, RngStream};
use crate::reservoir::{self, ReservoirConfig};
use crate::symmetry::{block_haar_unitary, sector_populations, AlphaVector, SectorDecomposition};

use super::streams;

/// Which basis state the constant input series injects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputBit {
    Zero,
    One,
}

impl InputBit {
    pub fn basis_index(self) -> usize {
        match self {
            InputBit::Zero => 0,
            InputBit::One => 1,
        }
    }
}

fn step_toward_top(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let nf = n as f64;
    let mut out = vec![0.0; n + 1];
    for (l, &a) in values.iter().enumerate() {
        let kept = a * (l as f64 / nf);
        let promoted = a - kept;
        out[l] += kept;
        if l < n {
            out[l + 1] += promoted;
        } else {
            out[n] += promoted; // l = n keeps everything; promoted == 0
        }
    }
    out
}

/// One recurrence step for the given input bit.
pub fn recurrence_step(alphas: &AlphaVector, bit: InputBit) -> Result<AlphaVector> {
    let n = alphas.len() - 1;
    if n < 1 {
        return Err(Error::invalid("recurrence needs n >= 1"));
    }
    let values = match bit {
        InputBit::One => step_toward_top(alphas.values()),
        InputBit::Zero => {
            // mirror l <-> n-l
            let mut rev: Vec<f64> = alphas.values().to_vec();
            rev.reverse();
            let mut stepped = step_toward_top(&rev);
            stepped.reverse();
            stepped
        }
    };
    AlphaVector::new(values)
}

/// Population trajectory under the recurrence; `states[0]` is the start.
#[derive(Debug, Clone)]
pub struct AlphaTrajectory {
    pub states: Vec<AlphaVector>,
}

impl AlphaTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Iterate the recurrence for `steps` inputs of the same bit.
pub fn trajectory(start: &AlphaVector, bit: InputBit, steps: usize) -> Result<AlphaTrajectory> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start.clone());
    for _ in 0..steps {
        let next = recurrence_step(states.last().expect("nonempty"), bit)?;
        states.push(next);
    }
    Ok(AlphaTrajectory { states })
}

/// Smallest k with 1 - alpha_n^k < epsilon, starting from uniform
/// populations under constant |1> injection.
pub fn convergence_time(n: usize, epsilon: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1)"));
    }
    let mut alphas = AlphaVector::uniform(n + 1)?;
    // deficit shrinks by a factor (n-1)/n per step once in the top sectors,
    // so this cap is never reached for sane epsilon
    let cap = 10_000_000usize;
    for k in 1..=cap {
        alphas = recurrence_step(&alphas, InputBit::One)?;
        if 1.0 - alphas.values()[n] < epsilon {
            return Ok(k);
        }
    }
    Err(Error::Internal(format!(
        "recurrence did not converge within {cap} steps"
    )))
}

/// Monte Carlo sector populations of the erase-and-write dynamics with a
/// fresh block-Haar scrambler each step, against the recurrence prediction.
#[derive(Debug, Clone)]
pub struct AlphaMcRow {
    pub step: usize,
    /// Ensemble mean populations.
    pub mc_mean: Vec<f64>,
    /// Standard error of each mean.
    pub mc_stderr: Vec<f64>,
    /// Recurrence prediction for the same step.
    pub recurrence: Vec<f64>,
}

/// Run `draws` independent trajectories of `steps` constant-bit injections
/// from a shared random initial state, resampling the block-Haar unitary at
/// every step, and record sector populations per step.
///
/// The recurrence describes the evolution of populations of direct-sum mean
/// states, so its prediction chain starts from the populations right after
/// the first injection (a deterministic quantity; the scramble itself never
/// moves populations). From there on, redrawing the unitary each step makes
/// the ensemble-mean populations obey the recurrence exactly, which is what
/// makes this a cross-oracle for both [`recurrence_step`] and
/// [`reservoir::reservoir_step`].
pub fn sector_population_montecarlo(
    n: usize,
    draws: usize,
    steps: usize,
    bit: InputBit,
    seed: u64,
) -> Result<Vec<AlphaMcRow>> {
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    if draws < 2 || steps == 0 {
        return Err(Error::invalid("need draws >= 2 and steps >= 1"));
    }
    let decomp = SectorDecomposition::magnetization(n)?;
    let rho_0 = reservoir::random_initial_state(
        n,
        &mut RngStream::new(seed, streams::sid(streams::ALPHA, n, 0)),
    )?;
    let rho_i = DensityMatrix::basis_state(1, bit.basis_index())?;

    let per_draw: Vec<Vec<Vec<f64>>> = (0..draws)
        .into_par_iter()
        .map(|d| -> Result<Vec<Vec<f64>>> {
            let mut rng = RngStream::new(seed, streams::sid(streams::ALPHA, n, 1 + d as u64));
            let mut rho = rho_0.clone();
            let mut pops = Vec::with_capacity(steps);
            for _ in 0..steps {
                let u = block_haar_unitary(&decomp, &mut rng)?;
                let config = ReservoirConfig::single_input(n, u)?;
                rho = reservoir::reservoir_step(&config, &rho, &rho_i)?;
                pops.push(sector_populations(&rho, &decomp)?.values().to_vec());
            }
            Ok(pops)
        })
        .collect::<Result<_>>()?;

    // populations after the first injection, before any randomness enters
    let first = {
        let kept = crate::qla::partial_trace(&rho_0, &[0])?;
        let injected = DensityMatrix::new(n, crate::qla::kron(rho_i.matrix(), kept.matrix())?)?;
        sector_populations(&injected, &decomp)?
    };
    let predicted = trajectory(&first, bit, steps - 1)?;

    let sectors = n + 1;
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut mean = vec![0.0; sectors];
        for draw in &per_draw {
            for (m, v) in mean.iter_mut().zip(&draw[k]) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= draws as f64;
        }
        let mut stderr = vec![0.0; sectors];
        for draw in &per_draw {
            for (s, (v, m)) in stderr.iter_mut().zip(draw[k].iter().zip(&mean)) {
                *s += (v - m).powi(2);
            }
        }
        for s in stderr.iter_mut() {
            *s = (*s / ((draws - 1) as f64 * draws as f64)).sqrt();
        }
        rows.push(AlphaMcRow {
            step: k + 1,
            mc_mean: mean,
            mc_stderr: stderr,
            recurrence: predicted.states[k].values().to_vec(),
        });
    }
    Ok(rows)
}
