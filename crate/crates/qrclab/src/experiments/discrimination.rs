//! Series discrimination: constant |0> or |1> injection into a symmetric
//! (block-Haar) versus a fully Haar-random scrambler, read out through
//! sigma^z on a randomly chosen non-input qubit.
//!
//! With the magnetization symmetry the reservoir is driven to the all-zeros
//! or all-ones state and the two classes separate to +/-1; without it the
//! readout concentrates near zero with a class gap shrinking exponentially
//! in n.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measurement::exact_expectation;
use crate::qla::{self, DensityMatrix, RngStream};
use crate::reservoir::{random_initial_state, reservoir_step, ReservoirConfig};
use crate::symmetry::{block_haar_unitary, SectorDecomposition};

use super::streams;
use super::InputBit;

/// Scrambler family for the reservoir unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scrambler {
    /// Block-Haar draw commuting with the total magnetization.
    Symmetric,
    /// Unconstrained Haar draw on the full register.
    Haar,
}

impl Scrambler {
    pub fn label(self) -> &'static str {
        match self {
            Scrambler::Symmetric => "symmetric",
            Scrambler::Haar => "haar",
        }
    }
}

/// Whether the scrambler is redrawn at every step (the 2-design process the
/// population recurrence describes; its O(n^2) convergence time is what the
/// default series length is tuned to) or drawn once per realization (a fixed
/// Hamiltonian evolution, which converges too but with a heavy-tailed rate:
/// a few draws have a near-zero promotion bottleneck and need far longer
/// series).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScramblerMode {
    RedrawEachStep,
    FixedPerRealization,
}

#[derive(Debug, Clone)]
pub struct DiscriminationConfig {
    pub ns: Vec<usize>,
    /// Realizations per (scrambler, input class).
    pub realizations: usize,
    /// Inputs injected before reading out; defaults to 3 n^2, past the
    /// worst-case population convergence time.
    pub series_length: Option<usize>,
    pub mode: ScramblerMode,
    /// Which scrambler families to run.
    pub scramblers: Vec<Scrambler>,
    pub seed: u64,
}

impl DiscriminationConfig {
    pub fn default_with(ns: Vec<usize>, realizations: usize, seed: u64) -> Self {
        Self {
            ns,
            realizations,
            series_length: None,
            mode: ScramblerMode::RedrawEachStep,
            scramblers: vec![Scrambler::Symmetric, Scrambler::Haar],
            seed,
        }
    }

    pub fn series_length_for(&self, n: usize) -> usize {
        self.series_length.unwrap_or(3 * n * n)
    }
}

/// Final readout of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationRow {
    pub n: usize,
    pub scrambler: &'static str,
    /// "zero" or "one".
    pub input_class: &'static str,
    pub realization: usize,
    /// The randomly chosen non-input qubit that was read out.
    pub qubit: usize,
    /// <sigma^z_qubit> after the full series.
    pub expectation: f64,
}

fn class_name(bit: InputBit) -> &'static str {
    match bit {
        InputBit::Zero => "zero",
        InputBit::One => "one",
    }
}

pub fn run_discrimination(cfg: &DiscriminationConfig) -> Result<Vec<DiscriminationRow>> {
    if cfg.realizations == 0 {
        return Err(Error::invalid("need at least one realization"));
    }
    if let Some(len) = cfg.series_length {
        if len == 0 {
            return Err(Error::invalid("series_length must be >= 1"));
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        if n < 2 {
            return Err(Error::invalid("discrimination needs n >= 2"));
        }
        let decomp = SectorDecomposition::magnetization(n)?;
        let series_length = cfg.series_length_for(n);
        let cases: Vec<(Scrambler, InputBit)> = cfg
            .scramblers
            .iter()
            .flat_map(|&s| [(s, InputBit::Zero), (s, InputBit::One)])
            .collect();
        for (scrambler, bit) in cases {
            // the stream id is keyed by the case itself, not its position in
            // the list, so subsetting the scramblers cannot shift any draws
            let case_idx = match (scrambler, bit) {
                (Scrambler::Symmetric, InputBit::Zero) => 0u64,
                (Scrambler::Symmetric, InputBit::One) => 1,
                (Scrambler::Haar, InputBit::Zero) => 2,
                (Scrambler::Haar, InputBit::One) => 3,
            };
            let mut case_rows: Vec<DiscriminationRow> = (0..cfg.realizations)
                .into_par_iter()
                .map(|r| -> Result<DiscriminationRow> {
                    let task = case_idx << 40 | r as u64;
                    let mut rng =
                        RngStream::new(cfg.seed, streams::sid(streams::DISCRIMINATION, n, task));
                    // draw order is fixed: readout qubit, initial state, unitaries
                    let qubit = rng.gen_range(1..n);
                    let mut rho = random_initial_state(n, &mut rng)?;
                    let rho_i = DensityMatrix::basis_state(1, bit.basis_index())?;
                    let draw = |rng: &mut RngStream| match scrambler {
                        Scrambler::Symmetric => block_haar_unitary(&decomp, rng),
                        Scrambler::Haar => qla::haar_unitary(1 << n, rng),
                    };
                    match cfg.mode {
                        ScramblerMode::FixedPerRealization => {
                            let config = ReservoirConfig::single_input(n, draw(&mut rng)?)?;
                            for _ in 0..series_length {
                                rho = reservoir_step(&config, &rho, &rho_i)?;
                            }
                        }
                        ScramblerMode::RedrawEachStep => {
                            for _ in 0..series_length {
                                let config = ReservoirConfig::single_input(n, draw(&mut rng)?)?;
                                rho = reservoir_step(&config, &rho, &rho_i)?;
                            }
                        }
                    }
                    let z = qla::embed_single_qubit(&qla::pauli_z(), qubit, n)?;
                    let expectation = exact_expectation(&rho, &z)?;
                    Ok(DiscriminationRow {
                        n,
                        scrambler: scrambler.label(),
                        input_class: class_name(bit),
                        realization: r,
                        qubit,
                        expectation,
                    })
                })
                .collect::<Result<_>>()?;
            rows.append(&mut case_rows);
        }
    }
    Ok(rows)
}
