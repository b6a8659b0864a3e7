//! Monte Carlo checks of the Haar-ensemble structure: convergence of the
//! block-Haar ensemble mean to the direct-sum mean state, and the scaling of
//! the expectation-value variance over scrambler draws.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qla::{self, CMatrix, DensityMatrix, RngStream, C64};
use crate::reservoir::random_initial_state;
use crate::symmetry::{
    block_haar_unitary, lemma1_mean_state, sector_populations, SectorDecomposition,
};

use super::streams;

/// Trace distance between the running block-Haar ensemble mean and the
/// direct-sum prediction at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Row {
    pub n: usize,
    pub samples: usize,
    pub trace_distance: f64,
}

/// Monte Carlo average of U rho U^dag over block-Haar draws, compared with
/// the sector-weighted mean state of the same rho at each checkpoint.
pub fn verify_lemma1_for_state(
    rho: &DensityMatrix,
    checkpoints: &[usize],
    seed: u64,
) -> Result<Vec<Lemma1Row>> {
    let n = rho.n_qubits();
    if n > 6 {
        return Err(Error::invalid("lemma-1 verification is limited to n <= 6"));
    }
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(Error::invalid("checkpoints must be positive"));
    }
    let mut sorted: Vec<usize> = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let max = *sorted.last().expect("nonempty");

    let decomp = SectorDecomposition::magnetization(n)?;
    let target = lemma1_mean_state(&sector_populations(rho, &decomp)?, &decomp)?;

    let mut rng = RngStream::new(seed, streams::sid(streams::LEMMA1, n, 0));
    let d = rho.dim();
    let mut acc = ndarray::Array2::<C64>::zeros((d, d));
    let mut rows = Vec::with_capacity(sorted.len());
    let mut next = 0usize;
    for k in 1..=max {
        let u = block_haar_unitary(&decomp, &mut rng)?;
        acc += &u.conjugate(rho.matrix());
        if k == sorted[next] {
            let mean = DensityMatrix::new(n, acc.clone() / C64::new(k as f64, 0.0))?;
            rows.push(Lemma1Row {
                n,
                samples: k,
                trace_distance: qla::trace_distance(&mean, &target)?,
            });
            next += 1;
            if next == sorted.len() {
                break;
            }
        }
    }
    Ok(rows)
}

/// [`verify_lemma1_for_state`] with a Haar-random pure input state.
pub fn verify_lemma1(n: usize, checkpoints: &[usize], seed: u64) -> Result<Vec<Lemma1Row>> {
    let rho = random_initial_state(
        n,
        &mut RngStream::new(seed, streams::sid(streams::LEMMA1, n, 1)),
    )?;
    verify_lemma1_for_state(&rho, checkpoints, seed)
}

/// Empirical variance of Tr{O U rho U^dag} over scrambler draws.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub n: usize,
    /// "haar" or "block-haar".
    pub scrambler: &'static str,
    pub observable: String,
    pub variance: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct VarianceScalingConfig {
    pub ns: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

/// The reference state for the variance sweep: input qubit freshly written
/// to |1>, the remaining register fully scrambled (maximally mixed). Its
/// purity ~ 2/D is what sets the 1/D^2 variance of the Haar ensemble.
pub fn erase_and_write_reference_state(n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    let one = DensityMatrix::basis_state(1, 1)?;
    let rest = DensityMatrix::maximally_mixed(n - 1);
    DensityMatrix::new(n, qla::kron(one.matrix(), rest.matrix())?)
}

/// Variance sweep with a caller-supplied observable family n -> (label, O).
pub fn verify_variance_scaling_with(
    cfg: &VarianceScalingConfig,
    family: impl Fn(usize) -> Result<(String, CMatrix)>,
) -> Result<Vec<VarianceRow>> {
    if cfg.samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        if n > 8 {
            return Err(Error::invalid("variance sweep is limited to n <= 8"));
        }
        let (label, obs) = family(n)?;
        let rho = erase_and_write_reference_state(n)?;
        let d = rho.dim();
        if obs.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: obs.nrows(),
            });
        }
        let decomp = SectorDecomposition::magnetization(n)?;
        for (scrambler, code) in [("haar", 0u64), ("block-haar", 1u64)] {
            let values: Vec<f64> = (0..cfg.samples)
                .into_par_iter()
                .map(|k| -> Result<f64> {
                    let task = code << 40 | k as u64;
                    let mut rng =
                        RngStream::new(cfg.seed, streams::sid(streams::VARIANCE, n, task));
                    let u = match scrambler {
                        "haar" => qla::haar_unitary(d, &mut rng)?,
                        _ => block_haar_unitary(&decomp, &mut rng)?,
                    };
                    let evolved = u.conjugate(rho.matrix());
                    let mut tr = C64::new(0.0, 0.0);
                    for i in 0..d {
                        for j in 0..d {
                            tr += obs[[i, j]] * evolved[[j, i]];
                        }
                    }
                    Ok(tr.re)
                })
                .collect::<Result<_>>()?;
            let mean = values.iter().sum::<f64>() / cfg.samples as f64;
            let variance =
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (cfg.samples - 1) as f64;
            rows.push(VarianceRow {
                n,
                scrambler,
                observable: label.clone(),
                variance,
                samples: cfg.samples,
            });
        }
    }
    Ok(rows)
}

/// Variance sweep for the default observable sigma^z on qubit 1.
pub fn verify_variance_scaling(cfg: &VarianceScalingConfig) -> Result<Vec<VarianceRow>> {
    verify_variance_scaling_with(cfg, |n| {
        Ok((
            "z1".to_string(),
            qla::embed_single_qubit(&qla::pauli_z(), 1, n)?,
        ))
    })
}
