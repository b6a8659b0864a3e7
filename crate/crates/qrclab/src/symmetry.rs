//! Magnetization-sector machinery.
//!
//! The computational basis of n qubits splits into n+1 sectors by Hamming
//! weight l, the eigenspaces of S = sum_i sigma_i^z with eigenvalue n - 2l
//! and dimension C(n, l). Scrambling dynamics that commute with S act as an
//! independent Haar unitary inside each sector, which is what
//! [`block_haar_unitary`] samples. The mean state of such an ensemble is the
//! sector-weighted direct sum built by [`lemma1_mean_state`].

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qla::{self, CMatrix, DensityMatrix, RngStream, UnitaryMatrix, C64};

/// Partition of the computational basis into symmetry sectors.
#[derive(Debug, Clone)]
pub struct SectorDecomposition {
    n_qubits: usize,
    sectors: Vec<Vec<usize>>,
}

impl SectorDecomposition {
    /// Sectors of S = sum sigma_i^z, ordered by Hamming weight l = 0..n.
    pub fn magnetization(n: usize) -> Result<Self> {
        if n == 0 || n > 14 {
            return Err(Error::invalid(format!(
                "magnetization sectors need 1 <= n <= 14, got {n}"
            )));
        }
        let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for b in 0..(1usize << n) {
            sectors[b.count_ones() as usize].push(b);
        }
        Ok(Self {
            n_qubits: n,
            sectors,
        })
    }

    /// Joint eigenspaces of a set of commuting diagonal operators. Sectors
    /// are ordered by their (rounded) joint eigenvalue tuples.
    pub fn from_diagonal_symmetries(n: usize, ops: &[CMatrix]) -> Result<Self> {
        if n == 0 || n > 14 {
            return Err(Error::invalid(format!("need 1 <= n <= 14, got {n}")));
        }
        if ops.is_empty() {
            return Err(Error::invalid("at least one symmetry operator required"));
        }
        let d = 1usize << n;
        for op in ops {
            if op.dim() != (d, d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: op.nrows(),
                });
            }
            for i in 0..d {
                for j in 0..d {
                    if i != j && op[[i, j]].norm() > 1e-12 {
                        return Err(Error::invalid(
                            "symmetry operators must be diagonal in the computational basis",
                        ));
                    }
                }
                if op[[i, i]].im.abs() > 1e-12 {
                    return Err(Error::invalid("symmetry eigenvalues must be real"));
                }
            }
        }
        // Group basis states by joint eigenvalue tuple, keys rounded to a
        // 1e-9 grid so float noise cannot split a sector.
        let key = |b: usize| -> Vec<i64> {
            ops.iter()
                .map(|op| (op[[b, b]].re * 1e9).round() as i64)
                .collect()
        };
        let mut groups: std::collections::BTreeMap<Vec<i64>, Vec<usize>> =
            std::collections::BTreeMap::new();
        for b in 0..d {
            groups.entry(key(b)).or_default().push(b);
        }
        let sectors: Vec<Vec<usize>> = groups.into_values().collect();
        Ok(Self {
            n_qubits: n,
            sectors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Number of sectors L.
    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    /// Basis indices of sector l.
    pub fn sector(&self, l: usize) -> Result<&[usize]> {
        self.sectors
            .get(l)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::invalid(format!("sector index {l} out of range")))
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.len()).collect()
    }

    /// Diagonal 0/1 projector onto sector l.
    pub fn projector(&self, l: usize) -> Result<CMatrix> {
        let idx = self.sector(l)?;
        let d = self.dim();
        let mut p = Array2::zeros((d, d));
        for &b in idx {
            p[[b, b]] = C64::new(1.0, 0.0);
        }
        Ok(p)
    }
}

/// Sector populations alpha_l: entries in [0, 1], summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    values: Vec<f64>,
}

impl AlphaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("alpha vector must be nonempty"));
        }
        if values.iter().any(|&a| !(-0.0..=1.0 + 1e-12).contains(&a)) {
            return Err(Error::invalid(format!(
                "alpha entries must lie in [0, 1], got {values:?}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "alpha entries must sum to 1, got {sum}"
            )));
        }
        Ok(Self { values })
    }

    /// Uniform populations 1/L.
    pub fn uniform(num_sectors: usize) -> Result<Self> {
        if num_sectors == 0 {
            return Err(Error::invalid("need at least one sector"));
        }
        Self::new(vec![1.0 / num_sectors as f64; num_sectors])
    }

    /// All weight in one sector.
    pub fn point_mass(num_sectors: usize, l: usize) -> Result<Self> {
        if l >= num_sectors {
            return Err(Error::invalid(format!("sector {l} out of range")));
        }
        let mut v = vec![0.0; num_sectors];
        v[l] = 1.0;
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Observable of the form sum_l beta_l P_l: constant on every sector.
#[derive(Debug, Clone)]
pub struct BlockObservable {
    decomp: SectorDecomposition,
    betas: Vec<f64>,
}

impl BlockObservable {
    pub fn new(decomp: SectorDecomposition, betas: Vec<f64>) -> Result<Self> {
        if betas.len() != decomp.num_sectors() {
            return Err(Error::DimensionMismatch {
                expected: decomp.num_sectors(),
                actual: betas.len(),
            });
        }
        Ok(Self { decomp, betas })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn decomposition(&self) -> &SectorDecomposition {
        &self.decomp
    }

    /// Materialize as a dense diagonal matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let d = self.decomp.dim();
        let mut m = Array2::zeros((d, d));
        for (l, sector) in self.decomp.sectors.iter().enumerate() {
            for &b in sector {
                m[[b, b]] = C64::new(self.betas[l], 0.0);
            }
        }
        m
    }
}

/// Expectation sum_l alpha_l beta_l of a block observable on a state with
/// the given sector populations.
pub fn block_observable_expectation(alphas: &AlphaVector, obs: &BlockObservable) -> Result<f64> {
    if alphas.len() != obs.betas.len() {
        return Err(Error::DimensionMismatch {
            expected: obs.betas.len(),
            actual: alphas.len(),
        });
    }
    Ok(alphas
        .values()
        .iter()
        .zip(&obs.betas)
        .map(|(a, b)| a * b)
        .sum())
}

/// Unitary acting as an independent Haar draw inside each sector and as zero
/// across sectors; commutes with every sector projector by construction.
pub fn block_haar_unitary(
    decomp: &SectorDecomposition,
    rng: &mut RngStream,
) -> Result<UnitaryMatrix> {
    let d = decomp.dim();
    let mut u = Array2::<C64>::zeros((d, d));
    for sector in &decomp.sectors {
        let dl = sector.len();
        if dl == 1 {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            u[[sector[0], sector[0]]] = C64::from_polar(1.0, phi);
            continue;
        }
        let block = qla::haar_unitary(dl, rng)?;
        let bm = block.matrix();
        for (i, &bi) in sector.iter().enumerate() {
            for (j, &bj) in sector.iter().enumerate() {
                u[[bi, bj]] = bm[[i, j]];
            }
        }
    }
    UnitaryMatrix::new(u)
}

/// Total magnetization S = sum_i sigma_i^z as a dense diagonal matrix.
pub fn magnetization_operator(n: usize) -> CMatrix {
    let d = 1usize << n;
    let mut m = Array2::zeros((d, d));
    for b in 0..d {
        let weight = b.count_ones() as f64;
        m[[b, b]] = C64::new(n as f64 - 2.0 * weight, 0.0);
    }
    m
}

/// Parity P = prod_i sigma_i^z: diagonal with entries (-1)^(Hamming weight).
pub fn parity_operator(n: usize) -> CMatrix {
    let d = 1usize << n;
    let mut m = Array2::zeros((d, d));
    for b in 0..d {
        let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[[b, b]] = C64::new(sign, 0.0);
    }
    m
}

/// The direct-sum mean state sum_l alpha_l P_l / D_l.
pub fn lemma1_mean_state(
    alphas: &AlphaVector,
    decomp: &SectorDecomposition,
) -> Result<DensityMatrix> {
    if alphas.len() != decomp.num_sectors() {
        return Err(Error::DimensionMismatch {
            expected: decomp.num_sectors(),
            actual: alphas.len(),
        });
    }
    let d = decomp.dim();
    let mut m = Array2::zeros((d, d));
    for (l, sector) in decomp.sectors.iter().enumerate() {
        let w = alphas.values()[l] / sector.len() as f64;
        for &b in sector {
            m[[b, b]] = C64::new(w, 0.0);
        }
    }
    DensityMatrix::new(decomp.n_qubits(), m)
}

/// Sector populations alpha_l = Tr{P_l rho}.
pub fn sector_populations(
    rho: &DensityMatrix,
    decomp: &SectorDecomposition,
) -> Result<AlphaVector> {
    if rho.dim() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            expected: decomp.dim(),
            actual: rho.dim(),
        });
    }
    let m = rho.matrix();
    let mut values = Vec::with_capacity(decomp.num_sectors());
    for sector in &decomp.sectors {
        let mut pop = 0.0;
        for &b in sector {
            pop += m[[b, b]].re;
        }
        // diagonal entries of a PSD matrix can round slightly negative
        if pop < 0.0 {
            if pop < -1e-9 {
                return Err(Error::Internal(format!(
                    "sector population {pop:e} below tolerance"
                )));
            }
            pop = 0.0;
        }
        values.push(pop);
    }
    AlphaVector::new(values)
}
