//! Observable sets, exact and finite-shot expectation estimation, and the
//! trained linear output layer.

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, WeightedIndex};

use crate::error::{Error, Result};
use crate::qla::{
    self, CMatrix, DensityMatrix, RngStream, UnitaryMatrix, C64, IMAG_TOL, STRUCT_TOL,
};

/// A labeled set of Hermitian observables on a common Hilbert space.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    labels: Vec<String>,
    matrices: Vec<CMatrix>,
}

impl ObservableSet {
    pub fn new(labels: Vec<String>, matrices: Vec<CMatrix>) -> Result<Self> {
        if labels.len() != matrices.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: matrices.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.clone()) {
                return Err(Error::invalid(format!(
                    "duplicate observable label {label}"
                )));
            }
        }
        for (label, m) in labels.iter().zip(&matrices) {
            if !qla::is_hermitian(m, STRUCT_TOL) {
                return Err(Error::invalid(format!(
                    "observable {label} is not Hermitian"
                )));
            }
        }
        Ok(Self { labels, matrices })
    }

    /// The 3n single-qubit Paulis sigma_i^{x,y,z}, labeled "x0", "y0", "z0",
    /// "x1", ... in qubit-major order.
    pub fn single_qubit_paulis(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need n >= 1"));
        }
        let mut labels = Vec::with_capacity(3 * n);
        let mut matrices = Vec::with_capacity(3 * n);
        for qubit in 0..n {
            for (axis, op) in [
                ("x", qla::pauli_x()),
                ("y", qla::pauli_y()),
                ("z", qla::pauli_z()),
            ] {
                labels.push(format!("{axis}{qubit}"));
                matrices.push(qla::embed_single_qubit(&op, qubit, n)?);
            }
        }
        Self::new(labels, matrices)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn get(&self, label: &str) -> Option<&CMatrix> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.matrices[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Keep only the listed labels, in the given order.
    pub fn subset(&self, labels: &[&str]) -> Result<Self> {
        let mut out_labels = Vec::with_capacity(labels.len());
        let mut out_mats = Vec::with_capacity(labels.len());
        for &label in labels {
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::invalid(format!("unknown observable label {label}")))?;
            out_labels.push(self.labels[i].clone());
            out_mats.push(self.matrices[i].clone());
        }
        Self::new(out_labels, out_mats)
    }
}

/// Measurement budget: exact expectations or a finite number of projective
/// shots per observable per time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotConfig {
    Exact,
    Finite(u64),
}

impl ShotConfig {
    pub fn finite(n_shots: u64) -> Result<Self> {
        if n_shots == 0 {
            return Err(Error::invalid("shot count must be >= 1"));
        }
        Ok(ShotConfig::Finite(n_shots))
    }
}

/// Tr{rho O} for a single Hermitian observable.
pub fn exact_expectation(rho: &DensityMatrix, o: &CMatrix) -> Result<f64> {
    let d = rho.dim();
    if o.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: o.nrows(),
        });
    }
    let m = rho.matrix();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            tr += m[[i, j]] * o[[j, i]];
        }
    }
    if tr.im.abs() > IMAG_TOL {
        return Err(Error::Internal(format!(
            "expectation has imaginary residue {:e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Exact expectations of every observable in the set.
pub fn exact_expectations(rho: &DensityMatrix, obs: &ObservableSet) -> Result<Vec<f64>> {
    obs.matrices
        .iter()
        .map(|o| exact_expectation(rho, o))
        .collect()
}

/// An observable pre-diagonalized for repeated shot sampling.
#[derive(Debug, Clone)]
pub struct DiagonalizedObservable {
    eigvals: Array1<f64>,
    eigvecs: UnitaryMatrix,
}

impl DiagonalizedObservable {
    pub fn from_matrix(o: &CMatrix) -> Result<Self> {
        let (eigvals, eigvecs) = qla::herm_eig(o)?;
        Ok(Self { eigvals, eigvecs })
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigvals
    }
}

/// Finite-shot estimate of Tr{rho O}: sample eigenvalue outcomes with Born
/// probabilities <v_j|rho|v_j> and return the sample mean. Unbiased.
pub fn sampled_expectation_diag(
    rho: &DensityMatrix,
    o: &DiagonalizedObservable,
    n_shots: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    let d = rho.dim();
    if o.eigvals.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: o.eigvals.len(),
        });
    }
    if n_shots == 0 {
        return Err(Error::invalid("shot count must be >= 1"));
    }
    let v = o.eigvecs.matrix();
    let m = rho.matrix();
    let mut probs = Vec::with_capacity(d);
    for j in 0..d {
        let col = v.column(j);
        let mut p = C64::new(0.0, 0.0);
        for a in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..d {
                row += m[[a, b]] * col[b];
            }
            p += col[a].conj() * row;
        }
        let pr = p.re;
        if pr < -1e-9 {
            return Err(Error::Internal(format!("negative Born probability {pr:e}")));
        }
        probs.push(pr.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::Internal("all Born probabilities vanished".into()));
    }
    for p in &mut probs {
        *p /= total;
    }
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::Internal(format!("weighted sampling failed: {e}")))?;
    let mut acc = 0.0;
    for _ in 0..n_shots {
        acc += o.eigvals[dist.sample(rng)];
    }
    Ok(acc / n_shots as f64)
}

/// Convenience wrapper that diagonalizes `o` once and samples.
pub fn sampled_expectation(
    rho: &DensityMatrix,
    o: &CMatrix,
    shots: ShotConfig,
    rng: &mut RngStream,
) -> Result<f64> {
    match shots {
        ShotConfig::Exact => exact_expectation(rho, o),
        ShotConfig::Finite(n) => {
            let diag = DiagonalizedObservable::from_matrix(o)?;
            sampled_expectation_diag(rho, &diag, n, rng)
        }
    }
}

/// Linear readout y = X w + b trained by ridge regression.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    weights: Vec<f64>,
    bias: f64,
    ridge_lambda: f64,
}

impl ReadoutModel {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }

    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<f64>> {
        if features.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: features.ncols(),
            });
        }
        Ok(features
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(&self.weights)
                    .map(|(x, w)| x * w)
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

/// Ridge regression with a bias column, solved by the normal equations.
/// A singular normal matrix (possible at lambda = 0) is reported as a
/// numerical error; set lambda > 0 to regularize.
pub fn train_readout(
    features: &Array2<f64>,
    targets: &[f64],
    ridge_lambda: f64,
) -> Result<ReadoutModel> {
    use ndarray_linalg::Solve;
    let t = features.nrows();
    let m = features.ncols();
    if t == 0 {
        return Err(Error::invalid("need at least one training row"));
    }
    if targets.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            actual: targets.len(),
        });
    }
    if ridge_lambda < 0.0 {
        return Err(Error::invalid("ridge_lambda must be nonnegative"));
    }
    // augmented design matrix [X | 1]
    let cols = m + 1;
    let mut gram = Array2::<f64>::zeros((cols, cols));
    let mut rhs = Array1::<f64>::zeros(cols);
    let aug = |row: ndarray::ArrayView1<f64>, j: usize| -> f64 {
        if j < m {
            row[j]
        } else {
            1.0
        }
    };
    for (row, target) in features.rows().into_iter().zip(targets) {
        for i in 0..cols {
            let xi = aug(row, i);
            rhs[i] += xi * target;
            for j in i..cols {
                gram[[i, j]] += xi * aug(row, j);
            }
        }
    }

    for i in 0..cols {
        for j in 0..i {
            gram[[i, j]] = gram[[j, i]];
        }
        // the bias column is not penalized
        if i < m {
            gram[[i, i]] += ridge_lambda;
        }
    }
    let solution = gram.solve(&rhs).map_err(|e| {
        Error::Numerical(format!(
            "normal equations are singular ({e}); set ridge_lambda > 0"
        ))
    })?;
    let mut weights: Vec<f64> = solution.iter().copied().collect();
    let bias = weights.pop().expect("bias column present");
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Numerical("readout weights are not finite".into()));
    }
    Ok(ReadoutModel {
        weights,
        bias,
        ridge_lambda,
    })
}
