//! Reservoir construction and erase-and-write dynamics.
//!
//! One update step resets the input qubits to the injected state and evolves
//! the whole register unitarily:
//!
//! ```text
//! rho_{k+1} = U (rho_I ox Tr_in{rho_k}) U^dag,    U = exp(-i H dt)
//! ```
//!
//! The built-in Hamiltonian is the fully connected transverse-field Ising
//! model with couplings J_ij ~ Uniform[-J_s/2, J_s/2] on sigma^x sigma^x and
//! on-site fields (h + h_i)/2 on sigma^z, h_i ~ Uniform[-W, W]. J_s = 1 sets
//! the unit of energy; W, h and dt are expressed relative to it.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measurement::{
    exact_expectations, sampled_expectation_diag, DiagonalizedObservable, ObservableSet, ShotConfig,
};
use crate::qla::{self, CMatrix, DensityMatrix, RngStream, UnitaryMatrix, C64};

/// Hyperparameters of the transverse-field Ising reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub n_qubits: usize,
    /// Coupling scale; the unit of energy.
    pub j_s: f64,
    /// Uniform field, in J_s units.
    pub h: f64,
    /// Disorder width, in J_s units.
    pub w: f64,
    /// Input interval, in 1/J_s units.
    pub dt: f64,
}

impl IsingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::invalid("Ising reservoir needs n_qubits >= 2"));
        }
        if self.j_s.is_nan() || self.j_s <= 0.0 {
            return Err(Error::invalid("J_s must be positive"));
        }
        if self.w < 0.0 {
            return Err(Error::invalid("W must be nonnegative"));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::invalid("dt must be positive"));
        }
        Ok(())
    }
}

/// One sampled disorder realization: couplings per pair (i < j, lexicographic)
/// and on-site fields. Kept explicit so tests can pin exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingDisorder {
    pub couplings: Vec<(usize, usize, f64)>,
    pub fields: Vec<f64>,
}

impl IsingDisorder {
    /// Draw J_ij ~ Uniform[-J_s/2, J_s/2] and h_i ~ Uniform[-W, W].
    pub fn sample(params: &IsingParams, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let n = params.n_qubits;
        let half = params.j_s / 2.0;
        let mut couplings = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                couplings.push((i, j, rng.gen_range(-half..half)));
            }
        }
        let fields = (0..n)
            .map(|_| {
                if params.w > 0.0 {
                    rng.gen_range(-params.w..params.w)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { couplings, fields })
    }

    /// All couplings and fields zero; the leading-order limit H = (h/2) sum sigma^z.
    pub fn zeroed(n: usize) -> Self {
        let couplings = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 0.0)))
            .collect();
        Self {
            couplings,
            fields: vec![0.0; n],
        }
    }
}

/// Assemble H = sum_{i<j} J_ij sigma_i^x sigma_j^x + (1/2) sum_i (h + h_i) sigma_i^z
/// directly in the computational basis.
pub fn ising_hamiltonian(params: &IsingParams, disorder: &IsingDisorder) -> Result<CMatrix> {
    params.validate()?;
    let n = params.n_qubits;
    if disorder.fields.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: disorder.fields.len(),
        });
    }
    let d = 1usize << n;
    let mut h = Array2::<C64>::zeros((d, d));
    for b in 0..d {
        let mut diag = 0.0;
        for (i, hi) in disorder.fields.iter().enumerate() {
            // qubit i is bit n-1-i; |0> has sigma^z eigenvalue +1
            let z = if (b >> (n - 1 - i)) & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            diag += 0.5 * (params.h + hi) * z;
        }
        h[[b, b]] = C64::new(diag, 0.0);
    }
    for &(i, j, jij) in &disorder.couplings {
        if i >= j || j >= n {
            return Err(Error::invalid(format!("bad coupling pair ({i}, {j})")));
        }
        let mask = (1usize << (n - 1 - i)) | (1usize << (n - 1 - j));
        for b in 0..d {
            h[[b ^ mask, b]] += C64::new(jij, 0.0);
        }
    }
    Ok(h)
}

/// Sample a disordered Ising Hamiltonian and its evolution unitary
/// U = exp(-i H dt).
pub fn build_ising(params: &IsingParams, rng: &mut RngStream) -> Result<(CMatrix, UnitaryMatrix)> {
    let disorder = IsingDisorder::sample(params, rng)?;
    let h = ising_hamiltonian(params, &disorder)?;
    let u = qla::evolution_unitary(&h, params.dt)?;
    Ok((h, u))
}

/// Amplitude encoding of a scalar s in [0, 1]:
/// |psi_s> = sqrt(s)|0> + sqrt(1-s)|1>.
pub fn encode_input(s: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("input scalar {s} outside [0, 1]")));
    }
    let a = s.sqrt();
    let b = (1.0 - s).sqrt();
    let psi = ndarray::arr1(&[C64::new(a, 0.0), C64::new(b, 0.0)]);
    DensityMatrix::from_pure(&psi)
}

/// A reservoir instance: register size, scrambling unitary, and the qubits
/// that receive the input each step.
#[derive(Debug, Clone)]
pub struct ReservoirConfig {
    n_qubits: usize,
    unitary: UnitaryMatrix,
    input_qubits: Vec<usize>,
}

impl ReservoirConfig {
    pub fn new(n_qubits: usize, unitary: UnitaryMatrix, input_qubits: Vec<usize>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("reservoir needs n_qubits >= 1"));
        }
        if unitary.dim() != (1 << n_qubits) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                actual: unitary.dim(),
            });
        }
        if input_qubits.is_empty() || input_qubits.len() > n_qubits {
            return Err(Error::invalid("need 1 <= m <= n input qubits"));
        }
        let mut seen = vec![false; n_qubits];
        for &q in &input_qubits {
            if q >= n_qubits {
                return Err(Error::invalid(format!("input qubit {q} out of range")));
            }
            if seen[q] {
                return Err(Error::invalid(format!("duplicate input qubit {q}")));
            }
            seen[q] = true;
        }
        Ok(Self {
            n_qubits,
            unitary,
            input_qubits,
        })
    }

    /// Single-qubit input injected at qubit 0.
    pub fn single_input(n_qubits: usize, unitary: UnitaryMatrix) -> Result<Self> {
        Self::new(n_qubits, unitary, vec![0])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn input_qubits(&self) -> &[usize] {
        &self.input_qubits
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }
}

/// An input series: either classical scalars (amplitude-encoded one-qubit
/// states) or explicit m-qubit states.
#[derive(Debug, Clone)]
pub enum InputSeries {
    Scalars(Vec<f64>),
    States(Vec<DensityMatrix>),
}

impl InputSeries {
    pub fn scalars(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::invalid(format!("input scalar {bad} outside [0, 1]")));
        }
        Ok(InputSeries::Scalars(values))
    }

    /// Uniform random scalars in [0, 1].
    pub fn random_scalars(len: usize, rng: &mut RngStream) -> Self {
        InputSeries::Scalars((0..len).map(|_| rng.gen_range(0.0..=1.0)).collect())
    }

    /// The same state injected `len` times.
    pub fn constant_state(state: DensityMatrix, len: usize) -> Self {
        InputSeries::States(vec![state; len])
    }

    pub fn len(&self) -> usize {
        match self {
            InputSeries::Scalars(v) => v.len(),
            InputSeries::States(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_at(&self, k: usize) -> Result<DensityMatrix> {
        match self {
            InputSeries::Scalars(v) => encode_input(v[k]),
            InputSeries::States(v) => Ok(v[k].clone()),
        }
    }
}

/// One erase-and-write update: trace out the input qubits, tensor the input
/// state into their slots (restoring register order), conjugate by U.
pub fn reservoir_step(
    config: &ReservoirConfig,
    rho_r: &DensityMatrix,
    rho_i: &DensityMatrix,
) -> Result<DensityMatrix> {
    let n = config.n_qubits;
    let m = config.input_qubits.len();
    if rho_r.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rho_r.n_qubits(),
        });
    }
    if rho_i.n_qubits() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rho_i.n_qubits(),
        });
    }
    let written = if m == n {
        // the whole register is rewritten; slot p holds input_qubits[p]
        qla::restore_qubit_order(rho_i.matrix(), &config.input_qubits)?
    } else {
        let kept = qla::partial_trace(rho_r, &config.input_qubits)?;
        let combined = qla::kron(rho_i.matrix(), kept.matrix())?;
        let mut labels: Vec<usize> = config.input_qubits.clone();
        labels.extend((0..n).filter(|q| !config.input_qubits.contains(q)));
        qla::restore_qubit_order(&combined, &labels)?
    };
    let evolved = config.unitary.conjugate(&written);
    DensityMatrix::new(n, evolved)
}

/// Haar-random pure state U|0...0>, sampled as a normalized complex
/// Gaussian vector.
pub fn random_initial_state(n: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::invalid("need n >= 1"));
    }
    let d = 1usize << n;
    let mut psi = Array1::<C64>::zeros(d);
    for a in psi.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *a = C64::new(re, im);
    }
    DensityMatrix::from_pure(&psi)
}

#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    /// Leading inputs whose outputs are discarded.
    pub washout: usize,
    /// Exact expectations or per-observable finite shot sampling.
    pub shots: ShotConfig,
    /// Keep the post-washout states for diagnostics.
    pub record_states: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            washout: 0,
            shots: ShotConfig::Exact,
            record_states: false,
        }
    }
}

/// Time-indexed observable record of one reservoir run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub labels: Vec<String>,
    /// Input indices of the recorded rows (washout..len).
    pub steps: Vec<usize>,
    /// Recorded steps x observables.
    pub expectations: Array2<f64>,
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
}

/// Drive the reservoir through an input series, recording expectations of
/// every observable after each post-washout step.
pub fn run_trajectory(
    config: &ReservoirConfig,
    inputs: &InputSeries,
    rho_0: &DensityMatrix,
    observables: &ObservableSet,
    opts: &TrajectoryOptions,
    mut shot_rng: Option<&mut RngStream>,
) -> Result<Trajectory> {
    if inputs.is_empty() {
        return Err(Error::invalid("input series is empty"));
    }
    if opts.washout >= inputs.len() {
        return Err(Error::invalid(format!(
            "washout {} must be shorter than the input series ({})",
            opts.washout,
            inputs.len()
        )));
    }
    let recorded = inputs.len() - opts.washout;
    let diagonalized: Option<Vec<DiagonalizedObservable>> = match opts.shots {
        ShotConfig::Exact => None,
        ShotConfig::Finite(_) => {
            if shot_rng.is_none() {
                return Err(Error::invalid("finite-shot trajectory needs an RngStream"));
            }
            Some(
                observables
                    .matrices()
                    .iter()
                    .map(DiagonalizedObservable::from_matrix)
                    .collect::<Result<_>>()?,
            )
        }
    };

    let mut rho = rho_0.clone();
    let mut expectations = Array2::<f64>::zeros((recorded, observables.len()));
    let mut steps = Vec::with_capacity(recorded);
    let mut states = opts.record_states.then(Vec::new);
    for k in 0..inputs.len() {
        let rho_i = inputs.state_at(k)?;
        rho = reservoir_step(config, &rho, &rho_i)?;
        if k < opts.washout {
            continue;
        }
        let row = k - opts.washout;
        match (&opts.shots, &diagonalized) {
            (ShotConfig::Exact, _) => {
                for (col, v) in exact_expectations(&rho, observables)?
                    .into_iter()
                    .enumerate()
                {
                    expectations[[row, col]] = v;
                }
            }
            (ShotConfig::Finite(n_shots), Some(diag)) => {
                let rng = shot_rng.as_deref_mut().expect("checked above");
                for (col, obs) in diag.iter().enumerate() {
                    expectations[[row, col]] = sampled_expectation_diag(&rho, obs, *n_shots, rng)?;
                }
            }
            _ => unreachable!(),
        }
        steps.push(k);
        if let Some(ss) = states.as_mut() {
            ss.push(rho.clone());
        }
    }
    Ok(Trajectory {
        labels: observables.labels().to_vec(),
        steps,
        expectations,
        states,
        final_state: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{embed_single_qubit, identity, kron, max_abs, max_abs_diff, pauli_x, pauli_z};
    use approx::assert_abs_diff_eq;

    fn thermal_params(n: usize) -> IsingParams {
        IsingParams {
            n_qubits: n,
            j_s: 1.0,
            h: 10.0,
            w: 1e-2,
            dt: 10.0,
        }
    }

    #[test]
    fn ising_zeroed_couplings_is_diagonal_field_term() {
        let params = IsingParams {
            n_qubits: 3,
            j_s: 1.0,
            h: 2.0,
            w: 0.0,
            dt: 1.0,
        };
        let h = ising_hamiltonian(&params, &IsingDisorder::zeroed(3)).unwrap();
        let mut expect = Array2::<C64>::zeros((8, 8));
        for i in 0..3 {
            expect += &(embed_single_qubit(&pauli_z(), i, 3).unwrap() * C64::new(1.0, 0.0));
        }
        let expect = expect * C64::new(params.h / 2.0, 0.0);
        assert!(max_abs_diff(&h, &expect) < 1e-14);

        let u = qla::evolution_unitary(&h, params.dt).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(u.matrix()[[i, j]].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ising_matches_kron_assembly() {
        // independent oracle: assemble the n=2 Hamiltonian from Kronecker
        // products of Pauli matrices
        let params = IsingParams {
            n_qubits: 2,
            j_s: 1.0,
            h: 3.0,
            w: 0.0,
            dt: 1.0,
        };
        let j12 = 0.37;
        let disorder = IsingDisorder {
            couplings: vec![(0, 1, j12)],
            fields: vec![0.0, 0.0],
        };
        let h = ising_hamiltonian(&params, &disorder).unwrap();

        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let z0 = kron(&pauli_z(), &identity(2)).unwrap();
        let z1 = kron(&identity(2), &pauli_z()).unwrap();
        let expect = xx * C64::new(j12, 0.0) + (z0 + z1) * C64::new(params.h / 2.0, 0.0);
        assert!(max_abs_diff(&h, &expect) < 1e-14);
    }

    #[test]
    fn ising_symmetry_is_approximate() {
        // [H, S] vanishes with the couplings and is bounded by 4 sum|J_ij|
        let params = IsingParams {
            n_qubits: 4,
            j_s: 1.0,
            h: 10.0,
            w: 0.0,
            dt: 1.0,
        };
        let mut rng = RngStream::new(6, 0);
        let disorder = IsingDisorder::sample(&params, &mut rng).unwrap();
        let h = ising_hamiltonian(&params, &disorder).unwrap();
        let s = crate::symmetry::magnetization_operator(4);
        let comm = h.dot(&s) - s.dot(&h);
        let bound: f64 = disorder
            .couplings
            .iter()
            .map(|(_, _, j)| 4.0 * j.abs())
            .sum();
        let norm = max_abs(&comm);
        assert!(norm > 0.0, "couplings break the symmetry");
        assert!(norm <= bound + 1e-12, "norm {norm} bound {bound}");
    }

    #[test]
    fn build_ising_produces_hermitian_and_unitary() {
        let params = thermal_params(3);
        let mut rng = RngStream::new(10, 1);
        let (h, u) = build_ising(&params, &mut rng).unwrap();
        assert!(qla::is_hermitian(&h, 1e-12));
        assert_eq!(u.dim(), 8);
    }

    #[test]
    fn encode_input_cases() {
        let one = encode_input(1.0).unwrap();
        assert!(
            max_abs_diff(
                one.matrix(),
                DensityMatrix::basis_state(1, 0).unwrap().matrix()
            ) < 1e-15
        );

        let zero = encode_input(0.0).unwrap();
        assert!(
            max_abs_diff(
                zero.matrix(),
                DensityMatrix::basis_state(1, 1).unwrap().matrix()
            ) < 1e-15
        );

        let half = encode_input(0.5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(half.matrix()[[i, j]].re, 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(half.matrix()[[i, j]].im, 0.0, epsilon = 1e-15);
            }
        }
        assert!(encode_input(-0.1).is_err());
        assert!(encode_input(1.1).is_err());
    }

    #[test]
    fn reservoir_step_pure_reset() {
        // U = I: injecting |1> into qubit 0 of |00> gives |10>
        let config = ReservoirConfig::single_input(2, UnitaryMatrix::identity(4)).unwrap();
        let rho_r = DensityMatrix::basis_state(2, 0).unwrap();
        let rho_i = DensityMatrix::basis_state(1, 1).unwrap();
        let out = reservoir_step(&config, &rho_r, &rho_i).unwrap();
        let expect = DensityMatrix::basis_state(2, 0b10).unwrap();
        assert!(max_abs_diff(out.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn reservoir_step_input_on_middle_qubit() {
        // inject |1> into qubit 1 of |000>: result |010>
        let config = ReservoirConfig::new(3, UnitaryMatrix::identity(8), vec![1]).unwrap();
        let rho_r = DensityMatrix::basis_state(3, 0).unwrap();
        let rho_i = DensityMatrix::basis_state(1, 1).unwrap();
        let out = reservoir_step(&config, &rho_r, &rho_i).unwrap();
        let expect = DensityMatrix::basis_state(3, 0b010).unwrap();
        assert!(max_abs_diff(out.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn reservoir_step_preserves_invariants() {
        let n = 3;
        let mut rng = RngStream::new(33, 0);
        let u = qla::haar_unitary(8, &mut rng).unwrap();
        let config = ReservoirConfig::single_input(n, u).unwrap();
        let mut rho = random_initial_state(n, &mut rng).unwrap();
        for k in 0..50 {
            let s = rng.gen_range(0.0..=1.0);
            rho = reservoir_step(&config, &rho, &encode_input(s).unwrap()).unwrap();
            let tr = rho.trace();
            assert!((tr.re - 1.0).abs() < 1e-12, "step {k}: trace {tr}");
            assert!(tr.im.abs() < 1e-12);
        }
        rho.validate_full().unwrap();
    }

    #[test]
    fn reservoir_step_permutation_covariance() {
        // relabeling the non-input qubits commutes with the update when U is
        // conjugated accordingly
        let n = 3;
        let mut rng = RngStream::new(12, 7);
        let u = qla::haar_unitary(1 << n, &mut rng).unwrap();
        let rho_r = random_initial_state(n, &mut rng).unwrap();
        let rho_i = encode_input(0.3).unwrap();

        // swap qubits 1 and 2
        let relabel = |m: &CMatrix| qla::restore_qubit_order(m, &[0, 2, 1]).unwrap();

        let config = ReservoirConfig::single_input(n, u.clone()).unwrap();
        let direct = relabel(reservoir_step(&config, &rho_r, &rho_i).unwrap().matrix());

        let u_perm = UnitaryMatrix::new(relabel(u.matrix())).unwrap();
        let config_perm = ReservoirConfig::single_input(n, u_perm).unwrap();
        let rho_perm = DensityMatrix::new(n, relabel(rho_r.matrix())).unwrap();
        let routed = reservoir_step(&config_perm, &rho_perm, &rho_i).unwrap();

        assert!(max_abs_diff(&direct, routed.matrix()) < 1e-12);
    }

    #[test]
    fn reservoir_step_multi_qubit_input_respects_listed_order() {
        // inputs on qubits [2, 0] of a 3-qubit register: the first input
        // qubit of rho_I lands on qubit 2, the second on qubit 0
        let config = ReservoirConfig::new(3, UnitaryMatrix::identity(8), vec![2, 0]).unwrap();
        let rho_r = DensityMatrix::basis_state(3, 0).unwrap();
        let rho_i = DensityMatrix::basis_state(2, 0b01).unwrap(); // qubit2 <- 0, qubit0 <- 1
        let out = reservoir_step(&config, &rho_r, &rho_i).unwrap();
        let expect = DensityMatrix::basis_state(3, 0b100).unwrap();
        assert!(max_abs_diff(out.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn reservoir_step_full_rewrite() {
        // m = n: the register is replaced entirely, then evolved
        let mut rng = RngStream::new(1, 1);
        let u = qla::haar_unitary(4, &mut rng).unwrap();
        let config = ReservoirConfig::new(2, u.clone(), vec![0, 1]).unwrap();
        let rho_r = DensityMatrix::maximally_mixed(2);
        let rho_i = DensityMatrix::basis_state(2, 0b01).unwrap();
        let out = reservoir_step(&config, &rho_r, &rho_i).unwrap();
        let expect = u.conjugate(rho_i.matrix());
        assert!(max_abs_diff(out.matrix(), &expect) < 1e-12);
    }

    #[test]
    fn random_initial_state_properties() {
        let mut rng = RngStream::new(50, 0);
        let rho = random_initial_state(3, &mut rng).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-10);
        rho.validate_full().unwrap();

        let a = random_initial_state(2, &mut RngStream::new(50, 1)).unwrap();
        let b = random_initial_state(2, &mut RngStream::new(50, 2)).unwrap();
        assert!(qla::trace_distance(&a, &b).unwrap() > 0.0);
    }

    #[test]
    fn random_initial_state_first_moment() {
        let n = 3;
        let d = 1 << n;
        let draws = 10_000;
        let mut rng = RngStream::new(51, 0);
        let mut acc = Array2::<C64>::zeros((d, d));
        for _ in 0..draws {
            acc += random_initial_state(n, &mut rng).unwrap().matrix();
        }
        acc /= C64::new(draws as f64, 0.0);
        assert!(max_abs_diff(&acc, DensityMatrix::maximally_mixed(n).matrix()) < 0.05);
    }

    #[test]
    fn trajectory_identity_observable() {
        let n = 2;
        let mut rng = RngStream::new(3, 3);
        let u = qla::haar_unitary(4, &mut rng).unwrap();
        let config = ReservoirConfig::single_input(n, u).unwrap();
        let obs = ObservableSet::new(vec!["id".into()], vec![identity(4)]).unwrap();
        let inputs = InputSeries::random_scalars(20, &mut rng);
        let rho0 = DensityMatrix::maximally_mixed(n);
        let traj = run_trajectory(
            &config,
            &inputs,
            &rho0,
            &obs,
            &TrajectoryOptions::default(),
            None,
        )
        .unwrap();
        for v in traj.expectations.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn trajectory_frozen_dynamics() {
        // U = I, constant s = 1 inputs: sigma^z on the input qubit pins to +1
        let n = 2;
        let config = ReservoirConfig::single_input(n, UnitaryMatrix::identity(4)).unwrap();
        let obs = ObservableSet::single_qubit_paulis(n)
            .unwrap()
            .subset(&["z0"])
            .unwrap();
        let inputs = InputSeries::scalars(vec![1.0; 10]).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(n);
        let traj = run_trajectory(
            &config,
            &inputs,
            &rho0,
            &obs,
            &TrajectoryOptions::default(),
            None,
        )
        .unwrap();
        for v in traj.expectations.iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn frozen_dynamics_leaves_non_input_qubits_constant() {
        // U = I with random inputs: sigma^z on a non-input qubit never moves
        let n = 3;
        let mut rng = RngStream::new(44, 0);
        let config = ReservoirConfig::single_input(n, UnitaryMatrix::identity(8)).unwrap();
        let obs = ObservableSet::single_qubit_paulis(n)
            .unwrap()
            .subset(&["z1", "z2"])
            .unwrap();
        let inputs = InputSeries::random_scalars(30, &mut rng);
        let rho0 = random_initial_state(n, &mut rng).unwrap();
        let traj = run_trajectory(
            &config,
            &inputs,
            &rho0,
            &obs,
            &TrajectoryOptions::default(),
            None,
        )
        .unwrap();
        for col in 0..2 {
            let series: Vec<f64> = traj.expectations.column(col).to_vec();
            let spread = series
                .iter()
                .fold(0.0f64, |m, v| m.max((v - series[0]).abs()));
            assert!(spread < 1e-12, "non-input observable moved by {spread:e}");
        }
    }

    #[test]
    fn trajectory_washout_and_errors() {
        let n = 2;
        let config = ReservoirConfig::single_input(n, UnitaryMatrix::identity(4)).unwrap();
        let obs = ObservableSet::single_qubit_paulis(n).unwrap();
        let rho0 = DensityMatrix::maximally_mixed(n);
        let empty = InputSeries::Scalars(vec![]);
        assert!(run_trajectory(
            &config,
            &empty,
            &rho0,
            &obs,
            &TrajectoryOptions::default(),
            None
        )
        .is_err());

        let inputs = InputSeries::scalars(vec![0.5; 5]).unwrap();
        let opts = TrajectoryOptions {
            washout: 5,
            ..Default::default()
        };
        assert!(run_trajectory(&config, &inputs, &rho0, &obs, &opts, None).is_err());

        let opts = TrajectoryOptions {
            washout: 2,
            ..Default::default()
        };
        let traj = run_trajectory(&config, &inputs, &rho0, &obs, &opts, None).unwrap();
        assert_eq!(traj.steps, vec![2, 3, 4]);
        assert_eq!(traj.expectations.nrows(), 3);
    }

    #[test]
    fn input_series_validation() {
        assert!(InputSeries::scalars(vec![0.2, 1.3]).is_err());
        let s = InputSeries::scalars(vec![0.2, 0.8]).unwrap();
        assert_eq!(s.len(), 2);
    }
}
