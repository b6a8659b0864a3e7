//! The numerical protocols as reproducible, seeded ensemble experiments,
//! plus the analytic sector-population recurrence used as an oracle for the
//! scrambled dynamics.
//!
//! Every experiment takes a base seed and derives one [`RngStream`] per
//! ensemble member from a fixed `(experiment, n, task)` layout, so results
//! are byte-stable regardless of how many worker threads execute the
//! ensemble. Parallel members are collected in index order and reduced
//! sequentially.
//!
//! [`RngStream`]: crate::qla::RngStream

pub mod alpha;
pub mod concentration;
pub mod discrimination;
pub mod echo_state;
pub mod haar_checks;

pub use alpha::{AlphaMcRow, AlphaTrajectory, InputBit};
pub use concentration::{run_concentration, ConcentrationConfig, ConcentrationRow};
pub use discrimination::{
    run_discrimination, DiscriminationConfig, DiscriminationRow, Scrambler, ScramblerMode,
};
pub use echo_state::{
    run_echo_state, EchoConvergedRow, EchoCurveRow, EchoStateConfig, EchoStateResult,
};
pub use haar_checks::{
    verify_lemma1, verify_lemma1_for_state, verify_variance_scaling, verify_variance_scaling_with,
    Lemma1Row, VarianceRow, VarianceScalingConfig,
};

/// A point in the Ising hyperparameter plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub label: String,
    pub w: f64,
    pub h: f64,
}

impl PhasePoint {
    pub fn new(label: impl Into<String>, w: f64, h: f64) -> Self {
        Self {
            label: label.into(),
            w,
            h,
        }
    }

    /// Thermal phase as fixed in the main analysis: W = 1e-2, h = 10.
    pub fn thermal_main() -> Self {
        Self::new("thermal-main", 1e-2, 1e1)
    }

    /// Thermal phase variant used in the echo-state convergence counts:
    /// W = 1e-1, h = 10.
    pub fn thermal_sm() -> Self {
        Self::new("thermal-sm", 1e-1, 1e1)
    }

    /// Many-body localized phase: W = 1e2, h = 10.
    pub fn localized() -> Self {
        Self::new("localized", 1e2, 1e1)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "thermal-main" => Some(Self::thermal_main()),
            "thermal-sm" => Some(Self::thermal_sm()),
            "localized" => Some(Self::localized()),
            _ => None,
        }
    }
}

/// Stream-id layout shared by all experiments: experiment code in the top
/// byte, register size in the next, task index below.
pub(crate) mod streams {
    pub const ALPHA: u64 = 1;
    pub const CONCENTRATION: u64 = 2;
    pub const ECHO: u64 = 3;
    pub const DISCRIMINATION: u64 = 4;
    pub const LEMMA1: u64 = 5;
    pub const VARIANCE: u64 = 6;

    pub fn sid(experiment: u64, n: usize, task: u64) -> u64 {
        debug_assert!(task < (1 << 48));
        (experiment << 56) | ((n as u64) << 48) | task
    }
}

/// Least-squares slope of y against x.
pub fn linear_fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Temporal sample variance of a series.
pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}
