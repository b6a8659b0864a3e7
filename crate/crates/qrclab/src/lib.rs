//! Simulator for spin-based quantum reservoir computing at density-matrix
//! scale: erase-and-write reservoir dynamics, Ising and random-unitary
//! scramblers, magnetization-sector analysis, and the ensemble experiments
//! that probe exponential concentration of output observables and its
//! symmetry-based mitigation.

extern crate blas_src as _;

pub mod error;
pub mod experiments;
pub mod measurement;
pub mod qla;
pub mod reservoir;
pub mod symmetry;

pub use error::{Error, Result};
pub use qla::{CMatrix, DensityMatrix, RngStream, UnitaryMatrix, C64};
