//! Simulation and fitting engine for molecular spin-qubit clock transitions.
//!
//! The crate computes energy levels and equilibrium observables of
//! zero-field-split spin Hamiltonians, averages them over powder and
//! single-crystal orientation ensembles, runs classical Metropolis Monte
//! Carlo for intermolecular Ising couplings, exactly diagonalizes small
//! coupled-spin clusters, models ac-susceptibility/relaxation data, and fits
//! model parameters to magnetometry-style datasets.

pub mod cluster;
pub mod csvio;
pub mod error;
pub mod fitting;
pub mod latticemc;
pub mod linalg;
pub mod orientation;
pub mod presets;
pub mod relaxation;
pub mod spincore;
pub mod thermo;
pub mod units;

pub use cluster::ClusterModel;
pub use error::{Result, SpinError};
pub use fitting::{FitOptions, FitResult};
pub use latticemc::{IsingLattice, McResult};
pub use orientation::OrientationScheme;
pub use presets::Preset;
pub use relaxation::{ColeColeParams, T1Model};
pub use spincore::{FieldVector, LevelSet, SpinSystem};
pub use thermo::{TemperatureGrid, ThermoCurve};
