//! Grand-canonical thermodynamics of an attractive two-well boson gas.
//!
//! The model: one species of bosons hopping between two equal-energy wells
//! with symmetric amplitude 1 (the energy unit), antisymmetric amplitude
//! `gamma`, and an attractive same-well interaction `lambda` scaled by the
//! total particle number M. At zero temperature the collective ground state
//! crosses a quantum phase transition at `lambda_c = sqrt(1 + gamma^2)`; in
//! contact with a bath at inverse temperature `beta` and chemical potential
//! `mu` the grand partition function converges only inside a bounded region
//! of the (lambda, mu) plane and diverges on a piecewise curve with a
//! triple point at `(lambda_c, -3/2 lambda_c)`.
//!
//! The crate provides, per fixed-M sector, the gauged tridiagonal
//! Hamiltonian and its spectrum ([`model`], [`eigen`]); the collective
//! mean-field surface and its minima ([`meanfield`]); the equilibrium-region
//! geometry, divergence curve and near-divergence coefficients
//! ([`boundary`]); exact truncated grand-canonical sums and mode-occupation
//! analysis ([`thermo`]); the saddle-point (csch^2) quadrature approximation
//! of the partition function ([`saddle`]); and sweep/fit/emission tooling
//! behind the CLI ([`scan`]).

pub mod boundary;
pub mod eigen;
mod error;
mod gauss;
pub mod meanfield;
pub mod model;
pub mod saddle;
pub mod scan;
pub mod thermo;

pub use error::{Error, Result};
pub use model::{FockSector, ModelParams, TridiagonalHamiltonian};
pub use thermo::{BathParams, SumOptions, ThermoObservables, XiResult};
