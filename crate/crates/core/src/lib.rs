//! Two distinguishable particles on a periodic 1D lattice: exact dynamics,
//! coarse-grained detection and the interferometry and Bloch-oscillation
//! experiments built on them.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the experiments use.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod hamiltonian;
pub mod lattice;
pub mod momentum;
pub mod propagator;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type State = lattice::LatticeState<f64>;
pub type Reduced = lattice::ReducedDensity<f64>;
pub type Hamiltonian = hamiltonian::HamiltonianOperator<f64>;
pub type Propagator = propagator::SpectralPropagator<f64>;
pub type Momentum = momentum::MomentumState<f64>;
pub type GaussianPair = analytic::GaussianPairParams<f64>;
