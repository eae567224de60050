//! Sensing-matrix design for compressed spherical near-field measurements.
//!
//! The crate builds sensing matrices whose columns are sampled Wigner
//! D-functions (or spherical harmonics), measures their mutual coherence,
//! optimizes the sampling angles to lower that coherence, and evaluates the
//! result with basis-pursuit recovery experiments.
//!
//! All numerical code is generic over the real scalar through [`Real`]
//! (implemented for `f32` and `f64`). The aliases at the crate root fix the
//! scalar to `f64`, which is what the experiment drivers in [`harness`] use.
//!
//! Degrees start at `n = 1`; there is no monopole column in any matrix.

pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod optim;
pub mod recovery;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod sensing;
pub mod specfun;

pub use error::{Error, Result};
pub use modes::{mode_count, mode_table, truncation_degree, Mode, ModeKind, ModeTable};
pub use scalar::Real;

/// Complex scalar used for matrix entries.
pub type C64 = num_complex::Complex<f64>;

pub type SamplingSet = sampling::SamplingSet<f64>;
pub type ChiPolicy = sampling::ChiPolicy<f64>;
pub type SensingMatrix = sensing::SensingMatrix<f64>;
pub type CoherenceReport = sensing::CoherenceReport<f64>;
pub type GdConfig = optim::GdConfig<f64>;
pub type AlmConfig = optim::AlmConfig<f64>;
pub type AlmState = optim::AlmState<f64>;
pub type OptimizerRun = optim::OptimizerRun<f64>;
pub type ChiMode = optim::ChiMode<f64>;
pub type RecoveryProblem = recovery::RecoveryProblem<f64>;
pub type RecoveryResult = recovery::RecoveryResult<f64>;
pub type BpOptions = recovery::BpOptions<f64>;
pub type BpSolver = recovery::BpSolver<f64>;
