//! Numerics for the complementary-quantum correlation (CQC) relation between
//! classical and quantum mutual information of bipartite states.
//!
//! Modules, bottom up:
//!
//! - [`linalg`]: dense complex matrices, partial traces, Hermitian
//!   eigendecomposition.
//! - [`states`]: density matrices, named state families, Haar sampling.
//! - [`measurement`]: projective bases, unbiasedness, joint outcome tables.
//! - [`information`]: Shannon and von Neumann entropies, mutual informations.
//! - [`bounds`]: the CQC gap and every bound derived from it.
//! - [`harness`]: deterministic parallel Monte Carlo experiments.
//! - [`io`]: JSON state files and counterexample dumps.
//!
//! Random mixed states are sampled as `V diag(λ) V†` with `λ` uniform on the
//! simplex and `V` Haar, not from the Hilbert-Schmidt measure.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod information;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod states;

pub use bounds::{evaluate, BasisQuadruple, CqcReport};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Subsystem};
pub use measurement::{JointDistribution, ProjectiveBasis};
pub use num_complex::Complex64;
pub use states::DensityMatrix;
