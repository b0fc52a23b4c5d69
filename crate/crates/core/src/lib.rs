//! Transfer-matrix toolkit for one-dimensional Dirac Hamiltonians with complex
//! vector potentials, realized as piecewise-uniform distributed-feedback (DFB)
//! gratings with gain and loss.
//!
//! The Dirac representation is fixed to `alpha = sigma_z`, `beta = sigma_x`, so
//! the stationary equation `H psi = E psi` reads
//! `psi' = i sigma_z [(E - V(x)) - m(x) sigma_x] psi`. A structure occupies
//! `x in [-L/2, L/2]` and is free (`m = V = 0`) outside.
//!
//! Layout:
//! - [`structure`], [`units`], [`model`]: domain types and builders.
//! - [`transfer`], [`ode`], [`jost`]: segment/structure matrices, the RK4 oracle
//!   and Jost solutions.
//! - [`scattering`]: `t`, `r`, spectral scans and the PT check.
//! - [`zeros`], [`spectrum`]: argument-principle zero finding, classification,
//!   thresholds and trajectory tracing.
//! - [`green`]: resolvent kernel.
//! - [`cli`], [`io`]: command-line front end and file formats.

pub mod cli;
pub mod error;
pub mod green;
pub mod io;
pub mod jost;
pub mod model;
pub mod ode;
pub mod par;
pub mod scattering;
pub mod spectrum;
pub mod structure;
pub mod transfer;
pub mod units;
pub mod zeros;

pub use error::{Error, Result};
pub use model::{ComplexEnergy, Spinor2};
pub use structure::{GainSign, Segment, StructureFamily, StructureSpec};
pub use transfer::{MatrixEntry, TransferMatrix};
pub use zeros::Window;
