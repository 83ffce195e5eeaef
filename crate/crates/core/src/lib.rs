//! Energy-stable open boundary conditions for skew-symmetric hyperbolic IBVPs.
//!
//! The library compares classical characteristic boundary conditions with
//! square-root characteristic conditions on 1-D scalar and system problems,
//! under both strong (injection) and weak (SBP-SAT) imposition, and audits
//! the discrete energy rate against the data bound.
//!
//! Modules:
//! - [`specmat`]: dense symmetric-matrix toolkit (eigendecomposition,
//!   sign-based spectral splitting, PSD square roots, inertia).
//! - [`bc`]: boundary operators, penalty matrices, boundary-term evaluation
//!   and admissibility certificates for the generalized R/S family.
//! - [`sbp`]: diagonal-norm summation-by-parts operators and the discrete
//!   lifting (SAT) mechanism.
//! - [`ibvp`]: scalar and system initial boundary value problems, RK4 time
//!   integration, energy traces and audits.
//! - [`cli`]: experiment configs, builtin problems and the report harness
//!   behind the `openbc` binary.

pub mod bc;
pub mod cli;
pub mod ibvp;
pub mod sbp;
pub mod specmat;

pub use bc::{BcKind, BoundaryOperatorSpec, BoundaryTermReport, Imposition};
pub use ibvp::{EnergyTrace, ScalarProblem, SystemProblem, TraceRow};
pub use sbp::{Boundary, Grid, SbpOperators};
pub use specmat::{PsdVerdict, SpectralSplit, SymMatrix};
