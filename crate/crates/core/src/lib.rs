//! Finite quantum lattice systems with bounded on-site Hamiltonians and
//! decaying interactions: exact dynamics, Dyson-series propagators and
//! numerical certification of Lieb-Robinson and finite-volume convergence
//! bounds.
//!
//! Modules, bottom up:
//! - [`geometry`]: lattices, site sets, decay functions `F`, `‖F‖` and `C`.
//! - [`observables`]: site models, local operators, tensor embeddings.
//! - [`interactions`]: interactions `Φ`, `‖Φ‖`, surface sets, `D(X,Y)`.
//! - [`propagator`]: Dyson solvers and the sourced Heisenberg equation.
//! - [`dynamics`]: volume Hamiltonians and exact dynamics.
//! - [`bounds`]: analytic bounds and certification.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod interactions;
pub mod linalg;
pub mod observables;
pub mod propagator;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use bounds::{certify, lr_bound, BoundContext, BoundMetadata, BoundReport, ThermoBound};
pub use dynamics::{symmetric_grid, volume_difference_profile, Profile, Spectrum, VolumeSystem};
pub use error::{LrError, Result};
pub use geometry::{convolution_constant, f_norm, DecayConstants, DecayFunction, Lattice, SiteId, SiteSet};
pub use interactions::{supports_overlap, DistanceFactor, Interaction};
pub use linalg::{c64, CMat};
pub use observables::{commutator, embed, operator_norm, truncate_oscillator, LocalOperator, SiteModel, SiteSpace};
pub use propagator::{
    dyson_inverse, dyson_solve, heisenberg_source_solve, unitary_propagator, GeneratorFamily, GeneratorKind, Propagator,
};
