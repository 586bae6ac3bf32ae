//! Symmetry-aware variance and Poincaré inequality verification for
//! log-concave measures.
//!
//! The crate is organised as six layers:
//!
//! * [`symmetry`]: finite isometry groups, fixed subspaces, decompositions
//!   of the identity and Cayley-graph spectral gaps.
//! * [`measures`]: measure models, conditioning on affine slices and
//!   symmetrization of test functions.
//! * [`sampling`]: hit-and-run and direct samplers with moment estimates.
//! * [`gap1d`]: grid eigensolvers for the weighted Laplacian in one and two
//!   dimensions, and spin-system quadratures.
//! * [`bounds`]: right-hand sides of the variance inequalities, compared
//!   against Monte Carlo left-hand sides.
//! * [`verify`]: scenario files, built-in experiments and reports.

pub mod bounds;
pub mod error;
pub mod gap1d;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod sampling;
pub mod stats;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
