//! Finite isometry groups, fixed subspaces, decompositions of the identity
//! and Cayley-graph spectral gaps.

mod builtins;
mod cayley;
mod decomposition;
mod group;
mod isometry;

pub use builtins::{
    builtin_generators, builtin_group, dihedral_reflections, dihedral_rotations, schatten_row_generators,
    simplex_basis, simplex_generators, simplex_vertices, transposition_generators, unconditional_generators,
    BuiltinGroup, GROUP_CATALOG,
};
pub use cayley::{cayley_spectral_gap, cayley_spectral_gap_dense, kappa, CayleyGap, CayleyGraph};
pub use decomposition::{
    exchangeable_decomposition, identity_decomposition, DecompositionSummary, DecompositionTerm,
    IdentityDecomposition, DECOMPOSITION_TOL,
};
pub use group::{conjugacy_classes, conjugacy_close, enumerate_group, FiniteGroup, GeneratorSet, DEFAULT_MAX_ORDER};
pub use isometry::{fix_subspace, moving_subspace, Isometry, IsometryKind, Subspace, MATRIX_TOL};
