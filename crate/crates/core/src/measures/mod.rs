//! Measure models, conditioning on affine slices, invariance checks and
//! test functions.

mod checks;
mod condition;
mod function;
mod model;
mod potential;

pub use checks::{centered_conditional_check, check_invariance, slice_rule, CenteredReport, SliceRule, EDGE_DENSITY_TOL};
pub use condition::{condition, mass_interval, mass_interval_with, ConditionedMeasure};
pub use function::{symmetrize, TestFunction};
pub use model::{
    builtin_model, cube, lp_ball, schatten_ball, simplex_barycentric, simplex_body, singular_values, spin, Body,
    BodyShape, MeasureModel, Membership, ModelKind, SpinModel, MODEL_CATALOG,
};
pub use potential::{
    Fn1, MatrixFn, Potential1d, PotentialCheck, ScalarFn, SmoothPotential, VectorFn, CORNER_SMOOTHING,
    POTENTIAL_CATALOG,
};
