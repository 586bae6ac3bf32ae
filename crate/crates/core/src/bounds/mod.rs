//! Right-hand sides of the variance and Poincaré inequalities, evaluated by
//! Monte Carlo and quadrature, with `3σ` verdicts against the left-hand
//! sides.

mod functional;
mod matrix;
mod norm;
mod report;
mod slices;
mod spin;

pub use functional::{
    brascamp_lieb, helffer, helffer_matrix, invariance1, invariance2, vargeneral, zero_mean_defect, GeneralReport,
    InvarianceReport, INVARIANCE_TOL, ZERO_MEAN_TOL,
};
pub use matrix::{h_inversion_gap, hs_projection_gap};
pub use norm::{
    common_fix, cube_fix_section_check, isotropy_constant, norm_variance, poincsym, var_split, varnorm, IsotropyReport,
    PoincSym, VarNormReport, VOLUME_SAMPLES,
};
pub use report::{BoundReport, Constants, Verdict, VERDICT_SIGMAS};
pub use slices::{inverse_quadratic_form, mc_mean, projected_sq, subsample, HField, SliceGapSource, SliceGaps};
pub use spin::{spin_conditional_gap, spin_gap_rhs, spin_linear_variance, SpinGapReport, SpinLinearReport};
