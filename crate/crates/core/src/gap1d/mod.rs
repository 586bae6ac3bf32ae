//! Grid eigensolvers for the weighted Laplacian in one and two dimensions,
//! the KLS bound, and spin-system quadratures.

mod anti;
mod solver;
mod spin;

pub use anti::{anti_invariant_eigenfunction_check, AntiInvariantReport};
pub use solver::{
    eigen_residual_2d, interval_gap, neumann_gap, neumann_gap_2d, slice_gap_1d, Grid, Spectrum2d, SpectrumResult,
    TAIL_TOL,
};
pub use spin::{
    growth_exponent, moment_ratio, spin_j, spin_scan, two_site_gap, two_site_potential, MomentRatio, SpinRow,
    MOMENT_RATIO_TOL, SPIN_RESOLUTION,
};

use crate::quadrature::integrate;
use crate::sampling::{moments, SampleBatch};
use crate::stats::Estimate;

/// `4·Var(ν)` for the 1D density `e^{−φ}` on `[lo, hi]`, by quadrature.
pub fn kls_bound_1d(phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64, breakpoints: &[f64]) -> f64 {
    let p0 = phi(0.5 * (lo + hi));
    let w = |t: f64| (-(phi(t) - p0)).exp();
    let z = integrate(w, lo, hi, breakpoints, 0.0, 1e-13).value;
    let m1 = integrate(|t| t * w(t), lo, hi, breakpoints, 0.0, 1e-13).value / z;
    let var = integrate(|t| (t - m1).powi(2) * w(t), lo, hi, breakpoints, 0.0, 1e-13).value / z;
    4.0 * var
}

/// `4·∑_i Var(X_i)` estimated from a batch.
pub fn kls_bound_batch(batch: &SampleBatch) -> Estimate {
    let rep = moments(batch, &[]);
    let value: f64 = (0..batch.dim).map(|i| rep.covariance[(i, i)]).sum();
    let se = (0..batch.dim).map(|i| rep.covariance_se[(i, i)].powi(2)).sum::<f64>().sqrt();
    Estimate { value: 4.0 * value, std_error: 4.0 * se }
}
