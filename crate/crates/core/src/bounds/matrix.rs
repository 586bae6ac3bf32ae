use nalgebra::DMatrix;

use super::slices::inverse_quadratic_form;
use crate::symmetry::IdentityDecomposition;

fn hs_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// `‖H‖²_HS − ∑ c_i ‖P_{E_i} H P_{E_i}‖²_HS`, nonnegative for symmetric `H`.
pub fn hs_projection_gap(h: &DMatrix<f64>, dec: &IdentityDecomposition) -> f64 {
    let s: f64 = dec
        .terms
        .iter()
        .map(|t| {
            let p = t.subspace.projector();
            t.coefficient * hs_sq(&(p * h * p))
        })
        .sum();
    hs_sq(h) - s
}

/// `∑ (c_i/α_i)|P_{E_i} v|² − H^{−1}v·v`, nonnegative when
/// `H ≥ ∑ c_i α_i P_{E_i}` and the decomposition covers the whole space.
pub fn h_inversion_gap(h: &DMatrix<f64>, dec: &IdentityDecomposition, alphas: &[f64], v: &[f64]) -> f64 {
    let s: f64 = dec
        .terms
        .iter()
        .zip(alphas)
        .map(|(t, a)| t.coefficient / a * t.subspace.coords(v).iter().map(|x| x * x).sum::<f64>())
        .sum();
    s - inverse_quadratic_form(h, v)
}
