use rayon::prelude::*;
use serde::Serialize;

use super::solver::{neumann_gap, Grid};
use crate::measures::Potential1d;
use crate::quadrature::{integrate_to_infinity, TailResult};
use crate::stats::log_log_slope;
use crate::Result;

/// Tolerance on the moment-ratio endpoints.
pub const MOMENT_RATIO_TOL: f64 = 1e-6;

/// `J(m) = ∫₀^∞ exp(−[V(m+t) + V(m−t) − 2V(m)]) dt`, using the exact
/// (unsmoothed) potential when one is available.
pub fn spin_j(v: &Potential1d, m: f64) -> TailResult {
    let v0 = v.v_exact(m);
    let f = |t: f64| (-(v.v_exact(m + t) + v.v_exact(m - t) - 2.0 * v0)).exp();
    let bps: Vec<f64> = v.breakpoints.iter().map(|b| (b - m).abs()).filter(|t| *t > 0.0).collect();
    integrate_to_infinity(f, 0.0, &bps, 1e-14, 2.0 * m.abs() + 1.0)
}

/// Potential of the two-site conditional `μ^{2|m}` in its intrinsic
/// coordinate: `t ↦ V(m + t/√2) + V(m − t/√2)`.
pub fn two_site_potential(v: &Potential1d, m: f64) -> impl Fn(f64) -> f64 + '_ {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    move |t| v.v(m + s * t) + v.v(m - s * t)
}

/// Default resolution for spin-system scans.
pub const SPIN_RESOLUTION: usize = 4096;

/// `c_P(μ^{2|m})` by the grid eigensolver.
pub fn two_site_gap(v: &Potential1d, m: f64, resolution: usize) -> Result<f64> {
    let phi = two_site_potential(v, m);
    let grid = Grid::auto_1d(&phi, resolution);
    Ok(neumann_gap(&phi, &grid)?.poincare_constant)
}

/// One row of an `m`-scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinRow {
    pub m: f64,
    pub j: f64,
    pub j2: f64,
    pub cp2: f64,
}

/// `J(m)`, `J(m)²` and `c_P(μ^{2|m})` over a grid of `m` values, computed in
/// parallel and returned in input order.
pub fn spin_scan(v: &Potential1d, ms: &[f64], resolution: usize) -> Result<Vec<SpinRow>> {
    ms.par_iter()
        .map(|&m| {
            let j = spin_j(v, m).value;
            Ok(SpinRow { m, j, j2: j * j, cp2: two_site_gap(v, m, resolution)? })
        })
        .collect()
}

/// Least-squares growth exponent of `c_P(μ^{2|m})` in `|m|` over the rows with
/// `|m| ≥ m_min`.
pub fn growth_exponent(rows: &[SpinRow], m_min: f64) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.m.abs() >= m_min).map(|r| (r.m.abs(), r.cp2)).unzip();
    log_log_slope(&xs, &ys)
}

/// `f(0)² ∫₀^∞ t² f / (∫₀^∞ f)³` for an even density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRatio {
    pub value: f64,
    /// False when the value leaves `[1/3, 2]` by more than the tolerance,
    /// flagging a density that is not log-concave.
    pub log_concave_consistent: bool,
}

pub fn moment_ratio(f: &dyn Fn(f64) -> f64, breakpoints: &[f64]) -> MomentRatio {
    let z = integrate_to_infinity(f, 0.0, breakpoints, 1e-300, 1.0);
    let m2 = integrate_to_infinity(|t| t * t * f(t), 0.0, breakpoints, 1e-300, 1.0);
    let f0 = f(0.0);
    let value = f0 * f0 * m2.value / z.value.powi(3);
    let ok = (1.0 / 3.0 - MOMENT_RATIO_TOL..=2.0 + MOMENT_RATIO_TOL).contains(&value);
    MomentRatio { value, log_concave_consistent: ok }
}
