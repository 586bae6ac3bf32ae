use serde::Serialize;

use crate::gap1d::{growth_exponent, neumann_gap_2d, two_site_gap, Grid, SpinRow};
use crate::measures::{spin, MeasureModel, Potential1d};
use crate::sampling::SampleBatch;
use crate::stats::{variance, Estimate};
use crate::{Error, Result};

/// `c_P(μ^{n|m})` for `n ∈ {2, 3}` by the grid eigensolver in intrinsic
/// coordinates.
pub fn spin_conditional_gap(v: &Potential1d, n: usize, m: f64, resolution: usize) -> Result<f64> {
    match n {
        2 => two_site_gap(v, m, resolution),
        3 => {
            let model = spin(3, m, v.clone());
            let phi = |x: &[f64]| model.potential(x);
            let grid = Grid::auto_2d(&phi, resolution);
            Ok(1.0 / neumann_gap_2d(&phi, &grid, 1)?.lambdas[0])
        }
        _ => Err(Error::Unsupported(format!("grid spectral gap of the {n}-site conditional"))),
    }
}

/// `2·sup_m (c_P(μ^{2|m})^{−1} − α)^{−1}` over an `m` grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpinGapReport {
    pub rhs: f64,
    pub unbounded: bool,
    pub rows: Vec<SpinRow>,
    /// `(c_P(μ^{2|m})^{−1} − α)^{−1}` per row, `+∞` where the denominator is not positive.
    pub terms: Vec<f64>,
    /// Log-log slope of `c_P(μ^{2|m})` in `|m|` over the upper half of the scanned `|m|` range.
    pub growth_exponent: f64,
    pub alpha: f64,
}

fn grows_at(terms: &[f64], idx: &[usize]) -> bool {
    idx.windows(2).all(|w| terms[w[1]] > terms[w[0]] * (1.0 + 1e-4))
}

pub fn spin_gap_rhs(v: &Potential1d, alpha: f64, ms: &[f64], resolution: usize) -> Result<SpinGapReport> {
    if ms.len() < 3 {
        return Err(Error::Validation("the m grid needs at least three points".into()));
    }
    let probe = (0..=400).map(|i| -20.0 + 0.1 * i as f64);
    if let Some(t) = probe.clone().find(|t| (v.d2)(*t) < -alpha - 1e-12) {
        return Err(Error::Precondition(format!("V'' = {} < -alpha at t = {t}", (v.d2)(t))));
    }
    let rows = crate::gap1d::spin_scan(v, ms, resolution)?;
    let terms: Vec<f64> = rows
        .iter()
        .map(|r| {
            let d = 1.0 / r.cp2 - alpha;
            if d <= 0.0 {
                f64::INFINITY
            } else {
                1.0 / d
            }
        })
        .collect();
    let sup = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k = terms.len();
    let top_m = ms.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let mut unbounded = sup.is_infinite();
    for (edge, idx) in [(k - 1, vec![k - 3, k - 2, k - 1]), (0, vec![2, 1, 0])] {
        if ms[edge].abs() >= top_m - 1e-12 && terms[edge] >= sup && grows_at(&terms, &idx) {
            unbounded = true;
        }
    }
    let rhs = if unbounded { f64::INFINITY } else { 2.0 * sup };
    let m_max = rows.iter().fold(0.0f64, |a, r| a.max(r.m.abs()));
    Ok(SpinGapReport { rhs, unbounded, growth_exponent: growth_exponent(&rows, 0.5 * m_max), rows, terms, alpha })
}

/// Variances of `ℓ_i = y_i √(n/(n−1))` under a spin model, one per site.
#[derive(Debug, Clone, Serialize)]
pub struct SpinLinearReport {
    pub per_site: Vec<Estimate>,
    pub pooled: Estimate,
    /// All pairs of sites agree within `3σ`.
    pub exchangeable: bool,
    /// Grid `c_P(μ^{n|m})` when `n ≤ 3`.
    pub poincare_constant: Option<f64>,
    /// `Var(ℓ) ≤ c_P` within `3σ`, when `c_P` is available.
    pub below_poincare: Option<bool>,
}

pub fn spin_linear_variance(model: &MeasureModel, batch: &SampleBatch, resolution: usize) -> Result<SpinLinearReport> {
    let s = model.as_spin().ok_or_else(|| Error::Validation("spin_linear_variance needs a spin model".into()))?;
    let n = s.n;
    let scale = (n as f64 / (n as f64 - 1.0)).sqrt();
    let ambient: Vec<Vec<f64>> = batch.rows().map(|x| s.to_ambient(x)).collect();
    let per_site: Vec<Estimate> =
        (0..n).map(|i| variance(&ambient.iter().map(|y| scale * y[i]).collect::<Vec<_>>())).collect();
    let pooled_vals: Vec<f64> = ambient.iter().map(|y| y.iter().map(|t| (scale * (t - s.m)).powi(2)).sum::<f64>() / n as f64).collect();
    let pooled = crate::stats::mean(&pooled_vals);
    let mut exchangeable = true;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (per_site[i], per_site[j]);
            if (a.value - b.value).abs() > 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt() {
                exchangeable = false;
            }
        }
    }
    let poincare_constant = if n <= 3 { Some(spin_conditional_gap(&s.v, n, s.m, resolution)?) } else { None };
    let below_poincare = poincare_constant.map(|c| pooled.value <= c + 3.0 * pooled.std_error);
    Ok(SpinLinearReport { per_site, pooled, exchangeable, poincare_constant, below_poincare })
}
