use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::report::{BoundReport, Constants};
use super::slices::{inverse_quadratic_form, mc_mean, projected_sq, subsample, HField, SliceGapSource, SliceGaps};
use crate::linalg::min_eigenvalue;
use crate::measures::{condition, slice_rule, symmetrize, MeasureModel, TestFunction};
use crate::sampling::{estimate_variance, SampleBatch};
use crate::stats::{mean, Estimate};
use crate::symmetry::{cayley_spectral_gap, kappa, FiniteGroup, GeneratorSet, IdentityDecomposition, Subspace};
use crate::{Error, Result};

/// Tolerance on the invariance of a test function.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Tolerance on the zero-mean condition for slices.
pub const ZERO_MEAN_TOL: f64 = 1e-6;

fn combine(a: Estimate, b: Estimate) -> Estimate {
    Estimate { value: a.value + b.value, std_error: (a.std_error.powi(2) + b.std_error.powi(2)).sqrt() }
}

fn check_dims(model: &MeasureModel, f: &TestFunction, batch: &SampleBatch) -> Result<()> {
    if f.dim != model.dim() || batch.dim != model.dim() {
        return Err(Error::Validation(format!(
            "dimensions disagree: model {}, function {}, batch {}",
            model.dim(),
            f.dim,
            batch.dim
        )));
    }
    Ok(())
}

fn require_invariant(f: &TestFunction, group: &FiniteGroup, model: &MeasureModel) -> Result<()> {
    let d = f.invariance_defect(group, 256, model.reference_box(), 17);
    if d > INVARIANCE_TOL {
        return Err(Error::Precondition(format!("test function '{}' is not invariant (defect {d:e})", f.name)));
    }
    Ok(())
}

/// `Var(f) ≤ ∫ (D²Φ)^{−1}∇f·∇f dμ`.
pub fn brascamp_lieb(model: &MeasureModel, f: &TestFunction, batch: &SampleBatch) -> Result<BoundReport> {
    check_dims(model, f, batch)?;
    if model.is_body() {
        return Err(Error::Unsupported("Brascamp-Lieb needs a density with a Hessian".into()));
    }
    let pts: Vec<&[f64]> = batch.rows().collect();
    let rhs = mc_mean(&pts, |x| {
        let h = model.hessian(x).expect("density models have a Hessian");
        let min = min_eigenvalue(&h);
        if min <= 1e-10 {
            return Err(Error::Positivity { point: x.to_vec(), min_eigenvalue: min });
        }
        Ok(inverse_quadratic_form(&h, &f.grad(x)))
    })?;
    Ok(BoundReport::compare("brascamp_lieb", estimate_variance(f, batch), rhs).with_config("function", &f.name))
}

/// Coordinate-slice matrix `K(x)` with `K_ii = c_P(μ_{x,ℝe_i})^{−1}`,
/// `K_ij = ∂²_{ij}Φ(x)`.
pub fn helffer_matrix(model: &MeasureModel, gaps: &SliceGaps, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = model.dim();
    let h = model.hessian(x).unwrap_or_else(|| DMatrix::zeros(n, n));
    let g = gaps.gaps(x)?;
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / g[i] } else { h[(i, j)] }))
}

/// `Var(f) ≤ ∫ K^{−1}∇f·∇f dμ`.
pub fn helffer(
    model: &MeasureModel,
    f: &TestFunction,
    batch: &SampleBatch,
    source: SliceGapSource,
    constants: &Constants,
) -> Result<BoundReport> {
    check_dims(model, f, batch)?;
    let n = model.dim();
    let axes: Vec<Subspace> = (0..n).map(|i| Subspace::coordinates(n, &[i])).collect();
    let gaps = SliceGaps::new(model, axes, source, constants.slice_resolution)?;
    let pts = subsample(batch, constants.slice_samples);
    let rhs = mc_mean(&pts, |x| {
        let k = helffer_matrix(model, &gaps, x)?;
        let min = min_eigenvalue(&k);
        if min <= 0.0 {
            return Err(Error::Positivity { point: x.to_vec(), min_eigenvalue: min });
        }
        Ok(inverse_quadratic_form(&k, &f.grad(x)))
    })?;
    Ok(BoundReport::compare("helffer", estimate_variance(f, batch), rhs)
        .with_config("function", &f.name)
        .with_config("slice_points", pts.len()))
}

/// Reports for the invariant-function bound: the `H^{−1}` form and the
/// relaxed form with convexity floor `ρ`.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub full: BoundReport,
    pub relaxed: BoundReport,
    /// Smallest eigenvalue of `H` over the evaluated points.
    pub h_certificate: f64,
    pub rho: f64,
}

/// `Var(f) ≤ ∫ H^{−1}∇f·∇f dμ` for `f` invariant under `group`, and the
/// relaxed `∑ c_i (c_P(μ_{x,E_i})^{−1} + ρ)^{−1} |P_{E_i}∇f|²`.
#[allow(clippy::too_many_arguments)]
pub fn invariance1(
    model: &MeasureModel,
    dec: &IdentityDecomposition,
    group: &FiniteGroup,
    f: &TestFunction,
    batch: &SampleBatch,
    rho: Option<f64>,
    source: SliceGapSource,
    constants: &Constants,
) -> Result<InvarianceReport> {
    check_dims(model, f, batch)?;
    require_invariant(f, group, model)?;
    let rho = rho.unwrap_or_else(|| model.convexity_floor().unwrap_or(0.0));
    let field = HField::new(model, dec, source, constants.slice_resolution)?;
    let pts = subsample(batch, constants.slice_samples);
    let h_certificate = field.certificate(&pts)?;
    if h_certificate <= 0.0 {
        return Err(Error::Positivity { point: Vec::new(), min_eigenvalue: h_certificate });
    }
    let lhs = estimate_variance(f, batch);
    let full = mc_mean(&pts, |x| Ok(field.inverse_form(x, &f.grad(x))?.0))?;
    let relaxed = mc_mean(&pts, |x| relaxed_term(&field.gaps, &field.coefficients, x, &f.grad(x), rho))?;
    Ok(InvarianceReport {
        full: BoundReport::compare("invariance1", lhs, full).with_config("function", &f.name),
        relaxed: BoundReport::compare("invariance1_relaxed", lhs, relaxed)
            .with_config("function", &f.name)
            .with_config("rho", rho),
        h_certificate,
        rho,
    })
}

/// `∑ c_i (c_P(μ_{x,E_i})^{−1} + ρ)^{−1} |P_{E_i} v|²`.
fn relaxed_term(gaps: &SliceGaps, coefficients: &[f64], x: &[f64], v: &[f64], rho: f64) -> Result<f64> {
    let mut s = 0.0;
    for (i, (c, e)) in coefficients.iter().zip(gaps.subspaces()).enumerate() {
        let g = gaps.gap(x, i)?;
        let d = 1.0 / g + rho;
        if d <= 0.0 {
            return Err(Error::Positivity { point: x.to_vec(), min_eigenvalue: d });
        }
        s += c / d * projected_sq(e, v);
    }
    Ok(s)
}

/// Largest `|∫ P_{E_i}∇f dμ_{x,E_i}|` over the anchors and subspaces.
/// Slices of dimension ≤ 2 use quadrature; a subspace equal to the whole
/// space uses the batch mean, minus three standard errors.
pub fn zero_mean_defect(
    model: &MeasureModel,
    subspaces: &[Subspace],
    f: &TestFunction,
    batch: &SampleBatch,
    anchors: usize,
) -> Result<f64> {
    let n = model.dim();
    let mut worst: f64 = 0.0;
    let pts = subsample(batch, anchors);
    for e in subspaces {
        if e.dim() == n && n > 2 {
            let g = batch.rows().map(|x| f.grad(x)).collect::<Vec<_>>();
            for k in 0..n {
                let col: Vec<f64> = g.iter().map(|v| v[k]).collect();
                let m = mean(&col);
                worst = worst.max(m.value.abs() - 3.0 * m.std_error);
            }
            continue;
        }
        for x in &pts {
            let c = condition(model, x, e)?;
            let rule = slice_rule(&c, 96)?;
            let mut acc = vec![0.0; e.dim()];
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let p = e.coords(&f.grad(&c.point(t)));
                for (a, b) in acc.iter_mut().zip(p) {
                    *a += w * b;
                }
            }
            worst = worst.max(acc.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    Ok(worst)
}

/// The invariance-free bound: `Var(f) ≤ ∫ ∑ c_i (c_P^{−1} + ρ)^{−1}
/// |P_{E_i}∇f|² dμ` when every slice satisfies the zero-mean condition.
#[allow(clippy::too_many_arguments)]
pub fn invariance2(
    model: &MeasureModel,
    dec: &IdentityDecomposition,
    f: &TestFunction,
    batch: &SampleBatch,
    rho: f64,
    anchors: usize,
    source: SliceGapSource,
    constants: &Constants,
) -> Result<BoundReport> {
    check_dims(model, f, batch)?;
    let floor = model.convexity_floor().unwrap_or(0.0);
    if rho > floor + 1e-12 {
        return Err(Error::Precondition(format!("rho {rho} exceeds the convexity floor {floor}")));
    }
    let subspaces: Vec<Subspace> = dec.terms.iter().map(|t| t.subspace.clone()).collect();
    let defect = zero_mean_defect(model, &subspaces, f, batch, anchors)?;
    if defect > ZERO_MEAN_TOL {
        return Ok(BoundReport::precondition_violated("invariance2", &format!("zero-mean defect {defect:e}"))
            .with_config("function", &f.name));
    }
    let gaps = SliceGaps::for_decomposition(model, dec, source, constants.slice_resolution)?;
    let coefficients = dec.coefficients();
    let pts = subsample(batch, constants.slice_samples);
    let rhs = mc_mean(&pts, |x| relaxed_term(&gaps, &coefficients, x, &f.grad(x), rho))?;
    Ok(BoundReport::compare("invariance2", estimate_variance(f, batch), rhs)
        .with_config("function", &f.name)
        .with_config("rho", rho)
        .with_config("zero_mean_defect", format!("{defect:e}")))
}

/// The three forms of the bound for general (non-invariant) functions.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralReport {
    /// `∫ (H^{−1} + 4∑ d_i c_P P_{E_i}) ∇f·∇f`.
    pub main: BoundReport,
    /// `(1+4κ) ∫ ∑ c_i (c_P^{−1} − α)^{−1} |P_{E_i}∇f|²`.
    pub kappa_form: BoundReport,
    /// `Var(f) ≤ Var(F) + 4 ∑ d_i ∫ c_P |P_{E_i}∇f|²` with `F` the group average.
    pub averaging: BoundReport,
    pub kappa: f64,
    pub group_constant: f64,
    pub alpha: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn vargeneral(
    model: &MeasureModel,
    dec: &IdentityDecomposition,
    group: &Arc<FiniteGroup>,
    gens: &GeneratorSet,
    f: &TestFunction,
    batch: &SampleBatch,
    alpha: f64,
    source: SliceGapSource,
    constants: &Constants,
) -> Result<GeneralReport> {
    check_dims(model, f, batch)?;
    if alpha < 0.0 {
        return Err(Error::Validation("alpha must be nonnegative".into()));
    }
    let gap = cayley_spectral_gap(group, gens)?;
    let d = gap.constant;
    let weighted = gens.clone().with_uniform_weight(d);
    let k = kappa(dec, &weighted)?;
    let field = HField::new(model, dec, source, constants.slice_resolution)?;
    let pts = subsample(batch, constants.slice_samples);
    // Regime checks on the evaluation points.
    for x in &pts {
        if let Some(h) = model.hessian(x) {
            let min = min_eigenvalue(&h);
            if min < -alpha - 1e-9 {
                return Err(Error::Precondition(format!("D^2 Phi has eigenvalue {min} below -alpha at {x:?}")));
            }
        }
    }
    let terms = |x: &[f64]| -> Result<(f64, f64, f64)> {
        let v = f.grad(x);
        let (hinv, gaps) = field.inverse_form(x, &v)?;
        let mut slice_term = 0.0;
        let mut relaxed = 0.0;
        for ((c, g), e) in field.coefficients.iter().zip(&gaps).zip(field.gaps.subspaces()) {
            if alpha > 0.0 && *g >= 1.0 / alpha {
                return Err(Error::Precondition(format!("slice gap {g} is not below 1/alpha at {x:?}")));
            }
            let p = projected_sq(e, &v);
            slice_term += g * p;
            relaxed += c / (1.0 / g - alpha) * p;
        }
        Ok((hinv, slice_term, relaxed))
    };
    let vals: Vec<(f64, f64, f64)> = {
        use rayon::prelude::*;
        pts.par_iter().map(|x| terms(x)).collect::<Result<Vec<_>>>()?
    };
    let main = mean(&vals.iter().map(|t| t.0 + 4.0 * d * t.1).collect::<Vec<_>>());
    let slice = mean(&vals.iter().map(|t| 4.0 * d * t.1).collect::<Vec<_>>());
    let relaxed = mean(&vals.iter().map(|t| t.2).collect::<Vec<_>>());
    let factor = 1.0 + 4.0 * k;
    let kappa_rhs = Estimate { value: factor * relaxed.value, std_error: factor * relaxed.std_error };
    let lhs = estimate_variance(f, batch);
    let f_bar = symmetrize(f, group);
    let var_bar = estimate_variance(&f_bar, batch);
    Ok(GeneralReport {
        main: BoundReport::compare("vargeneral", lhs, main).with_config("function", &f.name),
        kappa_form: BoundReport::compare("vargeneral_kappa", lhs, kappa_rhs)
            .with_config("function", &f.name)
            .with_config("kappa", k),
        averaging: BoundReport::compare("group_averaging", lhs, combine(var_bar, slice))
            .with_config("function", &f.name)
            .with_config("var_symmetrized", var_bar.value),
        kappa: k,
        group_constant: d,
        alpha,
    })
}
