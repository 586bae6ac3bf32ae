use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::gap1d::{interval_gap, kls_bound_1d, slice_gap_1d};
use crate::linalg::min_eigenvalue;
use crate::measures::{condition, mass_interval, slice_rule, MeasureModel, ModelKind};
use crate::sampling::SampleBatch;
use crate::stats::{mean, Estimate};
use crate::symmetry::{IdentityDecomposition, Subspace};
use crate::{Error, Result};

/// Where slice Poincaré constants come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SliceGapSource {
    /// Grid eigensolver on one-dimensional slices, KLS otherwise.
    #[default]
    Auto,
    /// Grid eigensolver only; slices of dimension ≥ 2 are unsupported.
    Grid,
    /// The KLS bound `4·Var` everywhere.
    Kls,
}

/// Slice Poincaré constants `c_P(μ_{x,E_i})` for a fixed list of subspaces.
pub struct SliceGaps<'a> {
    model: &'a MeasureModel,
    subspaces: Vec<Subspace>,
    source: SliceGapSource,
    resolution: usize,
    /// Values of slice gaps that do not depend on the anchor.
    fixed: Vec<Option<f64>>,
}

fn is_axis(e: &Subspace) -> bool {
    e.dim() == 1 && e.basis().iter().filter(|v| v.abs() > 1e-12).count() == 1
}

impl<'a> SliceGaps<'a> {
    pub fn new(model: &'a MeasureModel, subspaces: Vec<Subspace>, source: SliceGapSource, resolution: usize) -> Result<Self> {
        let mut s = Self { model, subspaces, source, resolution, fixed: Vec::new() };
        let zero = vec![0.0; model.dim()];
        let mut fixed = Vec::with_capacity(s.subspaces.len());
        for e in &s.subspaces {
            let constant = match &model.kind {
                ModelKind::Smooth(p) if p.name.starts_with("gaussian:") => {
                    Some(if source == SliceGapSource::Kls { 4.0 * e.dim() as f64 } else { 1.0 })
                }
                ModelKind::Product(_) if is_axis(e) => Some(s.compute(&zero, e)?),
                _ => None,
            };
            fixed.push(constant);
        }
        s.fixed = fixed;
        Ok(s)
    }

    pub fn for_decomposition(
        model: &'a MeasureModel,
        dec: &IdentityDecomposition,
        source: SliceGapSource,
        resolution: usize,
    ) -> Result<Self> {
        Self::new(model, dec.terms.iter().map(|t| t.subspace.clone()).collect(), source, resolution)
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    /// `c_P` of the slice through `x` along subspace `i`.
    pub fn gap(&self, x: &[f64], i: usize) -> Result<f64> {
        match self.fixed[i] {
            Some(v) => Ok(v),
            None => self.compute(x, &self.subspaces[i]),
        }
    }

    pub fn gaps(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.subspaces.len()).map(|i| self.gap(x, i)).collect()
    }

    fn compute(&self, x: &[f64], e: &Subspace) -> Result<f64> {
        let c = condition(self.model, x, e)?;
        let kls = match (self.source, e.dim()) {
            (SliceGapSource::Kls, _) => true,
            (_, 1) => false,
            (SliceGapSource::Auto, _) => true,
            (SliceGapSource::Grid, k) => return Err(Error::Unsupported(format!("grid slice gaps on {k}-dimensional slices"))),
        };
        if e.dim() == 1 {
            let phi = |t: f64| c.potential_1d(t);
            if self.model.is_body() {
                let (a, b) = c.chord().ok_or(Error::EmptySlice)?;
                return Ok(if kls { (b - a).powi(2) / 3.0 } else { interval_gap(a, b) });
            }
            if kls {
                let (a, b) = mass_interval(&phi);
                return Ok(kls_bound_1d(&phi, a, b, &[]));
            }
            return slice_gap_1d(&phi, self.resolution);
        }
        let rule = slice_rule(&c, 96)?;
        let k = e.dim();
        let m: Vec<f64> = (0..k).map(|j| rule.expect(|t| t[j])).collect();
        let var: f64 = (0..k).map(|j| rule.expect(|t| (t[j] - m[j]).powi(2))).sum();
        Ok(4.0 * var)
    }
}

/// Evenly strided rows of a batch, at most `max` of them.
pub fn subsample(batch: &SampleBatch, max: usize) -> Vec<&[f64]> {
    let n = batch.len();
    let stride = n.div_ceil(max.max(1)).max(1);
    (0..n).step_by(stride).map(|i| batch.row(i)).collect()
}

/// Mean of a fallible per-point integrand, evaluated in parallel.
pub fn mc_mean(points: &[&[f64]], f: impl Fn(&[f64]) -> Result<f64> + Sync + Send) -> Result<Estimate> {
    let vals: Vec<f64> = points.par_iter().map(|x| f(x)).collect::<Result<Vec<f64>>>()?;
    Ok(mean(&vals))
}

/// `x ↦ H(x) = D²Φ(x) + ∑ c_i c_P(μ_{x,E_i})^{−1} P_{E_i}`.
pub struct HField<'a> {
    pub model: &'a MeasureModel,
    pub coefficients: Vec<f64>,
    pub gaps: SliceGaps<'a>,
}

impl<'a> HField<'a> {
    pub fn new(model: &'a MeasureModel, dec: &IdentityDecomposition, source: SliceGapSource, resolution: usize) -> Result<Self> {
        Ok(Self {
            model,
            coefficients: dec.coefficients(),
            gaps: SliceGaps::for_decomposition(model, dec, source, resolution)?,
        })
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.model.dim();
        self.model.hessian(x).unwrap_or_else(|| DMatrix::zeros(n, n))
    }

    /// `H(x)` together with the slice gaps used to build it.
    pub fn at(&self, x: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let gaps = self.gaps.gaps(x)?;
        let mut h = self.hessian(x);
        for ((c, g), e) in self.coefficients.iter().zip(&gaps).zip(self.gaps.subspaces()) {
            h += e.projector() * (c / g);
        }
        Ok((crate::linalg::symmetrize(&h), gaps))
    }

    /// Smallest eigenvalue of `H` over the points.
    pub fn certificate(&self, points: &[&[f64]]) -> Result<f64> {
        let mins: Vec<f64> =
            points.par_iter().map(|x| self.at(x).map(|(h, _)| min_eigenvalue(&h))).collect::<Result<Vec<f64>>>()?;
        Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// `H(x)^{−1} v · v`, failing with the point when `H(x)` is not positive.
    pub fn inverse_form(&self, x: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (h, gaps) = self.at(x)?;
        let min = min_eigenvalue(&h);
        if min <= 0.0 {
            return Err(Error::Positivity { point: x.to_vec(), min_eigenvalue: min });
        }
        Ok((inverse_quadratic_form(&h, v), gaps))
    }
}

/// `A^{−1} v · v` for a positive definite `A`.
pub fn inverse_quadratic_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let vv = nalgebra::DVector::from_column_slice(v);
    match a.clone().cholesky() {
        Some(ch) => ch.solve(&vv).dot(&vv),
        None => f64::INFINITY,
    }
}

/// `|P_E v|²`.
pub fn projected_sq(e: &Subspace, v: &[f64]) -> f64 {
    e.coords(v).iter().map(|t| t * t).sum()
}
