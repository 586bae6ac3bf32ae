use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::SampleBatch;
use crate::linalg::inverse_sqrt;
use crate::measures::{MeasureModel, TestFunction};
use crate::stats::{jackknife, variance, Estimate, JACKKNIFE_BLOCKS};
use crate::symmetry::Subspace;
use crate::{Error, Result};

/// Mean, covariance and projected moments of a batch.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub mean: Vec<Estimate>,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    #[serde(skip)]
    pub covariance_se: DMatrix<f64>,
    /// `(E|P_E X|², E|P_E X|⁴)` for each named subspace.
    pub proj_moments: BTreeMap<String, (Estimate, Estimate)>,
}

/// Mean and unbiased covariance with block-jackknife standard errors, and
/// moments of the projections onto `subspaces`.
pub fn moments(batch: &SampleBatch, subspaces: &[(String, Subspace)]) -> MomentReport {
    let n = batch.len();
    let d = batch.dim;
    let blocks = JACKKNIFE_BLOCKS.min(n).max(1);
    let shift: Vec<f64> = batch.row(0).to_vec();
    let mut s1 = vec![vec![0.0; d]; blocks];
    let mut s2 = vec![DMatrix::<f64>::zeros(d, d); blocks];
    let mut counts = vec![0usize; blocks];
    for (i, r) in batch.rows().enumerate() {
        let b = i * blocks / n;
        counts[b] += 1;
        let y: Vec<f64> = r.iter().zip(&shift).map(|(a, s)| a - s).collect();
        for p in 0..d {
            s1[b][p] += y[p];
            for q in p..d {
                s2[b][(p, q)] += y[p] * y[q];
            }
        }
    }
    let cov_of = |t1: &[f64], t2: &DMatrix<f64>, m: usize| {
        let mf = m as f64;
        DMatrix::from_fn(d, d, |p, q| {
            let (a, b) = if p <= q { (p, q) } else { (q, p) };
            (t2[(a, b)] / mf - t1[a] * t1[b] / (mf * mf)) * mf / (mf - 1.0)
        })
    };
    let t1: Vec<f64> = (0..d).map(|p| s1.iter().map(|s| s[p]).sum()).collect();
    let t2: DMatrix<f64> = s2.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
    let covariance = cov_of(&t1, &t2, n);
    let mut covariance_se = DMatrix::from_element(d, d, f64::INFINITY);
    if blocks >= 2 {
        let loo: Vec<DMatrix<f64>> = (0..blocks)
            .map(|b| {
                let u1: Vec<f64> = (0..d).map(|p| t1[p] - s1[b][p]).collect();
                cov_of(&u1, &(&t2 - &s2[b]), n - counts[b])
            })
            .collect();
        let bar = loo.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / blocks as f64;
        let ss = loo.iter().fold(DMatrix::<f64>::zeros(d, d), |acc, m| acc + (m - &bar).map(|v| v * v));
        covariance_se = ss.map(|v| ((blocks as f64 - 1.0) / blocks as f64 * v).sqrt());
    }
    let mean: Vec<Estimate> = (0..d)
        .map(|p| {
            let col: Vec<f64> = batch.rows().map(|r| r[p]).collect();
            crate::stats::mean(&col)
        })
        .collect();
    let mut proj_moments = BTreeMap::new();
    for (name, e) in subspaces {
        let sq = batch.map(|x| e.coords(x).iter().map(|v| v * v).sum());
        let q4: Vec<f64> = sq.iter().map(|v| v * v).collect();
        proj_moments.insert(name.clone(), (crate::stats::mean(&sq), crate::stats::mean(&q4)));
    }
    MomentReport { mean, covariance, covariance_se, proj_moments }
}

/// Affine map `x ↦ T (x − center)`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub matrix: DMatrix<f64>,
    pub center: Vec<f64>,
}

impl Affine {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.center.len();
        (0..d).map(|i| (0..d).map(|j| self.matrix[(i, j)] * (x[j] - self.center[j])).sum()).collect()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }
}

/// Estimates the map `T = Σ^{−1/2}` that puts the batch in isotropic
/// position and returns it with the recentred, transformed batch.
pub fn isotropize(model: &MeasureModel, batch: &SampleBatch) -> Result<(Affine, SampleBatch)> {
    if model.dim() != batch.dim {
        return Err(Error::Validation(format!("batch has dimension {}, model {}", batch.dim, model.dim())));
    }
    let rep = moments(batch, &[]);
    let (t, min) = inverse_sqrt(&rep.covariance);
    if min <= 1e-8 {
        return Err(Error::RankDeficient { min_eigenvalue: min });
    }
    let map = Affine { matrix: t, center: rep.mean.iter().map(|e| e.value).collect() };
    let mut points = Vec::with_capacity(batch.points.len());
    for r in batch.rows() {
        points.extend(map.apply(r));
    }
    let mut out = batch.clone();
    out.points = points;
    Ok((map, out))
}

/// Unbiased variance of `f` over the batch with jackknife standard error.
pub fn estimate_variance(f: &TestFunction, batch: &SampleBatch) -> Estimate {
    variance(&batch.map(|x| f.eval(x)))
}

/// `E H⁴ / (E H²)²` with jackknife standard error.
pub fn borell_ratio(h: impl Fn(&[f64]) -> f64 + Sync + Send, batch: &SampleBatch) -> Result<Estimate> {
    let h2 = batch.map(|x| {
        let v = h(x);
        v * v
    });
    let h4: Vec<f64> = h2.iter().map(|v| v * v).collect();
    let m2 = h2.iter().sum::<f64>() / h2.len() as f64;
    if m2 < 1e-12 {
        return Err(Error::Degenerate(m2));
    }
    Ok(jackknife(&[h2, h4], |m, _| m[1] / (m[0] * m[0])))
}
