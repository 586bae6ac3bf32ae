use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::report::{BoundReport, Constants};
use crate::measures::MeasureModel;
use crate::sampling::{isotropize, SampleBatch};
use crate::stats::{jackknife, mean, variance, Estimate};
use crate::symmetry::{kappa, GeneratorSet, IdentityDecomposition, Subspace};
use crate::{Error, Result};

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Variance of `|X|²` over the batch.
pub fn norm_variance(batch: &SampleBatch) -> Estimate {
    variance(&batch.map(sq_norm))
}

/// Variance of the Euclidean norm squared against `16 ∑ c_i E|P_{E_i}X|⁴`,
/// plus the isotropic form `16·c_borell·∑ c_i d_i²`.
#[derive(Debug, Clone, Serialize)]
pub struct VarNormReport {
    pub bound: BoundReport,
    pub isotropic: BoundReport,
}

pub fn varnorm(batch: &SampleBatch, dec: &IdentityDecomposition, constants: &Constants) -> Result<VarNormReport> {
    if dec.ambient() != batch.dim {
        return Err(Error::Validation("decomposition and batch dimensions differ".into()));
    }
    let terms = batch.map(|x| {
        dec.terms.iter().map(|t| t.coefficient * sq_norm(&t.subspace.coords(x)).powi(2)).sum::<f64>()
    });
    let m = mean(&terms);
    let rhs = Estimate { value: 16.0 * m.value, std_error: 16.0 * m.std_error };
    let iso: f64 = 16.0
        * constants.c_borell
        * dec.terms.iter().map(|t| t.coefficient * (t.subspace.dim() as f64).powi(2)).sum::<f64>();
    let lhs = norm_variance(batch);
    Ok(VarNormReport {
        bound: BoundReport::compare("varnorm", lhs, rhs),
        isotropic: BoundReport::reported("varnorm_isotropic", lhs, Estimate::exact(iso))
            .with_config("c_borell", constants.c_borell),
    })
}

/// Intersection of the fixed subspaces of the generators.
pub fn common_fix(gens: &GeneratorSet, n: usize) -> Subspace {
    let moving = gens.generators.iter().map(crate::symmetry::moving_subspace).fold(Subspace::zero(n), |a, s| a.sum(&s));
    moving.complement()
}

/// `Var|X|² ≤ 2 v(d) + C n max_i d_i` with `v(d) = d²` and `d` the
/// dimension of the common fixed subspace. Without a decomposition the
/// bound is `2n²`.
pub fn var_split(
    batch: &SampleBatch,
    dec: Option<&IdentityDecomposition>,
    gens: Option<&GeneratorSet>,
    constants: &Constants,
) -> Result<BoundReport> {
    let n = batch.dim;
    let lhs = norm_variance(batch);
    let Some(dec) = dec else {
        let v = 2.0 * (n * n) as f64;
        return Ok(BoundReport::reported("var_split", lhs, Estimate::exact(v)).with_config("d", n));
    };
    if let Some(g) = gens {
        let fix = common_fix(g, n);
        if fix.complement().distance(&dec.target) > 1e-8 {
            return Err(Error::Validation("decomposition target is not the complement of the common fixed subspace".into()));
        }
    }
    let d = n - dec.target.dim();
    let max_di = dec.terms.iter().map(|t| t.subspace.dim()).max().unwrap_or(0);
    let rhs = 2.0 * (d * d) as f64 + constants.var_split_c * (n * max_di) as f64;
    Ok(BoundReport::reported("var_split", lhs, Estimate::exact(rhs))
        .with_config("d", d)
        .with_config("C", constants.var_split_c))
}

/// The symmetric Poincaré estimate `c'(1+4κ)(1+log m')² max_i dim E_i`.
#[derive(Debug, Clone, Serialize)]
pub struct PoincSym {
    pub m_prime: usize,
    pub kappa: f64,
    pub max_dim: usize,
    pub value: f64,
}

/// `gens` must carry the group constant as weights.
pub fn poincsym(dec: &IdentityDecomposition, gens: &GeneratorSet, constants: &Constants) -> Result<PoincSym> {
    let k = kappa(dec, gens)?;
    let m_prime = dec.distinct_subspaces();
    let max_dim = dec.max_dim();
    let l = 1.0 + (m_prime as f64).ln();
    Ok(PoincSym { m_prime, kappa: k, max_dim, value: constants.c_prime * (1.0 + 4.0 * k) * l * l * max_dim as f64 })
}

/// Isotropic constant `L_K = det(Cov)^{1/(2n)} / |K|^{1/n}`.
#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    pub l_k: Estimate,
    pub volume: f64,
    pub volume_estimated: bool,
}

/// Samples used by the Monte Carlo volume estimate.
pub const VOLUME_SAMPLES: usize = 400_000;

fn mc_volume(model: &MeasureModel, seed: u64) -> Result<f64> {
    let body = model.as_body().ok_or_else(|| Error::Unsupported("isotropy constant of a non-body".into()))?;
    let n = body.dim;
    let r = body.radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut x = vec![0.0; n];
    for _ in 0..VOLUME_SAMPLES {
        for v in x.iter_mut() {
            *v = r * (2.0 * rng.random::<f64>() - 1.0);
        }
        if body.contains(&x) {
            hits += 1;
        }
    }
    if hits < 1000 {
        return Err(Error::Unsupported(format!("volume unknown and the Monte Carlo ratio is too small ({hits} hits)")));
    }
    Ok(hits as f64 / VOLUME_SAMPLES as f64 * (2.0 * r).powi(n as i32))
}

pub fn isotropy_constant(model: &MeasureModel, batch: &SampleBatch) -> Result<IsotropyReport> {
    let body = model.as_body().ok_or_else(|| Error::Unsupported("isotropy constant of a non-body".into()))?;
    let n = batch.dim;
    // Isotropize first so the jackknife works in well-conditioned coordinates.
    let (t, y) = isotropize(model, batch)?;
    let (volume, volume_estimated) = match body.volume {
        Some(v) => (v, false),
        None => (mc_volume(model, batch.seed)?, true),
    };
    let log_det_t = t.determinant().abs().ln();
    let mut features: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        features.push(y.rows().map(|r| r[i]).collect());
    }
    for i in 0..n {
        for j in i..n {
            features.push(y.rows().map(|r| r[i] * r[j]).collect());
        }
    }
    let l_k = jackknife(&features, |m, cnt| {
        let mu = &m[..n];
        let mut k = n;
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let c = (m[k] - mu[i] * mu[j]) * cnt as f64 / (cnt as f64 - 1.0);
                cov[(i, j)] = c;
                cov[(j, i)] = c;
                k += 1;
            }
        }
        let log_det = cov.determinant().ln() - 2.0 * log_det_t;
        (0.5 * log_det / n as f64 - volume.ln() / n as f64).exp()
    });
    Ok(IsotropyReport { l_k, volume, volume_estimated })
}

/// For the cube `[−1,1]ⁿ` and a coordinate permutation `U`, compares the
/// support function of `P_{Fix U} K` (from the projected vertices) with
/// that of the section `K ∩ Fix U` (a box constrained to be constant on
/// the cycles of `U`) in random directions of `Fix U`. Returns the largest
/// discrepancy.
pub fn cube_fix_section_check(perm: &[usize], directions: usize, seed: u64) -> Result<f64> {
    let n = perm.len();
    if n > 16 {
        return Err(Error::Unsupported("vertex enumeration above dimension 16".into()));
    }
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::Validation("not a permutation".into()));
    }
    let mut seen = vec![false; n];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        let mut c = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            c.push(i);
            i = perm[i];
        }
        if !c.is_empty() {
            cycles.push(c);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        // Random direction constant on cycles, i.e. in Fix U.
        let mut theta = vec![0.0; n];
        for c in &cycles {
            let v = 2.0 * rng.random::<f64>() - 1.0;
            for &i in c {
                theta[i] = v;
            }
        }
        let mut h_proj = f64::NEG_INFINITY;
        for mask in 0u32..(1u32 << n) {
            let s: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { theta[i] } else { -theta[i] }).sum();
            h_proj = h_proj.max(s);
        }
        let h_section: f64 = cycles.iter().map(|c| c.iter().map(|&i| theta[i]).sum::<f64>().abs()).sum();
        worst = worst.max((h_proj - h_section).abs());
    }
    Ok(worst)
}
