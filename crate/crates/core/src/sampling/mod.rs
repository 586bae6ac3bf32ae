//! Samplers for every measure model, moment estimates and isotropic
//! position.

mod direct;
mod line;
mod moments;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub use direct::{Direct, InverseCdf};
pub use line::{adaptive_rejection, slice_draw, LineDraw};
pub use moments::{borell_ratio, estimate_variance, isotropize, moments, Affine, MomentReport};

use crate::measures::{Body, MeasureModel};
use crate::{Error, Result};

/// Largest tolerated fraction of hit-and-run steps whose chord reached the
/// bounding radius.
pub const MAX_RADIUS_HIT_FRACTION: f64 = 1e-3;

/// Sampler settings. `None` selects the defaults `1000·dim` and `dim`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SamplerConfig {
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub chains: usize,
    /// Use hit-and-run even when a direct sampler exists.
    pub force_mcmc: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { burn_in: None, thin: None, chains: 1, force_mcmc: false }
    }
}

/// Provenance and diagnostics of a batch.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ChainMeta {
    pub sampler: String,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub chain_lengths: Vec<usize>,
    pub steps: usize,
    pub radius_hits: usize,
    pub rejections: usize,
    pub fallbacks: usize,
}

/// `N × dim` sample matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<f64>,
    pub dim: usize,
    pub seed: u64,
    pub meta: ChainMeta,
}

impl SampleBatch {
    pub fn from_points(points: Vec<f64>, dim: usize, seed: u64) -> Self {
        let n = points.len() / dim.max(1);
        let meta = ChainMeta {
            sampler: "external".into(),
            burn_in: 0,
            thin: 1,
            chains: 1,
            chain_lengths: vec![n],
            steps: 0,
            radius_hits: 0,
            rejections: 0,
            fallbacks: 0,
        };
        Self { points, dim, seed, meta }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Values of `f` on every point, in order.
    pub fn map(&self, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Vec<f64> {
        self.points.par_chunks_exact(self.dim).map(f).collect()
    }

    /// Sub-batch of the rows of chain `c`.
    pub fn chain(&self, c: usize) -> SampleBatch {
        let start: usize = self.meta.chain_lengths[..c].iter().sum();
        let len = self.meta.chain_lengths[c];
        let mut b = SampleBatch::from_points(self.points[start * self.dim..(start + len) * self.dim].to_vec(), self.dim, self.seed);
        b.meta.sampler = self.meta.sampler.clone();
        b
    }

    /// Writes the batch as CSV with header `x1..xn`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        wr.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for r in self.rows() {
            wr.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn unit_direction<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-12 {
            return d.into_iter().map(|v| v / n).collect();
        }
    }
}

#[derive(Default)]
struct ChainStats {
    steps: usize,
    radius_hits: usize,
    rejections: usize,
    fallbacks: usize,
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

// Chord endpoint along `d` from an interior `x`: the radius bound when
// still inside, otherwise bisection.
fn chord_end(body: &Body, x: &[f64], d: &[f64], stats: &mut ChainStats) -> f64 {
    let xd: f64 = x.iter().zip(d).map(|(a, b)| a * b).sum();
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let r = body.radius;
    let tmax = -xd + (xd * xd - xx + r * r).max(0.0).sqrt();
    if body.contains(&axpy(x, tmax, d)) {
        stats.radius_hits += 1;
        return tmax;
    }
    let (mut a, mut b) = (0.0, tmax);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if body.contains(&axpy(x, m, d)) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

fn hit_and_run_step<R: Rng>(model: &MeasureModel, x: &mut Vec<f64>, concave: bool, rng: &mut R, stats: &mut ChainStats) {
    let dim = x.len();
    let d = unit_direction(dim, rng);
    stats.steps += 1;
    if let Some(body) = model.as_body() {
        let hi = chord_end(body, x, &d, stats);
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let lo = -chord_end(body, x, &neg, stats);
        let t = lo + rng.random::<f64>() * (hi - lo);
        *x = axpy(x, t, &d);
        return;
    }
    let base = x.clone();
    let draw = if concave {
        let h = |t: f64| {
            let p = axpy(&base, t, &d);
            let g = model.gradient(&p).unwrap_or_else(|| vec![0.0; dim]);
            (-model.potential(&p), -g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>())
        };
        adaptive_rejection(&h, f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0, rng)
    } else {
        let h = |t: f64| -model.potential(&axpy(&base, t, &d));
        slice_draw(&h, f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0, rng)
    };
    stats.rejections += draw.rejections;
    if draw.fell_back {
        stats.fallbacks += 1;
    }
    *x = axpy(&base, draw.t, &d);
}

fn chain_lengths(n: usize, chains: usize) -> Vec<usize> {
    (0..chains).map(|c| n / chains + usize::from(c < n % chains)).collect()
}

/// Draw `n` points from `model` with the default sampler settings.
pub fn sample(model: &MeasureModel, n: usize, seed: u64) -> Result<SampleBatch> {
    sample_with(model, n, seed, &SamplerConfig::default())
}

/// Draw `n` points from `model`. Chain `c` uses stream `c` of a ChaCha8
/// generator seeded with `seed`; chains are concatenated in index order.
pub fn sample_with(model: &MeasureModel, n: usize, seed: u64, config: &SamplerConfig) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::Validation("sample size must be at least 1".into()));
    }
    let dim = model.dim();
    let chains = config.chains.max(1).min(n);
    let lengths = chain_lengths(n, chains);
    let rng_for = |c: usize| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(c as u64);
        r
    };
    let direct = if config.force_mcmc { None } else { Direct::for_model(model) };
    if let Some(dir) = direct {
        let parts: Vec<Vec<f64>> = lengths
            .par_iter()
            .enumerate()
            .map(|(c, &len)| {
                let mut rng = rng_for(c);
                let mut out = Vec::with_capacity(len * dim);
                for _ in 0..len {
                    dir.draw(dim, &mut rng, &mut out);
                }
                out
            })
            .collect();
        let meta = ChainMeta {
            sampler: dir.name().into(),
            burn_in: 0,
            thin: 1,
            chains,
            chain_lengths: lengths,
            steps: 0,
            radius_hits: 0,
            rejections: 0,
            fallbacks: 0,
        };
        return Ok(SampleBatch { points: parts.concat(), dim, seed, meta });
    }

    let burn_in = config.burn_in.unwrap_or(1000 * dim);
    let thin = config.thin.unwrap_or(dim).max(1);
    let start = vec![0.0; dim];
    if !model.contains(&start) || !model.potential(&start).is_finite() {
        return Err(Error::Configuration(format!("model '{}' does not contain the origin", model.name)));
    }
    let concave = model.is_log_concave();
    let parts: Vec<(Vec<f64>, ChainStats)> = lengths
        .par_iter()
        .enumerate()
        .map(|(c, &len)| {
            let mut rng = rng_for(c);
            let mut stats = ChainStats::default();
            let mut x = start.clone();
            for _ in 0..burn_in {
                hit_and_run_step(model, &mut x, concave, &mut rng, &mut stats);
            }
            let mut out = Vec::with_capacity(len * dim);
            for _ in 0..len {
                for _ in 0..thin {
                    hit_and_run_step(model, &mut x, concave, &mut rng, &mut stats);
                }
                out.extend_from_slice(&x);
            }
            (out, stats)
        })
        .collect();
    let mut meta = ChainMeta {
        sampler: if model.is_body() { "hit-and-run-chord" } else if concave { "hit-and-run-ars" } else { "hit-and-run-slice" }
            .into(),
        burn_in,
        thin,
        chains,
        chain_lengths: lengths,
        steps: 0,
        radius_hits: 0,
        rejections: 0,
        fallbacks: 0,
    };
    let mut points = Vec::with_capacity(n * dim);
    for (p, s) in parts {
        points.extend(p);
        meta.steps += s.steps;
        meta.radius_hits += s.radius_hits;
        meta.rejections += s.rejections;
        meta.fallbacks += s.fallbacks;
    }
    if model.is_body() && meta.radius_hits as f64 > MAX_RADIUS_HIT_FRACTION * (2 * meta.steps) as f64 {
        return Err(Error::Configuration(format!(
            "bounding radius too small: {} of {} chord searches reached it",
            meta.radius_hits,
            2 * meta.steps
        )));
    }
    Ok(SampleBatch { points, dim, seed, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::builtin_model;

    #[test]
    fn reproducible() {
        let m = builtin_model("radial-quartic:2").unwrap();
        let cfg = SamplerConfig { chains: 2, ..Default::default() };
        let a = sample_with(&m, 300, 9, &cfg).unwrap();
        let b = sample_with(&m, 300, 9, &cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_with(&m, 300, 10, &cfg).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn body_samples_inside() {
        for name in ["cube:3", "simplex-body:3", "lp-ball:3:1.5"] {
            let m = builtin_model(name).unwrap();
            let cfg = SamplerConfig { force_mcmc: true, burn_in: Some(200), ..Default::default() };
            let b = sample_with(&m, 500, 1, &cfg).unwrap();
            assert!(b.rows().all(|x| m.contains(x)), "{name}");
            let d = sample(&m, 500, 1).unwrap();
            assert!(d.rows().all(|x| m.contains(x)), "{name}");
        }
    }

    #[test]
    fn tiny_radius_is_configuration_error() {
        let mut m = builtin_model("cube:2").unwrap();
        if let crate::measures::ModelKind::Body(b) = &mut m.kind {
            b.radius = 0.5;
        }
        let cfg = SamplerConfig { force_mcmc: true, burn_in: Some(10), ..Default::default() };
        assert!(matches!(sample_with(&m, 100, 1, &cfg), Err(Error::Configuration(_))));
    }

    #[test]
    fn csv_header() {
        let m = builtin_model("gaussian:2").unwrap();
        let b = sample(&m, 3, 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x1,x2\r\n"));
        assert_eq!(s.lines().count(), 4);
    }
}
