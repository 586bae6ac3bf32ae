//! Exact samplers for models with a known law.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::measures::{mass_interval, BodyShape, MeasureModel, ModelKind, Potential1d};
use crate::symmetry::simplex_vertices;

/// Inverse-CDF table for a one-dimensional density `∝ e^{−V}`.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(v: &Potential1d, points: usize) -> Self {
        let (a, b) = mass_interval(&|t| v.v(t));
        let h = (b - a) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|i| a + i as f64 * h).collect();
        let vals: Vec<f64> = grid.iter().map(|t| v.v(*t)).collect();
        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let dens: Vec<f64> = vals.iter().map(|x| (-(x - vmin)).exp()).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i] + dens[i - 1]);
        }
        let z = cdf[points - 1];
        cdf.iter_mut().for_each(|c| *c /= z);
        Self { grid, cdf }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[k - 1] + f * (self.grid[k] - self.grid[k - 1])
    }
}

/// A direct sampler for one model.
#[derive(Debug, Clone)]
pub enum Direct {
    Gaussian,
    Cube(f64),
    Simplex(Vec<Vec<f64>>),
    LpBall(f64),
    Product(Vec<InverseCdf>),
}

impl Direct {
    /// Direct sampler for `model`, if one is known.
    pub fn for_model(model: &MeasureModel) -> Option<Self> {
        match &model.kind {
            ModelKind::Smooth(p) if p.name.starts_with("gaussian:") => Some(Direct::Gaussian),
            ModelKind::Body(b) => match b.shape {
                BodyShape::Cube { half_width } => Some(Direct::Cube(half_width)),
                BodyShape::Simplex => Some(Direct::Simplex(simplex_vertices(b.dim))),
                BodyShape::LpBall { p } => Some(Direct::LpBall(p)),
                BodyShape::SchattenBall { p, .. } if (p - 2.0).abs() < 1e-15 => Some(Direct::LpBall(2.0)),
                _ => None,
            },
            ModelKind::Product(f) => {
                if f.iter().all(|v| v.name == "quadratic") {
                    Some(Direct::Gaussian)
                } else {
                    Some(Direct::Product(f.iter().map(|v| InverseCdf::new(v, 1 << 16)).collect()))
                }
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Direct::Gaussian => "direct-gaussian",
            Direct::Cube(_) => "direct-cube",
            Direct::Simplex(_) => "direct-simplex",
            Direct::LpBall(_) => "direct-lp-ball",
            Direct::Product(_) => "direct-product",
        }
    }

    pub fn draw<R: Rng>(&self, dim: usize, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Direct::Gaussian => {
                for _ in 0..dim {
                    out.push(StandardNormal.sample(rng));
                }
            }
            Direct::Cube(a) => {
                for _ in 0..dim {
                    out.push((rng.random::<f64>() * 2.0 - 1.0) * a);
                }
            }
            Direct::Simplex(vertices) => {
                let e: Vec<f64> = (0..=dim).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                for i in 0..dim {
                    out.push(vertices.iter().zip(&e).map(|(v, w)| v[i] * w / s).sum());
                }
            }
            Direct::LpBall(p) => {
                let g = Gamma::new(1.0 / p, 1.0).expect("positive shape");
                let mut y = Vec::with_capacity(dim);
                let mut s = 0.0;
                for _ in 0..dim {
                    let a: f64 = g.sample(rng);
                    s += a;
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    y.push(sign * a.powf(1.0 / p));
                }
                let z: f64 = Exp1.sample(rng);
                let r = (s + z).powf(1.0 / p);
                out.extend(y.into_iter().map(|v| v / r));
            }
            Direct::Product(tables) => {
                for t in tables {
                    out.push(t.quantile(rng.random::<f64>()));
                }
            }
        }
    }
}
