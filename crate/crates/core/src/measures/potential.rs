use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Smoothing scale for corner potentials.
pub const CORNER_SMOOTHING: f64 = 1e-3;

/// A one-dimensional potential `V` with two derivatives.
#[derive(Clone)]
pub struct Potential1d {
    pub name: String,
    pub value: Fn1,
    pub d1: Fn1,
    pub d2: Fn1,
    /// Unsmoothed value when `value` is a smoothed corner.
    pub exact: Option<Fn1>,
    /// Points where the exact potential is not smooth.
    pub breakpoints: Vec<f64>,
    /// Claimed lower bound on `V''`.
    pub convexity_floor: f64,
    pub even: bool,
}

impl fmt::Debug for Potential1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential1d").field("name", &self.name).field("convexity_floor", &self.convexity_floor).finish()
    }
}

fn arc1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Fn1 {
    Arc::new(f)
}

impl Potential1d {
    pub fn new(
        name: &str,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        convexity_floor: f64,
        even: bool,
    ) -> Self {
        Self {
            name: name.to_string(),
            value: arc1(value),
            d1: arc1(d1),
            d2: arc1(d2),
            exact: None,
            breakpoints: Vec::new(),
            convexity_floor,
            even,
        }
    }

    pub fn quadratic() -> Self {
        Self::new("quadratic", |t| 0.5 * t * t, |t| t, |_| 1.0, 1.0, true)
    }

    /// `|t|`, smoothed as `√(t² + δ²) − δ`; the exact corner is kept for
    /// quadrature.
    pub fn abs() -> Self {
        Self::abs_smoothed(CORNER_SMOOTHING)
    }

    pub fn abs_smoothed(delta: f64) -> Self {
        let d2 = delta * delta;
        let mut p = Self::new(
            "abs",
            move |t| (t * t + d2).sqrt() - delta,
            move |t| t / (t * t + d2).sqrt(),
            move |t| d2 / (t * t + d2).powf(1.5),
            0.0,
            true,
        );
        p.exact = Some(arc1(|t: f64| t.abs()));
        p.breakpoints = vec![0.0];
        p
    }

    pub fn quartic() -> Self {
        Self::new("quartic", |t| t.powi(4), |t| 4.0 * t.powi(3), |t| 12.0 * t * t, 0.0, true)
    }

    /// `t⁴ + t²`.
    pub fn quartic_quadratic() -> Self {
        Self::new(
            "quartic-quadratic",
            |t| t.powi(4) + t * t,
            |t| 4.0 * t.powi(3) + 2.0 * t,
            |t| 12.0 * t * t + 2.0,
            2.0,
            true,
        )
    }

    /// `t⁴/4 − t²/2`.
    pub fn double_well() -> Self {
        Self::new(
            "double-well",
            |t| 0.25 * t.powi(4) - 0.5 * t * t,
            |t| t.powi(3) - t,
            |t| 3.0 * t * t - 1.0,
            -1.0,
            true,
        )
    }

    /// `t²/2 + ε cos t`.
    pub fn perturbed(eps: f64) -> Self {
        Self::new(
            &format!("perturbed:{eps}"),
            move |t| 0.5 * t * t + eps * t.cos(),
            move |t| t - eps * t.sin(),
            move |t| 1.0 - eps * t.cos(),
            1.0 - eps.abs(),
            true,
        )
    }

    /// Parse a named single-site potential.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(Self::quadratic()),
            "abs" => Ok(Self::abs()),
            "quartic" => Ok(Self::quartic()),
            "quartic-quadratic" => Ok(Self::quartic_quadratic()),
            "double-well" => Ok(Self::double_well()),
            _ => {
                if let Some(eps) = name.strip_prefix("perturbed:") {
                    let eps: f64 = eps
                        .parse()
                        .map_err(|_| Error::Validation(format!("potential '{name}': bad epsilon")))?;
                    Ok(Self::perturbed(eps))
                } else {
                    Err(Error::Validation(format!("unknown potential '{name}'")))
                }
            }
        }
    }

    pub fn v(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    /// Exact value when available, smoothed value otherwise.
    pub fn v_exact(&self, t: f64) -> f64 {
        match &self.exact {
            Some(e) => e(t),
            None => (self.value)(t),
        }
    }

    pub fn is_log_concave(&self) -> bool {
        self.convexity_floor >= 0.0
    }
}

/// Names accepted by [`Potential1d::named`].
pub const POTENTIAL_CATALOG: &[(&str, &str)] = &[
    ("quadratic", "t^2/2"),
    ("abs", "|t|, smoothed at scale 1e-3 where derivatives are needed"),
    ("quartic", "t^4"),
    ("quartic-quadratic", "t^4 + t^2"),
    ("double-well", "t^4/4 - t^2/2 (not convex)"),
    ("perturbed:eps", "t^2/2 + eps cos t"),
];

/// A `C²` potential on ℝⁿ.
#[derive(Clone)]
pub struct SmoothPotential {
    pub name: String,
    pub dim: usize,
    pub value: ScalarFn,
    pub gradient: VectorFn,
    pub hessian: MatrixFn,
    /// Claimed `ρ` with `D²Φ ≥ ρ·I`.
    pub convexity_floor: f64,
}

impl fmt::Debug for SmoothPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothPotential")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("convexity_floor", &self.convexity_floor)
            .finish()
    }
}

/// Outcome of sampling the validation invariants of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialCheck {
    pub max_asymmetry: f64,
    pub max_gradient_error: f64,
    pub min_hessian_eigenvalue: f64,
}

impl PotentialCheck {
    pub fn passes(&self, floor: f64) -> bool {
        self.max_asymmetry <= 1e-8 && self.max_gradient_error <= 1e-5 && self.min_hessian_eigenvalue >= floor - 1e-6
    }
}

impl SmoothPotential {
    pub fn new(
        name: &str,
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        convexity_floor: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
            convexity_floor,
        }
    }

    /// `|x|²/2`.
    pub fn gaussian(n: usize) -> Self {
        Self::new(
            &format!("gaussian:{n}"),
            n,
            |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            |x| x.to_vec(),
            move |_| DMatrix::identity(n, n),
            1.0,
        )
    }

    /// `|x|²/2 + |x|⁴/4`.
    pub fn radial_quartic(n: usize) -> Self {
        Self::new(
            &format!("radial-quartic:{n}"),
            n,
            |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                0.5 * r2 + 0.25 * r2 * r2
            },
            |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                x.iter().map(|v| v * (1.0 + r2)).collect()
            },
            move |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                DMatrix::from_fn(n, n, |i, j| {
                    let d = if i == j { 1.0 + r2 } else { 0.0 };
                    d + 2.0 * x[i] * x[j]
                })
            },
            1.0,
        )
    }

    /// `xᵀAx/2` with `A` tridiagonal: unit diagonal, `eps` off-diagonal.
    pub fn correlated_gaussian(n: usize, eps: f64) -> Self {
        let a = move |i: usize, j: usize| {
            if i == j {
                1.0
            } else if i.abs_diff(j) == 1 {
                eps
            } else {
                0.0
            }
        };
        let floor = 1.0 - 2.0 * eps.abs() * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        Self::new(
            &format!("correlated-gaussian:{n}:{eps}"),
            n,
            move |x| {
                let mut s = 0.0;
                for i in 0..n {
                    s += 0.5 * x[i] * x[i];
                    if i + 1 < n {
                        s += eps * x[i] * x[i + 1];
                    }
                }
                s
            },
            move |x| {
                (0..n)
                    .map(|i| {
                        let mut g = x[i];
                        if i > 0 {
                            g += eps * x[i - 1];
                        }
                        if i + 1 < n {
                            g += eps * x[i + 1];
                        }
                        g
                    })
                    .collect()
            },
            move |_| DMatrix::from_fn(n, n, a),
            floor,
        )
    }

    /// `|x|²/2 + a·exp(−|x|²/2)`: convex far out, with a concave dent at the
    /// origin when `a > 0`.
    pub fn radial_dent(n: usize, a: f64) -> Self {
        Self::new(
            &format!("radial-dent:{n}:{a}"),
            n,
            move |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                0.5 * r2 + a * (-0.5 * r2).exp()
            },
            move |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let e = a * (-0.5 * r2).exp();
                x.iter().map(|v| v * (1.0 - e)).collect()
            },
            move |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let e = a * (-0.5 * r2).exp();
                DMatrix::from_fn(n, n, |i, j| {
                    let d = if i == j { 1.0 - e } else { 0.0 };
                    d + e * x[i] * x[j]
                })
            },
            1.0 - a.max(0.0),
        )
    }

    /// `x²/2 + y⁴ + y²`.
    pub fn quartic_2d() -> Self {
        Self::new(
            "quartic-2d",
            2,
            |x| 0.5 * x[0] * x[0] + x[1].powi(4) + x[1] * x[1],
            |x| vec![x[0], 4.0 * x[1].powi(3) + 2.0 * x[1]],
            |x| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 12.0 * x[1] * x[1] + 2.0]),
            1.0,
        )
    }

    /// `(x² + y²)/2 + 0.1(x⁴ + y⁴)`.
    pub fn quartic_square_2d() -> Self {
        Self::new(
            "quartic-square-2d",
            2,
            |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) + 0.1 * (x[0].powi(4) + x[1].powi(4)),
            |x| vec![x[0] + 0.4 * x[0].powi(3), x[1] + 0.4 * x[1].powi(3)],
            |x| DMatrix::from_row_slice(2, 2, &[1.0 + 1.2 * x[0] * x[0], 0.0, 0.0, 1.0 + 1.2 * x[1] * x[1]]),
            1.0,
        )
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub fn hessian_at(&self, x: &[f64]) -> DMatrix<f64> {
        (self.hessian)(x)
    }

    /// Check hessian symmetry, finite-difference gradients and the claimed
    /// convexity floor at `probes` points of `[−box, box]ⁿ`.
    pub fn validate(&self, probes: usize, half_width: f64, seed: u64) -> PotentialCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim;
        let mut asym: f64 = 0.0;
        let mut gerr: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        for _ in 0..probes {
            let x: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * half_width).collect();
            let h = self.hessian_at(&x);
            asym = asym.max(crate::linalg::max_abs(&(&h - h.transpose())));
            min_eig = min_eig.min(crate::linalg::min_eigenvalue(&h));
            let g = self.gradient_at(&x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let step = 1e-5 * (1.0 + norm);
            for k in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += step;
                xm[k] -= step;
                let fd = (self.value_at(&xp) - self.value_at(&xm)) / (2.0 * step);
                let rel = (fd - g[k]).abs() / (1.0 + g[k].abs());
                gerr = gerr.max(rel);
            }
        }
        PotentialCheck { max_asymmetry: asym, max_gradient_error: gerr, min_hessian_eigenvalue: min_eig }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_potentials_validate() {
        for p in [
            SmoothPotential::gaussian(3),
            SmoothPotential::radial_quartic(3),
            SmoothPotential::correlated_gaussian(4, 0.2),
            SmoothPotential::quartic_2d(),
            SmoothPotential::quartic_square_2d(),
            SmoothPotential::radial_dent(3, 1.2),
        ] {
            let c = p.validate(50, 2.0, 3);
            assert!(c.passes(p.convexity_floor), "{}: {c:?}", p.name);
        }
    }

    #[test]
    fn one_dimensional_derivatives_match() {
        for name in ["quadratic", "abs", "quartic", "quartic-quadratic", "double-well", "perturbed:0.5"] {
            let p = Potential1d::named(name).unwrap();
            for i in 0..41 {
                let t = -2.0 + 0.1 * i as f64 + 0.013;
                let h = 1e-5;
                let fd = (p.v(t + h) - p.v(t - h)) / (2.0 * h);
                assert!((fd - (p.d1)(t)).abs() < 1e-5 * (1.0 + fd.abs()), "{name} d1 at {t}");
                let fd2 = ((p.d1)(t + h) - (p.d1)(t - h)) / (2.0 * h);
                assert!((fd2 - (p.d2)(t)).abs() < 1e-4 * (1.0 + fd2.abs()), "{name} d2 at {t}");
                assert!((p.d2)(t) >= p.convexity_floor - 1e-12);
            }
        }
        assert!(Potential1d::named("cubic").is_err());
    }
}
