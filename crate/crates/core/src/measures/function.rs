use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::potential::{ScalarFn, VectorFn};
use crate::symmetry::{FiniteGroup, Subspace};

/// A locally Lipschitz test function with its gradient.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub dim: usize,
    pub value: ScalarFn,
    pub gradient: VectorFn,
    /// Group under which the function is invariant, if any.
    pub invariant_under: Option<Arc<FiniteGroup>>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("invariant", &self.invariant_under.is_some())
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        name: &str,
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.to_string(), dim, value: Arc::new(value), gradient: Arc::new(gradient), invariant_under: None }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new("constant", dim, move |_| c, move |_| vec![0.0; dim])
    }

    /// `x ↦ x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::new(&format!("x{}", i + 1), dim, move |x| x[i], move |_| {
            let mut g = vec![0.0; dim];
            g[i] = 1.0;
            g
        })
    }

    /// `x ↦ a·x`.
    pub fn linear(name: &str, a: Vec<f64>) -> Self {
        let dim = a.len();
        let b = a.clone();
        Self::new(name, dim, move |x| a.iter().zip(x).map(|(p, q)| p * q).sum(), move |_| b.clone())
    }

    /// `x ↦ |x|²`.
    pub fn squared_norm(dim: usize) -> Self {
        Self::new("|x|^2", dim, |x| x.iter().map(|v| v * v).sum(), |x| x.iter().map(|v| 2.0 * v).collect())
    }

    /// `x ↦ x_i² − 1`.
    pub fn hermite2(dim: usize, i: usize) -> Self {
        Self::new(&format!("x{}^2-1", i + 1), dim, move |x| x[i] * x[i] - 1.0, move |x| {
            let mut g = vec![0.0; dim];
            g[i] = 2.0 * x[i];
            g
        })
    }

    /// `x ↦ |P_E x|²`.
    pub fn squared_projection(e: &Subspace) -> Self {
        let e1 = e.clone();
        let e2 = e.clone();
        Self::new(&format!("|P_E x|^2 (dim {})", e.dim()), e.ambient(), move |x| {
            e1.coords(x).iter().map(|v| v * v).sum()
        }, move |x| e2.project(x).iter().map(|v| 2.0 * v).collect())
    }

    /// A smooth function with no symmetry: `sin(a·x) + (b·x)³/3 + x₁`.
    pub fn generic(dim: usize) -> Self {
        let a: Vec<f64> = (0..dim).map(|i| 0.7 + 0.3 * i as f64).collect();
        let b: Vec<f64> = (0..dim).map(|i| if i % 2 == 0 { 0.5 } else { -0.25 }).collect();
        let (a2, b2) = (a.clone(), b.clone());
        Self::new(
            "generic",
            dim,
            move |x| {
                let s: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                let t: f64 = b.iter().zip(x).map(|(p, q)| p * q).sum();
                s.sin() + t.powi(3) / 3.0 + x[0]
            },
            move |x| {
                let s: f64 = a2.iter().zip(x).map(|(p, q)| p * q).sum();
                let t: f64 = b2.iter().zip(x).map(|(p, q)| p * q).sum();
                (0..a2.len()).map(|k| s.cos() * a2[k] + t * t * b2[k] + if k == 0 { 1.0 } else { 0.0 }).collect()
            },
        )
    }

    pub fn with_invariance(mut self, group: Arc<FiniteGroup>) -> Self {
        self.invariant_under = Some(group);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Maximum relative central-difference gradient error on random points
    /// of `[−half_width, half_width]ⁿ`.
    pub fn gradient_error(&self, probes: usize, half_width: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let x: Vec<f64> = (0..self.dim).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * half_width).collect();
            let g = self.grad(&x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = 1e-5 * (1.0 + norm);
            for k in 0..self.dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
                worst = worst.max((fd - g[k]).abs() / (1.0 + g[k].abs()));
            }
        }
        worst
    }

    /// `max |f(gx) − f(x)|` over random points and all group elements.
    pub fn invariance_defect(&self, group: &FiniteGroup, probes: usize, half_width: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let x: Vec<f64> = (0..self.dim).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * half_width).collect();
            let f0 = self.eval(&x);
            for g in &group.elements {
                worst = worst.max((self.eval(&g.apply(&x)) - f0).abs());
            }
        }
        worst
    }
}

/// Group average `F(x) = (1/|G|) ∑_g f(gx)` with `∇F(x) = (1/|G|) ∑_g gᵀ∇f(gx)`.
pub fn symmetrize(f: &TestFunction, group: &Arc<FiniteGroup>) -> TestFunction {
    let g1 = Arc::clone(group);
    let g2 = Arc::clone(group);
    let f1 = f.clone();
    let f2 = f.clone();
    let dim = f.dim;
    let order = group.order as f64;
    TestFunction {
        name: format!("sym({})", f.name),
        dim,
        value: Arc::new(move |x| g1.elements.iter().map(|g| f1.eval(&g.apply(x))).sum::<f64>() / order),
        gradient: Arc::new(move |x| {
            let mut out = vec![0.0; dim];
            for g in &g2.elements {
                let gr = f2.grad(&g.apply(x));
                for i in 0..dim {
                    for (j, gj) in gr.iter().enumerate() {
                        out[i] += g.matrix[(j, i)] * gj;
                    }
                }
            }
            out.iter_mut().for_each(|v| *v /= order);
            out
        }),
        invariant_under: Some(Arc::clone(group)),
    }
}
