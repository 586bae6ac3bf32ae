use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::condition::{condition, ConditionedMeasure};
use super::function::TestFunction;
use super::model::MeasureModel;
use crate::quadrature::composite_rule;
use crate::symmetry::{fix_subspace, Isometry, MATRIX_TOL};
use crate::{Error, Result};

/// Relative density allowed on the edge of a quadrature box.
pub const EDGE_DENSITY_TOL: f64 = 1e-10;

/// `max |Φ(Rx) − Φ(x)|` over uniform probes of the reference box, or, for
/// bodies, the number of probes where membership of `x` and `Rx` differ.
pub fn check_invariance(model: &MeasureModel, r: &Isometry, probes: usize, seed: u64) -> Result<f64> {
    if r.dim() != model.dim() {
        return Err(Error::Validation(format!(
            "isometry acts on R^{} but the model lives on R^{}",
            r.dim(),
            model.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = model.reference_box();
    let mut worst: f64 = 0.0;
    let mut mismatches = 0usize;
    for _ in 0..probes {
        let x: Vec<f64> = (0..model.dim()).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * a).collect();
        let rx = r.apply(&x);
        if let Some(b) = model.as_body() {
            if b.contains(&x) != b.contains(&rx) {
                mismatches += 1;
            }
        } else {
            let (p, q) = (model.potential(&x), model.potential(&rx));
            if p != q {
                worst = worst.max((p - q).abs());
            }
        }
    }
    Ok(if model.is_body() { mismatches as f64 } else { worst })
}

/// Outcome of the centered-conditional checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenteredReport {
    /// `max_x |∫ P_E ∇g dμ_{x,E}|`.
    pub gradient_defect: f64,
    /// `max_x |∫ (u∘R − u) dμ_{x,E}|`.
    pub meanzero_defect: f64,
    pub anchors: usize,
    pub slice_dim: usize,
}

/// Normalized quadrature rule on a slice: nodes in slice coordinates and
/// probability weights.
pub struct SliceRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SliceRule {
    pub fn expect(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(t)).sum()
    }
}

fn normalize(nodes: Vec<Vec<f64>>, raw: Vec<f64>, log_density: Vec<f64>) -> Result<SliceRule> {
    let top = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::EmptySlice);
    }
    let w: Vec<f64> = raw.iter().zip(&log_density).map(|(a, l)| a * (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(SliceRule { nodes, weights: w.iter().map(|v| v / z).collect() })
}

/// Build a Gauss-Legendre rule with `resolution` nodes per axis for a one-
/// or two-dimensional slice.
pub fn slice_rule(c: &ConditionedMeasure, resolution: usize) -> Result<SliceRule> {
    let order = 8;
    let panels = resolution.div_ceil(order).max(1);
    match c.dim() {
        1 => {
            let (a, b) = c.support_interval()?;
            if !c.base.is_body() {
                let top = c.potential_1d(0.5 * (a + b)).min(c.potential_1d(a).min(c.potential_1d(b)));
                let m = (0..=256).map(|i| c.potential_1d(a + (b - a) * i as f64 / 256.0)).fold(top, f64::min);
                let edge = (-(c.potential_1d(a) - m)).exp().max((-(c.potential_1d(b) - m)).exp());
                if edge > EDGE_DENSITY_TOL {
                    return Err(Error::DomainTooSmall {
                        message: format!("slice density at the box edge is {edge:e}"),
                        suggested: 2.0 * a.abs().max(b.abs()),
                    });
                }
            }
            let (x, w) = composite_rule(a, b, panels, order);
            let nodes: Vec<Vec<f64>> = x.iter().map(|t| vec![*t]).collect();
            let ld: Vec<f64> = x.iter().map(|t| -c.potential_1d(*t)).collect();
            normalize(nodes, w, ld)
        }
        2 => {
            let mut half = match c.base.as_body() {
                Some(b) => b.radius,
                None => 4.0,
            };
            loop {
                let (x, w) = composite_rule(-half, half, panels, order);
                let mut nodes = Vec::with_capacity(x.len() * x.len());
                let mut raw = Vec::with_capacity(x.len() * x.len());
                for (i, a) in x.iter().enumerate() {
                    for (j, b) in x.iter().enumerate() {
                        nodes.push(vec![*a, *b]);
                        raw.push(w[i] * w[j]);
                    }
                }
                let ld: Vec<f64> = nodes.iter().map(|t| -c.potential(t)).collect();
                if c.base.is_body() {
                    return normalize(nodes, raw, ld);
                }
                let top = ld.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let k = 64;
                let mut edge: f64 = 0.0;
                for s in 0..=k {
                    let u = -half + 2.0 * half * s as f64 / k as f64;
                    for t in [[u, -half], [u, half], [-half, u], [half, u]] {
                        edge = edge.max((-c.potential(&t) - top).exp());
                    }
                }
                if edge <= EDGE_DENSITY_TOL {
                    return normalize(nodes, raw, ld);
                }
                if half >= 64.0 {
                    return Err(Error::DomainTooSmall {
                        message: format!("slice density at the box edge is {edge:e}"),
                        suggested: 2.0 * half,
                    });
                }
                half *= 2.0;
            }
        }
        k => Err(Error::Unsupported(format!("quadrature on {k}-dimensional slices"))),
    }
}

fn draw_anchor(model: &MeasureModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let a = model.reference_box();
    let spread = if model.is_body() { a } else { 1.5 };
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..model.dim()).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * spread).collect();
        if model.contains(&x) {
            return x;
        }
    }
    vec![0.0; model.dim()]
}

/// Checks that `μ_{x,E}` is centered for `E = Fix(R)^⊥`: for `g` invariant
/// under `R`, `∫ P_E ∇g dμ_{x,E} = 0`, and for any `u`,
/// `∫ (u∘R − u) dμ_{x,E} = 0`. Slices are integrated by tensor
/// Gauss-Legendre quadrature with `resolution` nodes per axis.
pub fn centered_conditional_check(
    model: &MeasureModel,
    g: &TestFunction,
    r: &Isometry,
    u: &TestFunction,
    anchors: usize,
    resolution: usize,
    seed: u64,
) -> Result<CenteredReport> {
    let inv = check_invariance(model, r, 256, seed ^ 0x5eed)?;
    if inv > 1e-9 {
        return Err(Error::Precondition(format!("model is not invariant under R (defect {inv:e})")));
    }
    let (_, e) = fix_subspace(r, MATRIX_TOL)?;
    if e.dim() == 0 || e.dim() > 2 {
        return Err(Error::Unsupported(format!("moving subspace of dimension {}", e.dim())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_defect: f64 = 0.0;
    let mut mean_defect: f64 = 0.0;
    for _ in 0..anchors {
        let x = draw_anchor(model, &mut rng);
        let c = condition(model, &x, &e)?;
        let rule = slice_rule(&c, resolution)?;
        let mut acc = vec![0.0; e.dim()];
        let mut diff = 0.0;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let p = c.point(t);
            let gc = e.coords(&g.grad(&p));
            for (a, b) in acc.iter_mut().zip(&gc) {
                *a += w * b;
            }
            diff += w * (u.eval(&r.apply(&p)) - u.eval(&p));
        }
        grad_defect = grad_defect.max(acc.iter().map(|v| v * v).sum::<f64>().sqrt());
        mean_defect = mean_defect.max(diff.abs());
    }
    Ok(CenteredReport { gradient_defect: grad_defect, meanzero_defect: mean_defect, anchors, slice_dim: e.dim() })
}

#[cfg(test)]
mod tests {
    use super::super::model::{builtin_model, cube};
    use super::*;

    #[test]
    fn gaussian_invariant_under_rotation() {
        let m = builtin_model("gaussian:3").unwrap();
        let r = Isometry::plane_rotation(3, 0, 2, 0.7);
        assert!(check_invariance(&m, &r, 500, 1).unwrap() < 1e-12);
    }

    #[test]
    fn cube_rotation_breaks_membership() {
        let m = cube(2, 1.0);
        let swap = Isometry::permutation(&[1, 0]);
        assert_eq!(check_invariance(&m, &swap, 2000, 3).unwrap(), 0.0);
        let r = Isometry::plane_rotation(2, 0, 1, std::f64::consts::PI / 5.0);
        assert!(check_invariance(&m, &r, 2000, 3).unwrap() > 0.0);
    }

    #[test]
    fn gaussian_reflection_centered() {
        let m = builtin_model("gaussian:2").unwrap();
        let r = Isometry::reflection(&[1.0, 0.0]);
        let g = TestFunction::squared_norm(2);
        let u = TestFunction::generic(2);
        let rep = centered_conditional_check(&m, &g, &r, &u, 5, 64, 7).unwrap();
        assert!(rep.gradient_defect < 1e-10 && rep.meanzero_defect < 1e-10, "{rep:?}");
    }
}
