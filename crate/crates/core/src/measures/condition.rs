use super::model::{MeasureModel, ModelKind};
use crate::symmetry::Subspace;
use crate::{Error, Result};

/// Mass-carrying interval of the 1D density `e^{−φ}`: the region where
/// `φ ≤ φ_min + 40`, widened to `mean ± 8·std`.
pub fn mass_interval(phi: &dyn Fn(f64) -> f64) -> (f64, f64) {
    mass_interval_with(phi, 4096)
}

/// [`mass_interval`] with `m` grid cells for the final scan.
pub fn mass_interval_with(phi: &dyn Fn(f64) -> f64, m: usize) -> (f64, f64) {
    const GAP: f64 = 40.0;
    let p0 = phi(0.0);
    let mut lo = -1.0;
    let mut hi = 1.0;
    // Expand until both ends are far above the lowest value seen.
    for _ in 0..200 {
        let (a, b) = (phi(lo), phi(hi));
        let low = sample_min(phi, lo, hi, 64).min(p0);
        let a_ok = a.is_nan() || a - low > GAP + 10.0;
        let b_ok = b.is_nan() || b - low > GAP + 10.0;
        if a_ok && b_ok {
            break;
        }
        if !a_ok {
            lo *= 1.5;
        }
        if !b_ok {
            hi *= 1.5;
        }
    }
    let h = (hi - lo) / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| phi(lo + i as f64 * h)).collect();
    let pmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = vals.iter().position(|v| v - pmin <= GAP).unwrap_or(0);
    let last = vals.iter().rposition(|v| v - pmin <= GAP).unwrap_or(m);
    let a = lo + first.saturating_sub(1) as f64 * h;
    let b = lo + (last + 1).min(m) as f64 * h;
    // Moments on the raw grid.
    let mut z = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let t = lo + i as f64 * h;
        let w = (-(v - pmin)).exp();
        z += w;
        s1 += w * t;
        s2 += w * t * t;
    }
    let mean = s1 / z;
    let sd = (s2 / z - mean * mean).max(0.0).sqrt();
    (a.min(mean - 8.0 * sd).max(lo), b.max(mean + 8.0 * sd).min(hi))
}

fn sample_min(phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64, k: usize) -> f64 {
    (0..=k).map(|i| phi(lo + (hi - lo) * i as f64 / k as f64)).filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
}

/// The measure `μ` restricted to the affine slice `x + E`.
#[derive(Debug, Clone)]
pub struct ConditionedMeasure {
    pub base: MeasureModel,
    /// `P_{E^⊥} x`.
    pub anchor: Vec<f64>,
    pub axis: Subspace,
}

impl ConditionedMeasure {
    pub fn dim(&self) -> usize {
        self.axis.dim()
    }

    /// Ambient point `anchor + B t`.
    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let e = self.axis.embed(t);
        self.anchor.iter().zip(e).map(|(a, b)| a + b).collect()
    }

    /// Potential on the slice, up to an additive constant.
    pub fn potential(&self, t: &[f64]) -> f64 {
        self.base.potential(&self.point(t))
    }

    pub fn potential_1d(&self, t: f64) -> f64 {
        self.potential(&[t])
    }

    /// `∇Φ · u` along the slice direction, for one-dimensional slices.
    pub fn derivative_1d(&self, t: f64) -> Option<f64> {
        let g = self.base.gradient(&self.point(&[t]))?;
        let u = self.axis.basis().column(0);
        Some(g.iter().zip(u.iter()).map(|(a, b)| a * b).sum())
    }

    /// Endpoints of the chord for a one-dimensional slice of a body.
    pub fn chord(&self) -> Option<(f64, f64)> {
        let body = self.base.as_body()?;
        let r = body.radius;
        let inside = |t: f64| body.contains(&self.point(&[t]));
        let k = 801;
        let hit = (0..k).map(|i| -r + 2.0 * r * i as f64 / (k - 1) as f64).find(|t| inside(*t))?;
        let bisect = |mut a: f64, mut b: f64| {
            // `a` inside, `b` outside.
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        let hi = if inside(r) { r } else { bisect(hit, r * 1.000001 + 1e-12) };
        let lo = if inside(-r) { -r } else { bisect(hit, -r * 1.000001 - 1e-12) };
        Some((lo, hi))
    }

    /// Interval carrying the mass of a one-dimensional slice.
    pub fn support_interval(&self) -> Result<(f64, f64)> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("support interval needs a one-dimensional slice".into()));
        }
        if self.base.is_body() {
            return self.chord().ok_or(Error::EmptySlice);
        }
        let f = |t: f64| self.potential_1d(t);
        Ok(mass_interval(&f))
    }
}

/// Condition `model` on the slice `x + E`.
pub fn condition(model: &MeasureModel, x: &[f64], e: &Subspace) -> Result<ConditionedMeasure> {
    if x.len() != model.dim() || e.ambient() != model.dim() {
        return Err(Error::Validation(format!(
            "conditioning dimensions disagree: model {}, point {}, subspace {}",
            model.dim(),
            x.len(),
            e.ambient()
        )));
    }
    let pe = e.project(x);
    let anchor: Vec<f64> = x.iter().zip(&pe).map(|(a, b)| a - b).collect();
    let c = ConditionedMeasure { base: model.clone(), anchor, axis: e.clone() };
    if let ModelKind::Body(b) = &model.kind {
        let hits = match e.dim() {
            0 => b.contains(&c.anchor),
            1 => c.chord().is_some(),
            k => {
                // Probe a coarse grid of the slice.
                let per = if k == 2 { 61 } else { 9 };
                let r = b.radius;
                let mut idx = vec![0usize; k];
                let mut found = false;
                'outer: loop {
                    let t: Vec<f64> = idx.iter().map(|&i| -r + 2.0 * r * i as f64 / (per - 1) as f64).collect();
                    if b.contains(&c.point(&t)) {
                        found = true;
                        break;
                    }
                    for d in 0..k {
                        idx[d] += 1;
                        if idx[d] < per {
                            continue 'outer;
                        }
                        idx[d] = 0;
                    }
                    break;
                }
                found
            }
        };
        if !hits {
            return Err(Error::EmptySlice);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::super::model::{builtin_model, cube};
    use super::*;

    #[test]
    fn mass_interval_of_gaussian() {
        let (a, b) = mass_interval(&|t: f64| 0.5 * t * t);
        assert!(a <= -8.9 && b >= 8.9 && a > -12.0 && b < 12.0);
    }

    #[test]
    fn cube_chord() {
        let m = cube(3, 1.0);
        let c = condition(&m, &[0.2, 0.3, -0.1], &Subspace::coordinates(3, &[0])).unwrap();
        let (lo, hi) = c.chord().unwrap();
        assert!((lo + 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slice_outside_body_is_empty() {
        let m = cube(2, 1.0);
        let r = condition(&m, &[0.0, 3.0], &Subspace::coordinates(2, &[0]));
        assert!(matches!(r, Err(Error::EmptySlice)));
    }

    #[test]
    fn anchor_only_depends_on_orthogonal_part() {
        let m = builtin_model("radial-quartic:3").unwrap();
        let e = Subspace::span_vectors(3, &[vec![1.0, 1.0, 0.0]]);
        let x = [0.3, -0.4, 0.8];
        let shifted = [0.3 + 0.7, -0.4 + 0.7, 0.8];
        let a = condition(&m, &x, &e).unwrap();
        let b = condition(&m, &shifted, &e).unwrap();
        for t in [-1.0, 0.0, 0.5, 2.0] {
            assert!((a.potential(&[t]) - b.potential(&[t])).abs() < 1e-12);
        }
    }
}
