//! One-dimensional exact draws used along hit-and-run lines.

use rand::Rng;

/// Outcome of a line draw.
#[derive(Debug, Clone, Copy)]
pub struct LineDraw {
    pub t: f64,
    /// Envelope rejections (adaptive rejection) or shrink steps (slice).
    pub rejections: usize,
    /// True when the adaptive rejection sampler gave up and the slice
    /// sampler was used.
    pub fell_back: bool,
}

struct Hull {
    t: Vec<f64>,
    h: Vec<f64>,
    dh: Vec<f64>,
}

impl Hull {
    fn insert(&mut self, t: f64, h: f64, dh: f64) {
        let k = self.t.partition_point(|&s| s < t);
        self.t.insert(k, t);
        self.h.insert(k, h);
        self.dh.insert(k, dh);
    }

    // Segment boundaries: lo, z_1, ..., z_{k−1}, hi.
    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let k = self.t.len();
        let mut z = Vec::with_capacity(k + 1);
        z.push(lo);
        for j in 0..k - 1 {
            let (d0, d1) = (self.dh[j], self.dh[j + 1]);
            let zz = if (d0 - d1).abs() > 1e-12 * (d0.abs() + d1.abs()).max(1e-300) {
                (self.h[j + 1] - self.h[j] - self.t[j + 1] * d1 + self.t[j] * d0) / (d0 - d1)
            } else {
                0.5 * (self.t[j] + self.t[j + 1])
            };
            z.push(zz.clamp(self.t[j], self.t[j + 1]));
        }
        z.push(hi);
        z
    }
}

// log ∫_a^b exp(h0 + s (x − t0)) dx
fn log_segment(h0: f64, s: f64, t0: f64, a: f64, b: f64) -> f64 {
    if (a.is_infinite() && s <= 0.0) || (b.is_infinite() && s >= 0.0) {
        return f64::INFINITY;
    }
    let w = b - a;
    if w <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if s.abs() * w < 1e-10 {
        return h0 + s * (0.5 * (a + b) - t0) + w.ln();
    }
    // Factor out the larger endpoint value.
    if s > 0.0 {
        let top = h0 + s * (b - t0);
        if !top.is_finite() {
            return top;
        }
        top + (-(-s * w).exp_m1()).ln() - s.ln()
    } else {
        let top = h0 + s * (a - t0);
        top + (-(s * w).exp_m1()).ln() - (-s).ln()
    }
}

// Inverse CDF of the density ∝ exp(s x) on [a, b].
fn segment_draw(s: f64, a: f64, b: f64, u: f64) -> f64 {
    let w = b - a;
    if a.is_infinite() || b.is_infinite() {
        // Exponential tail.
        return if s > 0.0 { b + u.ln() / s } else { a + u.ln() / s };
    }
    if s.abs() * w < 1e-10 {
        return a + u * w;
    }
    let t = if s > 0.0 {
        b + (u + (1.0 - u) * (-s * w).exp()).ln() / s
    } else {
        a + (1.0 - u + u * (s * w).exp()).ln() / s
    };
    t.clamp(a, b)
}

/// Exact draw from the density `∝ exp(h(t))` on `(lo, hi)` for concave `h`,
/// by adaptive rejection sampling from the tangent envelope. `t0` must lie
/// in the domain with `h(t0)` finite. Falls back to slice sampling if the
/// envelope is ever violated.
pub fn adaptive_rejection<R: Rng>(
    h: &dyn Fn(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    t0: f64,
    scale: f64,
    rng: &mut R,
) -> LineDraw {
    let (h0, d0) = h(t0);
    let mut hull = Hull { t: vec![t0], h: vec![h0], dh: vec![d0] };
    // Bracket the mode so the envelope is integrable.
    let mut step = scale.max(1e-6);
    if lo.is_infinite() {
        let mut a = t0;
        for _ in 0..200 {
            a -= step;
            let (ha, da) = h(a);
            hull.insert(a, ha, da);
            if da > 0.0 {
                break;
            }
            step *= 2.0;
        }
    }
    step = scale.max(1e-6);
    if hi.is_infinite() {
        let mut b = t0;
        for _ in 0..200 {
            b += step;
            let (hb, db) = h(b);
            hull.insert(b, hb, db);
            if db < 0.0 {
                break;
            }
            step *= 2.0;
        }
    }
    let mut rejections = 0;
    for _ in 0..200 {
        let z = hull.knots(lo, hi);
        let k = hull.t.len();
        let logs: Vec<f64> = (0..k).map(|j| log_segment(hull.h[j], hull.dh[j], hull.t[j], z[j], z[j + 1])).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            break;
        }
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut pick = rng.random::<f64>() * total;
        let mut j = k - 1;
        for (i, wi) in w.iter().enumerate() {
            if pick < *wi {
                j = i;
                break;
            }
            pick -= wi;
        }
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let t = segment_draw(hull.dh[j], z[j], z[j + 1], u);
        let upper = hull.h[j] + hull.dh[j] * (t - hull.t[j]);
        let (ht, dt) = h(t);
        if ht > upper + 1e-9 * (1.0 + upper.abs()) {
            // Not concave along this line.
            break;
        }
        let v: f64 = rng.random();
        if v.ln() <= ht - upper {
            return LineDraw { t, rejections, fell_back: false };
        }
        rejections += 1;
        if ht.is_finite() && dt.is_finite() {
            hull.insert(t, ht, dt);
        }
    }
    let mut d = slice_draw(&|t| h(t).0, lo, hi, t0, scale, rng);
    d.fell_back = true;
    d
}

/// One slice-sampling update (stepping out, then shrinkage) for the density
/// `∝ exp(h(t))` on `(lo, hi)`, started at `t0`.
pub fn slice_draw<R: Rng>(h: &dyn Fn(f64) -> f64, lo: f64, hi: f64, t0: f64, width: f64, rng: &mut R) -> LineDraw {
    let level = h(t0) + rng.random::<f64>().max(f64::MIN_POSITIVE).ln();
    let w = width.max(1e-6);
    let mut a = t0 - rng.random::<f64>() * w;
    let mut b = a + w;
    for _ in 0..64 {
        if a <= lo || h(a) < level {
            break;
        }
        a -= w;
    }
    for _ in 0..64 {
        if b >= hi || h(b) < level {
            break;
        }
        b += w;
    }
    a = a.max(lo);
    b = b.min(hi);
    let mut shrinks = 0;
    loop {
        let t = a + rng.random::<f64>() * (b - a);
        if h(t) >= level {
            return LineDraw { t, rejections: shrinks, fell_back: false };
        }
        shrinks += 1;
        if t < t0 {
            a = t;
        } else {
            b = t;
        }
        if b - a < 1e-14 * (1.0 + t0.abs()) {
            return LineDraw { t: t0, rejections: shrinks, fell_back: false };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn ars_gaussian_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = |t: f64| (-0.5 * (t - 1.0) * (t - 1.0), -(t - 1.0));
        let xs: Vec<f64> = (0..40_000).map(|_| adaptive_rejection(&h, f64::NEG_INFINITY, f64::INFINITY, 0.0, 1.0, &mut rng).t).collect();
        let (m, v) = moments(&xs);
        assert!((m - 1.0).abs() < 0.02 && (v - 1.0).abs() < 0.03, "{m} {v}");
    }

    #[test]
    fn ars_truncated_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = |t: f64| (-t, -1.0);
        let xs: Vec<f64> = (0..40_000).map(|_| adaptive_rejection(&h, 0.0, f64::INFINITY, 0.5, 1.0, &mut rng).t).collect();
        let (m, v) = moments(&xs);
        assert!(xs.iter().all(|x| *x >= 0.0));
        assert!((m - 1.0).abs() < 0.03 && (v - 1.0).abs() < 0.05, "{m} {v}");
    }

    #[test]
    fn slice_double_well_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = |t: f64| -(t.powi(4) / 4.0 - t * t / 2.0);
        let mut t = 0.3;
        let mut xs = Vec::new();
        for _ in 0..60_000 {
            t = slice_draw(&h, f64::NEG_INFINITY, f64::INFINITY, t, 1.0, &mut rng).t;
            xs.push(t);
        }
        let (m, _) = moments(&xs);
        assert!(m.abs() < 0.05, "{m}");
    }
}
