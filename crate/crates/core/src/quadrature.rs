//! Adaptive Gauss-Kronrod quadrature, semi-infinite truncation and
//! Gauss-Legendre tensor rules.

// Kronrod 15-point nodes (positive half) and weights, with the embedded
// Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration on `[a, b]`, splitting first at the
/// supplied breakpoints.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts = vec![lo];
    let mut bps: Vec<f64> = breakpoints.iter().cloned().filter(|&p| p > lo && p < hi).collect();
    bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bps.dedup();
    pts.extend(bps);
    pts.push(hi);

    // Interval heap keyed on error; a plain Vec is adequate for the sizes here.
    let mut intervals: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    for _ in 0..4000 {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (a0, b0, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (a0 + b0);
        if m <= a0 || m >= b0 {
            break;
        }
        let (v1, e1) = gk15(&f, a0, m);
        let (v2, e2) = gk15(&f, m, b0);
        intervals.push((a0, m, v1, e1));
        intervals.push((m, b0, v2, e2));
    }
    // Deterministic summation order: left to right.
    intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let value: f64 = intervals.iter().map(|t| t.2).sum();
    let error: f64 = intervals.iter().map(|t| t.3).sum();
    QuadResult { value: sign * value, error }
}

/// Outcome of a semi-infinite integral with truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailResult {
    pub value: f64,
    pub error: f64,
    /// Truncation point actually used.
    pub cutoff: f64,
    /// True if the integrand failed to decay (integral treated as infinite).
    pub divergent: bool,
}

/// Integrate a nonnegative integrand over `[a, ∞)`. The cutoff doubles until
/// the integrand drops below `floor`. Once the cutoff exceeds `scale`, an
/// integrand that fails to decrease over three consecutive doublings is
/// flagged divergent.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    breakpoints: &[f64],
    floor: f64,
    scale: f64,
) -> TailResult {
    let scale = scale.max(1.0);
    let mut width = 1.0_f64;
    let mut last = f(a + width);
    let mut non_decreasing = 0;
    loop {
        let val = f(a + width);
        if val < floor {
            break;
        }
        if width > scale {
            if val >= last {
                non_decreasing += 1;
            } else {
                non_decreasing = 0;
            }
        }
        last = val;
        if non_decreasing >= 3 || width > scale * 1e12 {
            return TailResult { value: f64::INFINITY, error: 0.0, cutoff: a + width, divergent: true };
        }
        width *= 2.0;
    }
    // Split the range geometrically so the adaptive rule sees the decay.
    let mut bps: Vec<f64> = breakpoints.to_vec();
    let mut w = 1.0;
    while w < width {
        bps.push(a + w);
        w *= 2.0;
    }
    let r = integrate(&f, a, a + width, &bps, 1e-15, 1e-13);
    TailResult { value: r.value, error: r.error, cutoff: a + width, divergent: false }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` panels of
/// `order` points each. Nodes are symmetric about the midpoint.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(c + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_exp() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &[], 1e-14, 1e-14);
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-12);
        let r = integrate(|x| (-x).exp(), 0.0, 30.0, &[], 1e-15, 1e-14);
        assert!((r.value - (1.0 - (-30.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn kink_handled_with_breakpoint() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-15, 1e-15);
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let r = integrate_to_infinity(|t| (-t * t).exp(), 0.0, &[], 1e-16, 1.0);
        assert!(!r.divergent);
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_divergence_flagged() {
        let r = integrate_to_infinity(|_| 1.0, 0.0, &[], 1e-14, 10.0);
        assert!(r.divergent);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let (x, w) = composite_rule(-1.0, 3.0, 7, 8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 28.0 / 3.0).abs() < 1e-12);
    }
}
