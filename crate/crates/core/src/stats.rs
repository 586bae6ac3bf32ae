//! Block jackknife standard errors.

use serde::Serialize;

/// Number of contiguous blocks used by every jackknife estimate.
pub const JACKKNIFE_BLOCKS: usize = 50;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }

    /// True when `target` lies within `k` standard errors (with an absolute
    /// floor for exact estimates).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + 1e-12 * target.abs().max(1.0)
    }
}

/// Leave-one-block-out jackknife for a statistic that is a smooth function
/// of feature means. `features[k][i]` is feature `k` of observation `i`.
/// The statistic receives the vector of feature means and the number of
/// observations that produced them.
pub fn jackknife(features: &[Vec<f64>], stat: impl Fn(&[f64], usize) -> f64) -> Estimate {
    let k = features.len();
    let n = features.first().map_or(0, |f| f.len());
    if n == 0 {
        return Estimate { value: f64::NAN, std_error: f64::NAN };
    }
    let blocks = JACKKNIFE_BLOCKS.min(n);
    let mut block_sums = vec![vec![0.0; k]; blocks];
    let mut block_counts = vec![0usize; blocks];
    for i in 0..n {
        let b = i * blocks / n;
        block_counts[b] += 1;
        for (j, f) in features.iter().enumerate() {
            block_sums[b][j] += f[i];
        }
    }
    let total: Vec<f64> = (0..k).map(|j| block_sums.iter().map(|s| s[j]).sum()).collect();
    let means: Vec<f64> = total.iter().map(|t| t / n as f64).collect();
    let value = stat(&means, n);
    if blocks < 2 {
        return Estimate { value, std_error: f64::INFINITY };
    }
    let loo: Vec<f64> = (0..blocks)
        .map(|b| {
            let m = n - block_counts[b];
            let mm: Vec<f64> = (0..k).map(|j| (total[j] - block_sums[b][j]) / m as f64).collect();
            stat(&mm, m)
        })
        .collect();
    let bar = loo.iter().sum::<f64>() / blocks as f64;
    let ss: f64 = loo.iter().map(|t| (t - bar).powi(2)).sum();
    let se = ((blocks as f64 - 1.0) / blocks as f64 * ss).sqrt();
    Estimate { value, std_error: se }
}

/// Sample mean with jackknife standard error.
pub fn mean(values: &[f64]) -> Estimate {
    jackknife(&[values.to_vec()], |m, _| m[0])
}

/// Unbiased sample variance with jackknife standard error. Values are
/// shifted by the first observation so a constant input yields exactly 0.
pub fn variance(values: &[f64]) -> Estimate {
    if values.len() < 2 {
        return Estimate { value: 0.0, std_error: f64::INFINITY };
    }
    let shift = values[0];
    let d: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let d2: Vec<f64> = d.iter().map(|v| v * v).collect();
    jackknife(&[d, d2], |m, n| {
        let v = m[1] - m[0] * m[0];
        v * n as f64 / (n as f64 - 1.0)
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_zero_variance() {
        let v = vec![0.1; 1000];
        let e = variance(&v);
        assert_eq!(e.value, 0.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn jackknife_of_mean_matches_classical_se() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>() - 0.5).collect();
        let e = mean(&v);
        let sd = (1.0f64 / 12.0).sqrt();
        let classical = sd / (v.len() as f64).sqrt();
        assert!((e.std_error / classical - 1.0).abs() < 0.5);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_log_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
