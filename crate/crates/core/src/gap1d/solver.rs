use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{BandedSpd, Tridiagonal};
use crate::measures::mass_interval_with;
use crate::{Error, Result};

/// Largest mass allowed outside an unbounded grid, relative to the total.
pub const TAIL_TOL: f64 = 1e-10;

/// Axis-aligned cell-centred grid in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Cells per axis.
    pub resolution: usize,
    /// True when the grid boundary is the boundary of the support
    /// (no tail certificate needed).
    pub bounded: bool,
}

impl Grid {
    pub fn interval(lo: f64, hi: f64, resolution: usize) -> Self {
        Self { lo: vec![lo], hi: vec![hi], resolution, bounded: false }
    }

    /// The support itself is `[lo, hi]`.
    pub fn support(lo: f64, hi: f64, resolution: usize) -> Self {
        Self { lo: vec![lo], hi: vec![hi], resolution, bounded: true }
    }

    pub fn square(half_width: f64, resolution: usize) -> Self {
        Self { lo: vec![-half_width; 2], hi: vec![half_width; 2], resolution, bounded: false }
    }

    /// Grid carrying the mass of `e^{−φ}`: the region where
    /// `φ ≤ φ_min + 40` widened to `mean ± 8·std`.
    pub fn auto_1d(phi: &dyn Fn(f64) -> f64, resolution: usize) -> Self {
        let (a, b) = mass_interval_with(phi, 4096);
        Self::interval(a, b, resolution)
    }

    /// Symmetric square grid carrying the mass of `e^{−φ}` along both axes
    /// and both diagonals.
    pub fn auto_2d(phi: &dyn Fn(&[f64]) -> f64, resolution: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
        let mut half: f64 = 0.0;
        for d in dirs {
            let (a, b) = mass_interval_with(&|t| phi(&[t * d[0], t * d[1]]), 1024);
            half = half.max(a.abs().max(b.abs()) * d[0].abs().max(d[1].abs()));
        }
        Self::square(half, resolution)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.resolution as f64
    }

    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + (i as f64 + 0.5) * self.step(axis)
    }

    pub fn centers(&self, axis: usize) -> Vec<f64> {
        (0..self.resolution).map(|i| self.center(axis, i)).collect()
    }

    pub fn with_resolution(&self, resolution: usize) -> Self {
        Self { resolution, ..self.clone() }
    }
}

/// Spectral gap of the weighted Laplacian on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub lambda1: f64,
    pub poincare_constant: f64,
    /// Eigenfunction values at cell centres, normalized in the discrete
    /// `L²(μ)` norm.
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
    /// `‖S v − λ₁ v‖ / ‖v‖` for the symmetrized operator.
    pub residual: f64,
    /// `λ₁` at half resolution.
    pub coarse_lambda1: Option<f64>,
    /// Richardson estimate `|λ_N − λ_{N/2}| / 3`.
    pub discretization_error: f64,
    /// Richardson-extrapolated `λ₁`.
    pub extrapolated: f64,
    /// Discrete `∫ u dμ` of the eigenfunction.
    pub mean_defect: f64,
    pub grid: Grid,
}

impl SpectrumResult {
    /// Error bar on the Poincaré constant implied by the discretization error.
    pub fn constant_error(&self) -> f64 {
        self.discretization_error / (self.lambda1 * self.lambda1)
    }
}

struct Discrete1d {
    op: Tridiagonal,
    /// `√(mass_i)`, normalized.
    sqrt_w: Vec<f64>,
}

fn discretize_1d(phi: &dyn Fn(f64) -> f64, grid: &Grid) -> Result<Discrete1d> {
    let n = grid.resolution;
    let h = grid.step(0);
    let c: Vec<f64> = grid.centers(0).iter().map(|x| phi(*x)).collect();
    let pmin = c.iter().cloned().fold(f64::INFINITY, f64::min);
    if !pmin.is_finite() {
        return Err(Error::Validation("potential is not finite on the grid".into()));
    }
    let faces: Vec<f64> = (1..n).map(|i| phi(grid.lo[0] + i as f64 * h)).collect();
    let h2 = h * h;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let f = faces[i];
        diag[i] += (c[i] - f).exp() / h2;
        diag[i + 1] += (c[i + 1] - f).exp() / h2;
        off[i] = -(-f + 0.5 * (c[i] + c[i + 1])).exp() / h2;
    }
    let w: Vec<f64> = c.iter().map(|p| (-(p - pmin)).exp()).collect();
    let z: f64 = w.iter().sum();
    if !grid.bounded {
        tail_certificate(phi, grid, pmin, z * h)?;
    }
    let sqrt_w = w.iter().map(|v| (v / z).sqrt()).collect();
    Ok(Discrete1d { op: Tridiagonal { diag, off }, sqrt_w })
}

fn tail_certificate(phi: &dyn Fn(f64) -> f64, grid: &Grid, pmin: f64, total: f64) -> Result<()> {
    let (a, b) = (grid.lo[0], grid.hi[0]);
    let mut worst: f64 = 0.0;
    for (edge, out) in [(a, -1.0), (b, 1.0)] {
        let eps = 1e-4 * (1.0 + edge.abs());
        let slope = (phi(edge + out * eps) - phi(edge)) / eps;
        let dens = (-(phi(edge) - pmin)).exp();
        // Convex tail beyond the edge: mass ≤ density / slope.
        let tail = if slope > 0.0 { dens / slope } else if dens == 0.0 { 0.0 } else { f64::INFINITY };
        worst = worst.max(tail / total);
    }
    if worst > TAIL_TOL {
        return Err(Error::DomainTooSmall {
            message: format!("tail mass outside [{a}, {b}] may reach {worst:e}"),
            suggested: 2.0 * a.abs().max(b.abs()),
        });
    }
    Ok(())
}

fn solve_1d(phi: &dyn Fn(f64) -> f64, grid: &Grid) -> Result<(f64, Vec<f64>, f64, f64)> {
    let d = discretize_1d(phi, grid)?;
    let lambda = d.op.eigenvalue(1);
    let mut v = d.op.eigenvector(lambda);
    let dot: f64 = v.iter().zip(&d.sqrt_w).map(|(a, b)| a * b).sum();
    for (x, s) in v.iter_mut().zip(&d.sqrt_w) {
        *x -= dot * s;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let sv = d.op.mul(&v);
    let lambda_rq: f64 = sv.iter().zip(&v).map(|(a, b)| a * b).sum();
    let residual = sv.iter().zip(&v).map(|(a, b)| (a - lambda_rq * b).powi(2)).sum::<f64>().sqrt();
    // u = v / √w, normalized so that ∑ w u² = 1.
    let u: Vec<f64> = v.iter().zip(&d.sqrt_w).map(|(a, s)| if *s > 0.0 { a / s } else { 0.0 }).collect();
    let mean: f64 = v.iter().zip(&d.sqrt_w).map(|(a, s)| a * s).sum();
    Ok((lambda_rq, u, residual, mean.abs()))
}

/// Spectral gap `λ₁` of `−L = −(Δ − φ'·∇)` with zero-flux boundary on a 1D
/// grid, with a Richardson error estimate from the half-resolution grid.
pub fn neumann_gap(phi: &dyn Fn(f64) -> f64, grid: &Grid) -> Result<SpectrumResult> {
    if grid.dim() != 1 || grid.resolution < 16 {
        return Err(Error::Validation("one-dimensional grid with at least 16 cells required".into()));
    }
    let (lambda1, eigenfunction, residual, mean_defect) = solve_1d(phi, grid)?;
    let coarse = solve_1d(phi, &grid.with_resolution(grid.resolution / 2))?.0;
    let err = (lambda1 - coarse).abs() / 3.0;
    Ok(SpectrumResult {
        lambda1,
        poincare_constant: 1.0 / lambda1,
        eigenfunction,
        residual,
        coarse_lambda1: Some(coarse),
        discretization_error: err,
        extrapolated: (4.0 * lambda1 - coarse) / 3.0,
        mean_defect,
        grid: grid.clone(),
    })
}

/// Poincaré constant of `e^{−φ}` on an automatic grid with `resolution`
/// cells, without the Richardson pass.
pub fn slice_gap_1d(phi: &dyn Fn(f64) -> f64, resolution: usize) -> Result<f64> {
    let grid = Grid::auto_1d(phi, resolution);
    Ok(1.0 / solve_1d(phi, &grid)?.0)
}

/// Poincaré constant of the uniform measure on an interval.
pub fn interval_gap(lo: f64, hi: f64) -> f64 {
    let l = hi - lo;
    l * l / (std::f64::consts::PI * std::f64::consts::PI)
}

/// Low spectrum of the weighted Laplacian on a square grid.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum2d {
    /// Smallest nonzero eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    /// Eigenfunctions (cell values, row index `i·N + j` with `i` along the
    /// first axis), normalized in the discrete `L²(μ)` norm.
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Probability weight of each cell.
    #[serde(skip)]
    pub weights: Vec<f64>,
    pub grid: Grid,
    pub iterations: usize,
}

struct Discrete2d {
    n: usize,
    diag: Vec<f64>,
    // Coupling to (i+1, j) and (i, j+1).
    east: Vec<f64>,
    north: Vec<f64>,
    sqrt_w: Vec<f64>,
}

impl Discrete2d {
    fn mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                if i + 1 < n {
                    out[k] += self.east[k] * v[k + n];
                    out[k + n] += self.east[k] * v[k];
                }
                if j + 1 < n {
                    out[k] += self.north[k] * v[k + 1];
                    out[k + 1] += self.north[k] * v[k];
                }
            }
        }
        out
    }

    fn entry(&self, r: usize, c: usize) -> f64 {
        // r ≥ c
        if r == c {
            self.diag[r]
        } else if r == c + 1 && (c % self.n) + 1 < self.n {
            self.north[c]
        } else if r == c + self.n {
            self.east[c]
        } else {
            0.0
        }
    }
}

fn discretize_2d(phi: &(dyn Fn(&[f64]) -> f64 + Sync), grid: &Grid) -> Result<Discrete2d> {
    let n = grid.resolution;
    let (hx, hy) = (grid.step(0), grid.step(1));
    let xs = grid.centers(0);
    let ys = grid.centers(1);
    let c: Vec<f64> = (0..n * n).map(|k| phi(&[xs[k / n], ys[k % n]])).collect();
    let pmin = c.iter().cloned().fold(f64::INFINITY, f64::min);
    if !pmin.is_finite() {
        return Err(Error::Validation("potential is not finite on the grid".into()));
    }
    let mut diag = vec![0.0; n * n];
    let mut east = vec![0.0; n * n];
    let mut north = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            if i + 1 < n {
                let f = phi(&[grid.lo[0] + (i + 1) as f64 * hx, ys[j]]);
                diag[k] += (c[k] - f).exp() / (hx * hx);
                diag[k + n] += (c[k + n] - f).exp() / (hx * hx);
                east[k] = -(-f + 0.5 * (c[k] + c[k + n])).exp() / (hx * hx);
            }
            if j + 1 < n {
                let f = phi(&[xs[i], grid.lo[1] + (j + 1) as f64 * hy]);
                diag[k] += (c[k] - f).exp() / (hy * hy);
                diag[k + 1] += (c[k + 1] - f).exp() / (hy * hy);
                north[k] = -(-f + 0.5 * (c[k] + c[k + 1])).exp() / (hy * hy);
            }
        }
    }
    let w: Vec<f64> = c.iter().map(|p| (-(p - pmin)).exp()).collect();
    let z: f64 = w.iter().sum();
    if !grid.bounded {
        let mut edge: f64 = 0.0;
        for i in 0..n {
            for k in [i * n, i * n + n - 1, i, (n - 1) * n + i] {
                edge = edge.max(w[k] / z);
            }
        }
        // Edge cell weight bounds the mass per cell beyond the boundary.
        if edge * n as f64 > TAIL_TOL {
            return Err(Error::DomainTooSmall {
                message: format!("boundary cells carry relative mass {edge:e}"),
                suggested: 2.0 * grid.hi[0].abs().max(grid.lo[0].abs()),
            });
        }
    }
    let sqrt_w = w.iter().map(|v| (v / z).sqrt()).collect();
    Ok(Discrete2d { n, diag, east, north, sqrt_w })
}

fn orthonormalize(vs: &mut [Vec<f64>], against: &[f64]) {
    for i in 0..vs.len() {
        for _ in 0..2 {
            let d: f64 = vs[i].iter().zip(against).map(|(a, b)| a * b).sum();
            vs[i].iter_mut().zip(against).for_each(|(a, b)| *a -= d * b);
            for j in 0..i {
                let (head, tail) = vs.split_at_mut(i);
                let d: f64 = tail[0].iter().zip(&head[j]).map(|(a, b)| a * b).sum();
                tail[0].iter_mut().zip(&head[j]).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = vs[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        vs[i].iter_mut().for_each(|x| *x /= norm);
    }
}

/// The `nev` smallest nonzero eigenvalues of `−L` on a 2D grid by shifted
/// inverse subspace iteration with Rayleigh-Ritz, deflating constants.
pub fn neumann_gap_2d(phi: &(dyn Fn(&[f64]) -> f64 + Sync), grid: &Grid, nev: usize) -> Result<Spectrum2d> {
    if grid.dim() != 2 || grid.resolution < 16 {
        return Err(Error::Validation("two-dimensional grid with at least 16 cells per axis required".into()));
    }
    let d = discretize_2d(phi, grid)?;
    let n = d.n;
    let size = n * n;
    let shift = 1e-2;
    let chol = BandedSpd::factor(size, n, |r, c| d.entry(r, c) + if r == c { shift } else { 0.0 })
        .ok_or_else(|| Error::Validation("discrete operator is not positive".into()))?;
    let k = (nev + 4).max(6);
    let mut rng = ChaCha8Rng::seed_from_u64(0x2d);
    let mut vs: Vec<Vec<f64>> = (0..k).map(|_| (0..size).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    orthonormalize(&mut vs, &d.sqrt_w);
    let mut lambdas = vec![0.0; k];
    let mut residuals = vec![f64::INFINITY; k];
    let mut iterations = 0;
    for it in 0..600 {
        iterations = it + 1;
        let mut ws: Vec<Vec<f64>> = vs.iter().map(|v| chol.solve(v)).collect();
        orthonormalize(&mut ws, &d.sqrt_w);
        let sw: Vec<Vec<f64>> = ws.iter().map(|w| d.mul(w)).collect();
        let h = DMatrix::from_fn(k, k, |a, b| sw[a].iter().zip(&ws[b]).map(|(x, y)| x * y).sum());
        let eig = SymmetricEigen::new((&h + h.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].partial_cmp(&eig.eigenvalues[*b]).unwrap());
        let mut new_vs = Vec::with_capacity(k);
        let mut new_sv = Vec::with_capacity(k);
        for &o in &order {
            let mut v = vec![0.0; size];
            let mut s = vec![0.0; size];
            for a in 0..k {
                let c = eig.eigenvectors[(a, o)];
                for p in 0..size {
                    v[p] += c * ws[a][p];
                    s[p] += c * sw[a][p];
                }
            }
            new_vs.push(v);
            new_sv.push(s);
        }
        for (r, &o) in order.iter().enumerate() {
            lambdas[r] = eig.eigenvalues[o];
            residuals[r] = new_sv[r]
                .iter()
                .zip(&new_vs[r])
                .map(|(s, v)| (s - lambdas[r] * v).powi(2))
                .sum::<f64>()
                .sqrt();
        }
        vs = new_vs;
        if residuals[..nev].iter().all(|r| *r <= 1e-10 * (1.0 + lambdas[nev - 1])) {
            break;
        }
    }
    let weights: Vec<f64> = d.sqrt_w.iter().map(|s| s * s).collect();
    let eigenfunctions = vs[..nev]
        .iter()
        .map(|v| v.iter().zip(&d.sqrt_w).map(|(a, s)| if *s > 0.0 { a / s } else { 0.0 }).collect())
        .collect();
    Ok(Spectrum2d {
        lambdas: lambdas[..nev].to_vec(),
        eigenfunctions,
        residuals: residuals[..nev].to_vec(),
        weights,
        grid: grid.clone(),
        iterations,
    })
}

/// Applies the symmetrized 2D operator to cell values `u` (given as
/// eigenfunction values) and returns `‖(−L − λ)u‖ / ‖u‖` in `L²(μ)`.
pub fn eigen_residual_2d(phi: &(dyn Fn(&[f64]) -> f64 + Sync), grid: &Grid, u: &[f64], lambda: f64) -> Result<f64> {
    let d = discretize_2d(phi, grid)?;
    let v: Vec<f64> = u.iter().zip(&d.sqrt_w).map(|(a, s)| a * s).collect();
    let sv = d.mul(&v);
    let num = sv.iter().zip(&v).map(|(s, x)| (s - lambda * x).powi(2)).sum::<f64>().sqrt();
    let den = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(num / den)
}
