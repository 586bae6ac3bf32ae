use serde::Serialize;

use super::solver::{eigen_residual_2d, neumann_gap, neumann_gap_2d, slice_gap_1d, Grid, Spectrum2d};
use crate::linalg::min_eigenvalue;
use crate::measures::SmoothPotential;
use crate::symmetry::{fix_subspace, Isometry, Subspace, MATRIX_TOL};
use crate::{Error, Result};

/// Outcome of the anti-invariant eigenfunction check on a 2D potential.
#[derive(Debug, Clone, Serialize)]
pub struct AntiInvariantReport {
    pub lambda1: f64,
    pub poincare_constant: f64,
    /// Multiplicity of `λ₁` on the grid.
    pub multiplicity: usize,
    /// Largest `‖u∘R_j − u‖` over a basis of the `λ₁` eigenspace.
    pub phi_norm: f64,
    /// Eigen-residual of that `φ` relative to its norm.
    pub phi_residual: f64,
    /// Index of the isometry achieving `phi_norm`.
    pub isometry: usize,
    /// `|λ₁(N) − λ₁(N/2)| / 3`, also used as the grid tolerance.
    pub grid_tolerance: f64,
    /// `max_i sup_x c_P(μ_{x,E_i})` over the scanned slices.
    pub max_slice_constant: f64,
    /// Tolerance on Poincaré constants for the slice-bound comparison.
    pub constant_tolerance: f64,
    pub slice_bound_holds: bool,
    pub convexity_floor_observed: f64,
}

// Cell permutation realizing a signed permutation isometry on a symmetric
// square grid: `perm[k]` is the cell containing `R x_k`.
fn cell_map(r: &Isometry, n: usize) -> Option<Vec<usize>> {
    let sp = r.as_signed_permutation()?;
    let mut out = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let idx = [i, j];
            let mut img = [0usize; 2];
            for (col, &(row, sign)) in sp.iter().enumerate() {
                img[row] = if sign > 0.0 { idx[col] } else { n - 1 - idx[col] };
            }
            out[i * n + j] = img[0] * n + img[1];
        }
    }
    Some(out)
}

/// For a strictly convex, `R_j`-invariant potential on ℝ² with
/// `⋂ Fix(R_j) = {0}`, computes the `λ₁` eigenspace and checks that some
/// `φ = u∘R_j − u` is a nonzero eigenfunction; also compares `c_P(μ)` with
/// the largest Poincaré constant of the slices `x + Fix(R_j)^⊥`.
pub fn anti_invariant_eigenfunction_check(
    potential: &SmoothPotential,
    isometries: &[Isometry],
    resolution: usize,
    slice_anchors: usize,
) -> Result<AntiInvariantReport> {
    if potential.dim != 2 {
        return Err(Error::Validation("anti-invariant check needs a potential on R^2".into()));
    }
    let phi = |x: &[f64]| potential.value_at(x);
    let grid = Grid::auto_2d(&phi, resolution);
    let probe = 33;
    let mut floor = f64::INFINITY;
    for i in 0..probe {
        for j in 0..probe {
            let x = [
                grid.lo[0] + (grid.hi[0] - grid.lo[0]) * i as f64 / (probe - 1) as f64,
                grid.lo[1] + (grid.hi[1] - grid.lo[1]) * j as f64 / (probe - 1) as f64,
            ];
            floor = floor.min(min_eigenvalue(&potential.hessian_at(&x)));
        }
    }
    if floor <= 0.0 {
        return Err(Error::Precondition(format!("potential is not strictly convex on the grid (min eigenvalue {floor:e})")));
    }
    let mut common = Subspace::full(2);
    for r in isometries {
        let (fix, _) = fix_subspace(r, MATRIX_TOL)?;
        // Intersection through complements.
        common = common.complement().sum(&fix.complement()).complement();
    }
    if common.dim() != 0 {
        return Err(Error::Precondition("the isometries have a common fixed direction".into()));
    }

    let nev = 4;
    let fine: Spectrum2d = neumann_gap_2d(&phi, &grid, nev)?;
    let coarse = neumann_gap_2d(&phi, &grid.with_resolution(resolution / 2), 1)?;
    let lambda1 = fine.lambdas[0];
    let tol = (lambda1 - coarse.lambdas[0]).abs() / 3.0;
    let multiplicity = fine.lambdas.iter().take_while(|l| (*l - lambda1).abs() <= 1e-6 * lambda1).count();

    let n = grid.resolution;
    let mut best = (0.0, f64::INFINITY, 0usize);
    for (ri, r) in isometries.iter().enumerate() {
        let perm = cell_map(r, n)
            .ok_or_else(|| Error::Unsupported("isometries must be signed permutations for grid evaluation".into()))?;
        let invariant = (0..n * n).all(|k| (phi(&[grid.center(0, k / n), grid.center(1, k % n)]) - phi(&[grid.center(0, perm[k] / n), grid.center(1, perm[k] % n)])).abs() < 1e-9);
        if !invariant {
            return Err(Error::Precondition(format!("potential is not invariant under isometry {ri}")));
        }
        for u in &fine.eigenfunctions[..multiplicity] {
            let f: Vec<f64> = (0..n * n).map(|k| u[perm[k]] - u[k]).collect();
            let norm = f.iter().zip(&fine.weights).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
            if norm > best.0 {
                let res = eigen_residual_2d(&phi, &grid, &f, lambda1)?;
                best = (norm, res, ri);
            }
        }
    }

    // Slice constants along x + Fix(R_j)^⊥ for anchors x on Fix(R_j).
    let mut max_slice: f64 = 0.0;
    let mut slice_err: f64 = 0.0;
    let half = grid.hi[0];
    for r in isometries {
        let (fix, moving) = fix_subspace(r, MATRIX_TOL)?;
        if moving.dim() != 1 {
            return Err(Error::Unsupported("slices of dimension other than one".into()));
        }
        let e: Vec<f64> = moving.basis().column(0).iter().cloned().collect();
        let anchors: Vec<Vec<f64>> = if fix.dim() == 0 {
            vec![vec![0.0, 0.0]]
        } else {
            let f: Vec<f64> = fix.basis().column(0).iter().cloned().collect();
            (0..slice_anchors)
                .map(|k| {
                    let s = -half + 2.0 * half * k as f64 / (slice_anchors.max(2) - 1) as f64;
                    vec![s * f[0], s * f[1]]
                })
                .collect()
        };
        for x in anchors {
            let slice = |t: f64| phi(&[x[0] + t * e[0], x[1] + t * e[1]]);
            let c = slice_gap_1d(&slice, 1024)?;
            if c > max_slice {
                max_slice = c;
                let g = Grid::auto_1d(&slice, 1024);
                slice_err = neumann_gap(&slice, &g)?.constant_error();
            }
        }
    }
    let cp = 1.0 / lambda1;
    let constant_tol = tol / (lambda1 * lambda1) + slice_err + 1e-9;
    Ok(AntiInvariantReport {
        lambda1,
        poincare_constant: cp,
        multiplicity,
        phi_norm: best.0,
        phi_residual: best.1,
        isometry: best.2,
        grid_tolerance: tol,
        max_slice_constant: max_slice,
        constant_tolerance: constant_tol,
        slice_bound_holds: cp <= max_slice + constant_tol,
        convexity_floor_observed: floor,
    })
}
