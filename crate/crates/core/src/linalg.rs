//! Dense and structured linear algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Orthonormal basis (as columns) of the column space of `m`: pivoted
/// Gram-Schmidt with reorthogonalization, stopping when the largest
/// remaining residual norm is below `tol`.
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    let mut resid: Vec<DVector<f64>> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while basis.len() < rows {
        let (best, norm) = resid
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.norm()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || norm <= tol {
            break;
        }
        let mut q = resid[best].clone();
        for _ in 0..2 {
            for u in &basis {
                let c = u.dot(&q);
                q -= u * c;
            }
        }
        let qn = q.norm();
        if qn <= tol {
            resid[best].fill(0.0);
            continue;
        }
        q /= qn;
        for v in resid.iter_mut() {
            let c = q.dot(v);
            *v -= &q * c;
        }
        basis.push(q);
    }
    if basis.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        canonical_basis(DMatrix::from_columns(&basis))
    }
}

/// Null space of a square matrix: orthogonal complement of its row space,
/// with rank decided at threshold `tol`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let row_space = column_space(&m.transpose(), tol);
    orthogonal_complement(&row_space, n)
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// (columns assumed orthonormal) in dimension `n`.
pub fn orthogonal_complement(basis: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let p = DMatrix::<f64>::identity(n, n) - basis * basis.transpose();
    column_space(&p, 1e-6)
}

/// Re-orthonormalize a basis deterministically (modified Gram-Schmidt with
/// a sign convention: first significant entry positive).
pub fn canonical_basis(b: DMatrix<f64>) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(b.ncols());
    for j in 0..b.ncols() {
        let mut v = b.column(j).into_owned();
        for u in &out {
            let c = u.dot(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm < 1e-12 {
            continue;
        }
        v /= norm;
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-9) {
            if *first < 0.0 {
                v = -v;
            }
        }
        out.push(v);
    }
    if out.is_empty() {
        DMatrix::zeros(b.nrows(), 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// `B Bᵀ` for a column-orthonormal `B`.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// Symmetric inverse square root of an SPD matrix. Returns the matrix and
/// the smallest eigenvalue of the input.
pub fn inverse_sqrt(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = eig.eigenvalues.map(|l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt());
    let v = &eig.eigenvectors;
    (v * DMatrix::from_diagonal(&d) * v.transpose(), min)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for k in 1..self.diag.len() {
            let qq = if q.abs() < 1e-300 { 1e-300_f64.copysign(q) } else { q };
            q = self.diag[k] - x - self.off[k - 1] * self.off[k - 1] / qq;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n {
            let r = if k > 0 { self.off[k - 1].abs() } else { 0.0 }
                + if k + 1 < n { self.off[k].abs() } else { 0.0 };
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        lo -= 1e-12 * scale;
        hi += 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * v[k];
                if k > 0 {
                    s += self.off[k - 1] * v[k - 1];
                }
                if k + 1 < n {
                    s += self.off[k] * v[k + 1];
                }
                s
            })
            .collect()
    }

    /// Solve `(T - shift) x = b` with partial pivoting (tridiagonal LU).
    pub fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        // Banded LU with pivoting: store up to two super-diagonals.
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - shift).collect();
        let mut u1: Vec<f64> = self.off.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l: Vec<f64> = self.off.clone();
        let mut rhs = b.to_vec();
        for k in 0..n.saturating_sub(1) {
            if l[k].abs() > d[k].abs() {
                // swap rows k and k+1
                let (a0, a1, a2) = (d[k], u1[k], u2[k]);
                d[k] = l[k];
                u1[k] = d[k + 1];
                u2[k] = u1[k + 1];
                l[k] = a0;
                d[k + 1] = a1;
                u1[k + 1] = a2;
                rhs.swap(k, k + 1);
            }
            let piv = if d[k].abs() < 1e-300 { 1e-300 } else { d[k] };
            let m = l[k] / piv;
            l[k] = m;
            d[k + 1] -= m * u1[k];
            u1[k + 1] -= m * u2[k];
            rhs[k + 1] -= m * rhs[k];
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = rhs[k];
            if k + 1 < n {
                s -= u1[k] * x[k + 1];
            }
            if k + 2 < n {
                s -= u2[k] * x[k + 2];
            }
            let piv = if d[k].abs() < 1e-300 { 1e-300 } else { d[k] };
            x[k] = s / piv;
        }
        x
    }

    /// Eigenvector for an (accurately known) eigenvalue via inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let (lo, hi) = self.bounds();
        let shift = lambda + 1e-10 * (hi - lo).abs().max(1.0);
        let mut v: Vec<f64> = (0..n).map(|k| 1.0 + 0.01 * ((k * 7919) % 101) as f64).collect();
        for _ in 0..6 {
            let mut w = self.solve_shifted(shift, &v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut w {
                *x /= norm;
            }
            v = w;
        }
        v
    }
}

/// Symmetric positive definite banded matrix stored by lower bands:
/// `band[k][i]` holds entry `(i + k, i)`.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    // row-major storage of L: l[i * (bw + 1) + k] = L(i, i - k)
    l: Vec<f64>,
}

impl BandedSpd {
    /// Cholesky factorization of a symmetric matrix given column entries
    /// `entry(i, j)` for `0 <= i - j <= bw`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Option<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                let mut s = entry(i, j);
                let kmin = jmin.max(j.saturating_sub(bw));
                for k in kmin..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Some(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_eigenvalues_match_dense() {
        let t = Tridiagonal {
            diag: vec![2.0, 3.0, 1.0, 4.0, 2.5],
            off: vec![0.5, -1.0, 0.3, 0.7],
        };
        let mut dense = DMatrix::<f64>::zeros(5, 5);
        for k in 0..5 {
            dense[(k, k)] = t.diag[k];
            if k < 4 {
                dense[(k, k + 1)] = t.off[k];
                dense[(k + 1, k)] = t.off[k];
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(dense.clone()).eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, e) in ev.iter().enumerate() {
            assert!((t.eigenvalue(k) - e).abs() < 1e-12);
            let v = t.eigenvector(*e);
            let tv = t.mul(&v);
            let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-9, "residual {res}");
        }
    }

    #[test]
    fn banded_cholesky_solves() {
        let n = 30;
        let bw = 3;
        let entry = |i: usize, j: usize| if i == j { 4.0 + i as f64 * 0.1 } else { -1.0 / (1 + i - j) as f64 };
        let f = BandedSpd::factor(n, bw, entry).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let (a, c) = if i >= j { (i, j) } else { (j, i) };
                if a - c <= bw {
                    s += entry(a, c) * x[j];
                }
            }
            assert!((s - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn null_space_of_reflection_minus_identity() {
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0]));
        let ns = null_space(&(r - DMatrix::identity(3, 3)), 1e-9);
        assert_eq!(ns.ncols(), 2);
        let comp = orthogonal_complement(&ns, 3);
        assert_eq!(comp.ncols(), 1);
        assert!((comp[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }
}
