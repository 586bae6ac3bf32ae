use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{canonical_basis, column_space, max_abs, null_space, orthogonal_complement, projector};
use crate::{Error, Result};

/// Tolerance for orthogonality and matrix dedup.
pub const MATRIX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryKind {
    Reflection,
    Rotation,
    General,
}

/// An orthogonal matrix acting on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    pub matrix: DMatrix<f64>,
    pub kind: IsometryKind,
}

impl Isometry {
    /// Validates orthogonality and classifies the matrix.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Validation(format!(
                "isometry must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows();
        let defect = max_abs(&(&matrix * matrix.transpose() - DMatrix::identity(n, n)));
        if defect > MATRIX_TOL {
            return Err(Error::Validation(format!(
                "matrix is not orthogonal: max |M Mᵀ - I| entry = {defect:e}"
            )));
        }
        let kind = classify(&matrix);
        Ok(Self { matrix, kind })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n), kind: IsometryKind::General }
    }

    /// Orthogonal symmetry across the hyperplane `u^⊥`.
    pub fn reflection(u: &[f64]) -> Self {
        let u = DVector::from_column_slice(u);
        let n = u.len();
        let m = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / u.norm_squared());
        Self { matrix: m, kind: IsometryKind::Reflection }
    }

    /// Rotation by `angle` in the plane of coordinates `(i, j)`.
    pub fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        let kind = classify(&m);
        Self { matrix: m, kind }
    }

    /// Permutation matrix sending `e_k` to `e_{perm[k]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &p) in perm.iter().enumerate() {
            m[(p, k)] = 1.0;
        }
        let kind = classify(&m);
        Self { matrix: m, kind }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum()).collect()
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        let m = &self.matrix * &other.matrix;
        let kind = classify(&m);
        Isometry { matrix: m, kind }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { matrix: self.matrix.transpose(), kind: self.kind }
    }

    pub fn distance(&self, other: &Isometry) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Signed permutation structure, if the matrix has exactly one ±1 entry
    /// per row and column: `(target index, sign)` for each column.
    pub fn as_signed_permutation(&self) -> Option<Vec<(usize, f64)>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut hit = None;
            for i in 0..n {
                let v = self.matrix[(i, j)];
                if (v.abs() - 1.0).abs() < MATRIX_TOL {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some((i, v.signum()));
                } else if v.abs() > MATRIX_TOL {
                    return None;
                }
            }
            out.push(hit?);
        }
        Some(out)
    }
}

fn classify(m: &DMatrix<f64>) -> IsometryKind {
    let n = m.nrows();
    let fix = null_space(&(m - DMatrix::identity(n, n)), MATRIX_TOL).ncols();
    let det = m.clone().determinant();
    if fix + 1 == n && det < 0.0 {
        IsometryKind::Reflection
    } else if n >= 2 && fix + 2 == n && det > 0.0 {
        IsometryKind::Rotation
    } else {
        IsometryKind::General
    }
}

/// A linear subspace given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
    projector: DMatrix<f64>,
}

impl Subspace {
    /// Span of the columns of `m`, orthonormalized.
    pub fn span(m: &DMatrix<f64>) -> Self {
        Self::from_orthonormal(column_space(m, 1e-10))
    }

    /// Span of a list of vectors in ℝⁿ.
    pub fn span_vectors(n: usize, vectors: &[Vec<f64>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let cols: Vec<DVector<f64>> = vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
        Self::span(&DMatrix::from_columns(&cols))
    }

    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        let projector = projector(&basis);
        Self { basis, projector }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_orthonormal(DMatrix::zeros(n, 0))
    }

    pub fn full(n: usize) -> Self {
        Self::from_orthonormal(DMatrix::identity(n, n))
    }

    /// Coordinate subspace spanned by `e_k`, `k ∈ idx`.
    pub fn coordinates(n: usize, idx: &[usize]) -> Self {
        let mut b = DMatrix::zeros(n, idx.len());
        for (c, &k) in idx.iter().enumerate() {
            b[(k, c)] = 1.0;
        }
        Self::from_orthonormal(b)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let n = self.ambient();
        (0..n).map(|i| (0..n).map(|j| self.projector[(i, j)] * v[j]).sum()).collect()
    }

    /// Coordinates of `v` in the basis (`Bᵀ v`).
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|c| (0..self.ambient()).map(|i| self.basis[(i, c)] * v[i]).sum()).collect()
    }

    /// Point `B t` of the ambient space.
    pub fn embed(&self, t: &[f64]) -> Vec<f64> {
        (0..self.ambient()).map(|i| (0..self.dim()).map(|c| self.basis[(i, c)] * t[c]).sum()).collect()
    }

    pub fn complement(&self) -> Subspace {
        Subspace::from_orthonormal(orthogonal_complement(&self.basis, self.ambient()))
    }

    /// Image under an isometry.
    pub fn image(&self, g: &Isometry) -> Subspace {
        Subspace::from_orthonormal(canonical_basis(&g.matrix * &self.basis))
    }

    /// Max-abs distance between projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        max_abs(&(&self.projector - &other.projector))
    }

    /// Smallest subspace containing both.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let n = self.ambient();
        if other.dim() == 0 {
            return self.clone();
        }
        let resid = other.basis() - &self.projector * other.basis();
        let extra = column_space(&resid, 1e-8);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for c in 0..self.dim() {
            cols.push(self.basis.column(c).into_owned());
        }
        for c in 0..extra.ncols() {
            cols.push(extra.column(c).into_owned());
        }
        if cols.is_empty() {
            return Subspace::zero(n);
        }
        Subspace::from_orthonormal(canonical_basis(DMatrix::from_columns(&cols)))
    }
}

/// Fixed subspace of `r` and its orthogonal complement.
pub fn fix_subspace(r: &Isometry, tol: f64) -> Result<(Subspace, Subspace)> {
    let n = r.dim();
    let defect = max_abs(&(&r.matrix * r.matrix.transpose() - DMatrix::identity(n, n)));
    if defect > tol.max(MATRIX_TOL) {
        return Err(Error::Validation(format!(
            "matrix is not orthogonal: max |R Rᵀ - I| entry = {defect:e}"
        )));
    }
    let fix = Subspace::from_orthonormal(null_space(&(&r.matrix - DMatrix::identity(n, n)), tol));
    let comp = fix.complement();
    Ok((fix, comp))
}

/// Complement of the fixed subspace, `E = Fix(R)^⊥`.
pub fn moving_subspace(r: &Isometry) -> Subspace {
    fix_subspace(r, MATRIX_TOL).map(|p| p.1).unwrap_or_else(|_| Subspace::full(r.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_fix_and_complement() {
        let r = Isometry::reflection(&[1.0, 0.0, 0.0]);
        assert_eq!(r.kind, IsometryKind::Reflection);
        let (fix, comp) = fix_subspace(&r, 1e-9).unwrap();
        assert_eq!(fix.dim(), 2);
        assert_eq!(comp.dim(), 1);
        assert!(comp.distance(&Subspace::coordinates(3, &[0])) < 1e-12);
        assert!(fix.distance(&Subspace::coordinates(3, &[1, 2])) < 1e-12);
    }

    #[test]
    fn identity_and_rotation() {
        let (fix, comp) = fix_subspace(&Isometry::identity(4), 1e-9).unwrap();
        assert_eq!((fix.dim(), comp.dim()), (4, 0));
        let r = Isometry::plane_rotation(2, 0, 1, 2.0 * std::f64::consts::PI / 3.0);
        assert_eq!(r.kind, IsometryKind::Rotation);
        let (fix, comp) = fix_subspace(&r, 1e-9).unwrap();
        assert_eq!((fix.dim(), comp.dim()), (0, 2));
    }

    #[test]
    fn non_orthogonal_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        match Isometry::new(m) {
            Err(Error::Validation(msg)) => assert!(msg.contains("1e-1") || msg.contains("e-")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn signed_permutation_detected() {
        let r = Isometry::reflection(&[1.0, -1.0, 0.0]);
        let sp = r.as_signed_permutation().unwrap();
        assert_eq!(sp[0], (1, 1.0));
        assert!(Isometry::plane_rotation(2, 0, 1, 0.3).as_signed_permutation().is_none());
    }
}
