use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::group::{FiniteGroup, GeneratorSet};
use super::isometry::{moving_subspace, Subspace};
use crate::linalg::max_abs;
use crate::{Error, Result};

/// Residual tolerance for a decomposition of the identity.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DecompositionTerm {
    pub coefficient: f64,
    pub subspace: Subspace,
}

/// Weights `c_i` and subspaces `E_i` with `∑ c_i P_{E_i} = P_E`.
#[derive(Debug, Clone)]
pub struct IdentityDecomposition {
    pub terms: Vec<DecompositionTerm>,
    pub target: Subspace,
    /// Orbit label of each term; coefficients are constant on orbits.
    pub orbit_labels: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub terms: usize,
    pub target_dim: usize,
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub trace_defect: f64,
}

impl IdentityDecomposition {
    pub fn new(terms: Vec<DecompositionTerm>, target: Subspace, orbit_labels: Vec<usize>) -> Result<Self> {
        if terms.len() != orbit_labels.len() {
            return Err(Error::Validation("one orbit label per term is required".into()));
        }
        if terms.iter().any(|t| t.subspace.ambient() != target.ambient()) {
            return Err(Error::Validation("term and target dimensions differ".into()));
        }
        Ok(Self { terms, target, orbit_labels })
    }

    pub fn ambient(&self) -> usize {
        self.target.ambient()
    }

    pub fn sum(&self) -> DMatrix<f64> {
        let n = self.ambient();
        let mut s = DMatrix::zeros(n, n);
        for t in &self.terms {
            s += t.subspace.projector() * t.coefficient;
        }
        s
    }

    /// `‖∑ c_i P_{E_i} − P_E‖_max`.
    pub fn residual(&self) -> f64 {
        max_abs(&(self.sum() - self.target.projector()))
    }

    /// `|∑ c_i dim E_i − dim E|`.
    pub fn trace_defect(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.coefficient * t.subspace.dim() as f64).sum();
        (s - self.target.dim() as f64).abs()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.terms.iter().map(|t| t.subspace.dim()).max().unwrap_or(0)
    }

    /// Number of distinct subspaces among the `E_i`.
    pub fn distinct_subspaces(&self) -> usize {
        let mut reps: Vec<&Subspace> = Vec::new();
        for t in &self.terms {
            if !reps.iter().any(|r| r.distance(&t.subspace) < DECOMPOSITION_TOL) {
                reps.push(&t.subspace);
            }
        }
        reps.len()
    }

    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            terms: self.terms.len(),
            target_dim: self.target.dim(),
            coefficients: self.coefficients(),
            residual: self.residual(),
            trace_defect: self.trace_defect(),
        }
    }
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Decomposition of the identity on `E = (⋂ Fix R_i)^⊥` with one coefficient
/// per conjugacy orbit, fitted by minimum-norm least squares.
pub fn identity_decomposition(gens: &GeneratorSet, group: &FiniteGroup) -> Result<IdentityDecomposition> {
    let n = group.dim();
    if gens.is_empty() {
        return Err(Error::Validation("empty generator set".into()));
    }
    let subspaces: Vec<Subspace> = gens.generators.iter().map(moving_subspace).collect();
    let target = subspaces.iter().fold(Subspace::zero(n), |acc, s| acc.sum(s));
    let orbits = gens.orbits();
    let q: Vec<DMatrix<f64>> = orbits
        .iter()
        .map(|o| {
            let mut m = DMatrix::zeros(n, n);
            for &i in o {
                m += subspaces[i].projector();
            }
            m
        })
        .collect();
    let k = q.len();
    let gram = DMatrix::from_fn(k, k, |a, b| frobenius(&q[a], &q[b]));
    let rhs = DVector::from_fn(k, |a, _| frobenius(&q[a], target.projector()));
    let scale = crate::linalg::max_abs(&gram).max(1.0);
    let pinv = gram
        .pseudo_inverse(1e-12 * scale)
        .map_err(|e| Error::Infeasible(format!("least-squares solve failed: {e}")))?;
    let c = pinv * rhs;
    let mut fit = DMatrix::zeros(n, n);
    for (a, m) in q.iter().enumerate() {
        fit += m * c[a];
    }
    let residual = max_abs(&(fit - target.projector()));
    if residual > DECOMPOSITION_TOL {
        return Err(Error::Infeasible(format!("least-squares residual {residual:e} exceeds {DECOMPOSITION_TOL:e}")));
    }
    if let Some((a, v)) = c.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::Infeasible(format!("non-positive coefficient {v:e} on orbit {a}")));
    }
    let terms = subspaces
        .into_iter()
        .zip(&gens.orbit_labels)
        .map(|(s, &o)| DecompositionTerm { coefficient: c[o], subspace: s })
        .collect();
    IdentityDecomposition::new(terms, target, gens.orbit_labels.clone())
}

/// `(2/n) ∑_{i<j} P_{ℝ(e_i − e_j)} = P_{v^⊥}` with `v = (1,…,1)`.
pub fn exchangeable_decomposition(n: usize) -> Result<IdentityDecomposition> {
    if n < 2 {
        return Err(Error::Validation("exchangeable decomposition needs n >= 2".into()));
    }
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut u = vec![0.0; n];
            u[i] = 1.0;
            u[j] = -1.0;
            terms.push(DecompositionTerm { coefficient: 2.0 / n as f64, subspace: Subspace::span_vectors(n, &[u]) });
        }
    }
    let target = Subspace::span_vectors(n, &[vec![1.0; n]]).complement();
    let labels = vec![0; terms.len()];
    IdentityDecomposition::new(terms, target, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchangeable_small_cases() {
        let d = exchangeable_decomposition(2).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert!((d.terms[0].coefficient - 1.0).abs() < 1e-15);
        assert!(d.residual() < 1e-10);
        let d = exchangeable_decomposition(3).unwrap();
        assert_eq!(d.terms.len(), 3);
        assert!(d.coefficients().iter().all(|c| (c - 2.0 / 3.0).abs() < 1e-15));
        assert!(d.residual() < 1e-10);
        let d = exchangeable_decomposition(5).unwrap();
        assert_eq!(d.terms.len(), 10);
        let trace: f64 = d.coefficients().iter().sum();
        assert!((trace - 4.0).abs() < 1e-12);
        assert!(d.residual() < 1e-10);
    }

    #[test]
    fn exchangeable_rejects_n1() {
        assert!(exchangeable_decomposition(1).is_err());
    }
}
