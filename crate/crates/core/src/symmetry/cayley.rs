use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::decomposition::IdentityDecomposition;
use super::group::{conjugacy_classes, FiniteGroup, GeneratorSet};
use crate::{Error, Result};

const ZERO_EIGEN_TOL: f64 = 1e-10;

/// Right-multiplication structure of a Cayley graph.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    pub order: usize,
    /// `right[g][i]` is the index of `g R_i`.
    pub right: Vec<Vec<usize>>,
    /// `right_inv[g][i]` is the index of `g R_i⁻¹`.
    pub right_inv: Vec<Vec<usize>>,
    /// Weight `d_i` of each generator.
    pub weights: Vec<f64>,
}

impl CayleyGraph {
    pub fn new(group: &FiniteGroup, gens: &GeneratorSet) -> Self {
        let inv: Vec<usize> = gens.group_indices.iter().map(|&r| group.inverse_index(r)).collect();
        let right = (0..group.order)
            .map(|g| gens.group_indices.iter().map(|&r| group.product_index(g, r)).collect())
            .collect();
        let right_inv = (0..group.order)
            .map(|g| inv.iter().map(|&r| group.product_index(g, r)).collect())
            .collect();
        let weights = (0..gens.len()).map(|i| gens.weight(i)).collect();
        Self { order: group.order, right, right_inv, weights }
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        let n = self.order as f64;
        let mean = f.iter().sum::<f64>() / n;
        f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
    }

    /// `∫ ∑_i w_i (f(gR_i) − f(g))² dγ(g)` with the supplied weights.
    pub fn dirichlet_weighted(&self, f: &[f64], w: &[f64]) -> f64 {
        let mut s = 0.0;
        for (g, row) in self.right.iter().enumerate() {
            for (i, &h) in row.iter().enumerate() {
                s += w[i] * (f[h] - f[g]).powi(2);
            }
        }
        s / self.order as f64
    }

    /// Dirichlet form with the stored weights.
    pub fn dirichlet(&self, f: &[f64]) -> f64 {
        self.dirichlet_weighted(f, &self.weights)
    }

    /// Dirichlet form with unit weights.
    pub fn dirichlet_unit(&self, f: &[f64]) -> f64 {
        self.dirichlet_weighted(f, &vec![1.0; self.weights.len()])
    }
}

/// Poincaré constant of the Cayley graph with all weights equal.
#[derive(Debug, Clone, Serialize)]
pub struct CayleyGap {
    pub constant: f64,
    pub lambda2: f64,
    /// Number of conjugacy classes used in the reduction.
    pub classes: usize,
    /// A second eigenvector on the full group (unit variance).
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
    /// `|Var(f) − c·E(f,f)|` on the eigenvector.
    pub certificate_defect: f64,
}

/// `c_P(𝒢) = 1/(2λ₂)` with `λ₂` the spectral gap of `m·I − A`. The
/// operator commutes with conjugation, so it is diagonalized on class
/// functions and the eigenvector is lifted back for the certificate.
pub fn cayley_spectral_gap(group: &FiniteGroup, gens: &GeneratorSet) -> Result<CayleyGap> {
    if gens.is_empty() {
        return Err(Error::Validation("empty generator set".into()));
    }
    let graph = CayleyGraph::new(group, gens);
    let (class, k) = conjugacy_classes(group, &gens.group_indices);
    let mut size = vec![0.0f64; k];
    let mut rep = vec![usize::MAX; k];
    for (g, &c) in class.iter().enumerate() {
        size[c] += 1.0;
        if rep[c] == usize::MAX {
            rep[c] = g;
        }
    }
    let m = gens.len() as f64;
    let mut abar = DMatrix::<f64>::zeros(k, k);
    for c in 0..k {
        let g = rep[c];
        for (&h, &hi) in graph.right[g].iter().zip(&graph.right_inv[g]) {
            abar[(c, class[h])] += 0.5;
            abar[(c, class[hi])] += 0.5;
        }
    }
    let sym = DMatrix::from_fn(k, k, |c, d| {
        let v = (size[c] / size[d]).sqrt() * abar[(c, d)];
        let w = (size[d] / size[c]).sqrt() * abar[(d, c)];
        0.5 * (v + w)
    });
    let lap = DMatrix::identity(k, k) * m - sym;
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    if k < 2 {
        return Err(Error::Validation("trivial group has no spectral gap".into()));
    }
    let lambda2 = eig.eigenvalues[order[1]];
    if lambda2 < ZERO_EIGEN_TOL {
        return Err(Error::Disconnected { lambda2 });
    }
    let w = eig.eigenvectors.column(order[1]);
    let mut f: Vec<f64> = class.iter().map(|&c| w[c] / size[c].sqrt()).collect();
    let var = graph.variance(&f);
    let scale = 1.0 / var.sqrt();
    f.iter_mut().for_each(|v| *v *= scale);
    let constant = 1.0 / (2.0 * lambda2);
    let var = graph.variance(&f);
    let dir = graph.dirichlet_unit(&f);
    let defect = (var - constant * dir).abs();
    if defect > 1e-8 * var.max(1.0) {
        return Err(Error::Validation(format!("spectral gap certificate failed: defect {defect:e}")));
    }
    Ok(CayleyGap { constant, lambda2, classes: k, eigenvector: f, certificate_defect: defect })
}

/// Reference computation on the full `|G| × |G|` operator.
pub fn cayley_spectral_gap_dense(group: &FiniteGroup, gens: &GeneratorSet) -> Result<f64> {
    let graph = CayleyGraph::new(group, gens);
    let n = group.order;
    let m = gens.len() as f64;
    let mut lap = DMatrix::identity(n, n) * m;
    for g in 0..n {
        for (&h, &hi) in graph.right[g].iter().zip(&graph.right_inv[g]) {
            lap[(g, h)] -= 0.5;
            lap[(g, hi)] -= 0.5;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(lap).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lambda2 = ev.get(1).cloned().unwrap_or(0.0);
    if lambda2 < ZERO_EIGEN_TOL {
        return Err(Error::Disconnected { lambda2 });
    }
    Ok(1.0 / (2.0 * lambda2))
}

/// `κ = max_i d_i / c_i`, requiring the orbit partitions to agree.
pub fn kappa(dec: &IdentityDecomposition, gens: &GeneratorSet) -> Result<f64> {
    if dec.terms.len() != gens.len() {
        return Err(Error::Validation(format!(
            "decomposition has {} terms but generator set has {}",
            dec.terms.len(),
            gens.len()
        )));
    }
    let mut map: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut back: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for (&a, &b) in dec.orbit_labels.iter().zip(&gens.orbit_labels) {
        if *map.entry(a).or_insert(b) != b || *back.entry(b).or_insert(a) != a {
            return Err(Error::Validation("orbit labels of decomposition and generators are misaligned".into()));
        }
    }
    let k = dec
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| gens.weight(i) / t.coefficient)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(k)
}
