use nalgebra::DMatrix;

use super::decomposition::{identity_decomposition, IdentityDecomposition};
use super::group::{conjugacy_close, enumerate_group, FiniteGroup, GeneratorSet, DEFAULT_MAX_ORDER};
use super::isometry::Isometry;
use crate::{Error, Result};

/// A named group with its conjugacy-closed generating set.
#[derive(Debug, Clone)]
pub struct BuiltinGroup {
    pub name: String,
    pub group: FiniteGroup,
    pub gens: GeneratorSet,
}

impl BuiltinGroup {
    pub fn decomposition(&self) -> Result<IdentityDecomposition> {
        identity_decomposition(&self.gens, &self.group)
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }
}

/// Catalog of group names with one-line descriptions.
pub const GROUP_CATALOG: &[(&str, &str)] = &[
    ("unconditional:n", "coordinate sign flips {-1,1}^n acting on R^n"),
    ("simplex:n", "symmetries of the regular simplex in R^n, generated by vertex transpositions"),
    ("dihedral:k", "regular k-gon in R^2 with its k reflections"),
    ("dihedral-rotations:k", "rotation subgroup of the regular k-gon with its k-1 nontrivial rotations"),
    ("schatten-rows:d", "row sign flips of d x d matrices acting on R^(d^2)"),
    ("exchangeable:n", "coordinate permutations of R^n generated by transpositions"),
];

/// Orthonormal rows spanning `(1,…,1)^⊥` in ℝ^{n+1}: Gram-Schmidt of
/// `e_i − e_{i+1}`. Returned as an `n × (n+1)` matrix.
pub fn simplex_basis(n: usize) -> DMatrix<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0.0; n + 1];
        v[i] = 1.0;
        v[i + 1] = -1.0;
        for r in &rows {
            let c: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vk, rk) in v.iter_mut().zip(r) {
                *vk -= c * rk;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        rows.push(v);
    }
    DMatrix::from_fn(n, n + 1, |i, j| rows[i][j])
}

/// Vertices `u_1,…,u_{n+1}` of the regular simplex in ℝⁿ (barycenter 0).
pub fn simplex_vertices(n: usize) -> Vec<Vec<f64>> {
    let b = simplex_basis(n);
    (0..=n).map(|j| (0..n).map(|i| b[(i, j)]).collect()).collect()
}

pub fn unconditional_generators(n: usize) -> Vec<Isometry> {
    (0..n)
        .map(|i| {
            let mut u = vec![0.0; n];
            u[i] = 1.0;
            Isometry::reflection(&u)
        })
        .collect()
}

pub fn simplex_generators(n: usize) -> Vec<Isometry> {
    let v = simplex_vertices(n);
    let mut out = Vec::new();
    for i in 0..=n {
        for j in i + 1..=n {
            let u: Vec<f64> = v[i].iter().zip(&v[j]).map(|(a, b)| a - b).collect();
            out.push(Isometry::reflection(&u));
        }
    }
    out
}

pub fn dihedral_reflections(k: usize) -> Vec<Isometry> {
    (0..k)
        .map(|j| {
            let t = std::f64::consts::PI * j as f64 / k as f64;
            Isometry::reflection(&[-t.sin(), t.cos()])
        })
        .collect()
}

pub fn dihedral_rotations(k: usize) -> Vec<Isometry> {
    (1..k)
        .map(|j| Isometry::plane_rotation(2, 0, 1, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect()
}

pub fn schatten_row_generators(d: usize) -> Vec<Isometry> {
    (0..d)
        .map(|a| {
            let mut m = DMatrix::identity(d * d, d * d);
            for b in 0..d {
                m[(a * d + b, a * d + b)] = -1.0;
            }
            Isometry::new(m).expect("diagonal sign matrix is orthogonal")
        })
        .collect()
}

pub fn transposition_generators(n: usize) -> Vec<Isometry> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut u = vec![0.0; n];
            u[i] = 1.0;
            u[j] = -1.0;
            out.push(Isometry::reflection(&u));
        }
    }
    out
}

fn parse_param(name: &str, s: Option<&str>, min: usize) -> Result<usize> {
    let v: usize = s
        .ok_or_else(|| Error::Validation(format!("group '{name}' needs a size parameter")))?
        .parse()
        .map_err(|_| Error::Validation(format!("group '{name}': size parameter is not an integer")))?;
    if v < min {
        return Err(Error::Validation(format!("group '{name}': size must be at least {min}")));
    }
    Ok(v)
}

/// Generators for a named group, without enumerating it.
pub fn builtin_generators(name: &str) -> Result<Vec<Isometry>> {
    let mut parts = name.splitn(2, ':');
    let kind = parts.next().unwrap_or("");
    let param = parts.next();
    match kind {
        "unconditional" => Ok(unconditional_generators(parse_param(name, param, 1)?)),
        "simplex" => Ok(simplex_generators(parse_param(name, param, 1)?)),
        "dihedral" => Ok(dihedral_reflections(parse_param(name, param, 2)?)),
        "dihedral-rotations" => Ok(dihedral_rotations(parse_param(name, param, 2)?)),
        "schatten-rows" => Ok(schatten_row_generators(parse_param(name, param, 1)?)),
        "exchangeable" => Ok(transposition_generators(parse_param(name, param, 2)?)),
        _ => Err(Error::Validation(format!("unknown group '{name}'"))),
    }
}

/// Build a named group: enumerate, then conjugacy-close the generators.
pub fn builtin_group(name: &str) -> Result<BuiltinGroup> {
    let generators = builtin_generators(name)?;
    let group = enumerate_group(&generators, DEFAULT_MAX_ORDER)?;
    let gens = conjugacy_close(&generators, &group)?;
    Ok(BuiltinGroup { name: name.to_string(), group, gens })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_vertices_are_regular() {
        let v = simplex_vertices(4);
        let d01: f64 = v[0].iter().zip(&v[1]).map(|(a, b)| (a - b).powi(2)).sum();
        for i in 0..5 {
            for j in i + 1..5 {
                let d: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| (a - b).powi(2)).sum();
                assert!((d - d01).abs() < 1e-12);
            }
        }
        let s: Vec<f64> = (0..4).map(|k| v.iter().map(|u| u[k]).sum()).collect();
        assert!(s.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn orders_of_builtins() {
        assert_eq!(builtin_group("unconditional:3").unwrap().group.order, 8);
        assert_eq!(builtin_group("simplex:3").unwrap().group.order, 24);
        assert_eq!(builtin_group("dihedral:5").unwrap().group.order, 10);
        assert_eq!(builtin_group("dihedral-rotations:5").unwrap().group.order, 5);
        assert_eq!(builtin_group("schatten-rows:3").unwrap().group.order, 8);
        assert_eq!(builtin_group("exchangeable:4").unwrap().group.order, 24);
        assert!(builtin_group("icosahedral:3").is_err());
    }

    #[test]
    fn even_polygon_has_two_reflection_orbits() {
        let g = builtin_group("dihedral:6").unwrap();
        assert_eq!(g.gens.num_orbits(), 2);
    }
}
