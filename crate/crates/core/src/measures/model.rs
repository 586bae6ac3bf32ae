use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::potential::{Potential1d, SmoothPotential};
use crate::symmetry::{simplex_basis, simplex_vertices};
use crate::{Error, Result};

pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Shapes with a known direct sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyShape {
    /// `[−a, a]ⁿ`.
    Cube { half_width: f64 },
    /// Regular simplex with vertices `u_i` (barycenter 0, edge √2).
    Simplex,
    /// Unit ball of `ℓ_p`.
    LpBall { p: f64 },
    /// Unit ball of the Schatten `p`-norm on `d × d` matrices.
    SchattenBall { d: usize, p: f64 },
    Generic,
}

/// A uniform measure on a convex body given by a membership oracle.
#[derive(Clone)]
pub struct Body {
    pub dim: usize,
    pub membership: Membership,
    /// The body lies in the centered ball of this radius.
    pub radius: f64,
    pub log_concave: bool,
    pub shape: BodyShape,
    pub volume: Option<f64>,
}

impl Body {
    pub fn contains(&self, x: &[f64]) -> bool {
        (self.membership)(x)
    }
}

/// Product measure restricted to the hyperplane `∑ y_i = n m`, written in
/// intrinsic coordinates `x ∈ ℝ^{n−1}` with `y = m·1 + Bᵀx`.
#[derive(Debug, Clone)]
pub struct SpinModel {
    pub n: usize,
    pub m: f64,
    pub v: Potential1d,
    /// `(n−1) × n`, orthonormal rows spanning `(1,…,1)^⊥`.
    pub basis: DMatrix<f64>,
}

impl SpinModel {
    pub fn new(n: usize, m: f64, v: Potential1d) -> Self {
        Self { n, m, v, basis: simplex_basis(n - 1) }
    }

    pub fn to_ambient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.m + (0..self.n - 1).map(|i| self.basis[(i, j)] * x[i]).sum::<f64>())
            .collect()
    }

    pub fn to_intrinsic(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n - 1).map(|i| (0..self.n).map(|j| self.basis[(i, j)] * (y[j] - self.m)).sum()).collect()
    }

    /// Intrinsic unit vector of the ambient direction `(e_i − e_j)/√2`.
    pub fn pair_direction(&self, i: usize, j: usize) -> Vec<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..self.n - 1).map(|k| s * (self.basis[(k, i)] - self.basis[(k, j)])).collect()
    }
}

#[derive(Clone)]
pub enum ModelKind {
    Smooth(SmoothPotential),
    Body(Body),
    Product(Vec<Potential1d>),
    Spin(SpinModel),
}

/// A probability measure on ℝ^dim.
#[derive(Clone)]
pub struct MeasureModel {
    pub name: String,
    pub kind: ModelKind,
}

impl fmt::Debug for MeasureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureModel").field("name", &self.name).field("dim", &self.dim()).finish()
    }
}

impl MeasureModel {
    pub fn smooth(p: SmoothPotential) -> Self {
        Self { name: p.name.clone(), kind: ModelKind::Smooth(p) }
    }

    pub fn product(name: &str, factors: Vec<Potential1d>) -> Self {
        Self { name: name.to_string(), kind: ModelKind::Product(factors) }
    }

    pub fn body(name: &str, body: Body) -> Self {
        Self { name: name.to_string(), kind: ModelKind::Body(body) }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::Smooth(p) => p.dim,
            ModelKind::Body(b) => b.dim,
            ModelKind::Product(f) => f.len(),
            ModelKind::Spin(s) => s.n - 1,
        }
    }

    pub fn is_body(&self) -> bool {
        matches!(self.kind, ModelKind::Body(_))
    }

    pub fn as_body(&self) -> Option<&Body> {
        match &self.kind {
            ModelKind::Body(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_spin(&self) -> Option<&SpinModel> {
        match &self.kind {
            ModelKind::Spin(s) => Some(s),
            _ => None,
        }
    }

    /// Potential `Φ(x)` (`+∞` outside a body, `0` inside).
    pub fn potential(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Smooth(p) => p.value_at(x),
            ModelKind::Body(b) => {
                if b.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ModelKind::Product(f) => f.iter().zip(x).map(|(v, t)| v.v(*t)).sum(),
            ModelKind::Spin(s) => s.to_ambient(x).iter().map(|t| s.v.v(*t)).sum(),
        }
    }

    /// `∇Φ(x)`; `None` for bodies.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            ModelKind::Smooth(p) => Some(p.gradient_at(x)),
            ModelKind::Body(_) => None,
            ModelKind::Product(f) => Some(f.iter().zip(x).map(|(v, t)| (v.d1)(*t)).collect()),
            ModelKind::Spin(s) => {
                let y = s.to_ambient(x);
                let g: Vec<f64> = y.iter().map(|t| (s.v.d1)(*t)).collect();
                Some((0..s.n - 1).map(|i| (0..s.n).map(|j| s.basis[(i, j)] * g[j]).sum()).collect())
            }
        }
    }

    /// `D²Φ(x)`; `None` for bodies.
    pub fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        match &self.kind {
            ModelKind::Smooth(p) => Some(p.hessian_at(x)),
            ModelKind::Body(_) => None,
            ModelKind::Product(f) => {
                let n = f.len();
                Some(DMatrix::from_fn(n, n, |i, j| if i == j { (f[i].d2)(x[i]) } else { 0.0 }))
            }
            ModelKind::Spin(s) => {
                let y = s.to_ambient(x);
                let d: Vec<f64> = y.iter().map(|t| (s.v.d2)(*t)).collect();
                let k = s.n - 1;
                Some(DMatrix::from_fn(k, k, |a, b| (0..s.n).map(|j| s.basis[(a, j)] * d[j] * s.basis[(b, j)]).sum()))
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            ModelKind::Body(b) => b.contains(x),
            _ => x.iter().all(|v| v.is_finite()),
        }
    }

    /// Claimed `ρ` with `D²Φ ≥ ρ`, if the model has a density.
    pub fn convexity_floor(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::Smooth(p) => Some(p.convexity_floor),
            ModelKind::Body(_) => None,
            ModelKind::Product(f) => Some(f.iter().map(|v| v.convexity_floor).fold(f64::INFINITY, f64::min)),
            ModelKind::Spin(s) => Some(s.v.convexity_floor),
        }
    }

    pub fn is_log_concave(&self) -> bool {
        match &self.kind {
            ModelKind::Body(b) => b.log_concave,
            _ => self.convexity_floor().is_some_and(|r| r >= 0.0),
        }
    }

    /// Half-width of a box that carries essentially all of the mass, used
    /// for invariance probes.
    pub fn reference_box(&self) -> f64 {
        match &self.kind {
            ModelKind::Body(b) => b.radius,
            _ => 4.0,
        }
    }
}

fn parse_usize(name: &str, s: Option<&str>, min: usize) -> Result<usize> {
    let v: usize = s
        .ok_or_else(|| Error::Validation(format!("model '{name}' is missing a size parameter")))?
        .parse()
        .map_err(|_| Error::Validation(format!("model '{name}': size parameter is not an integer")))?;
    if v < min {
        return Err(Error::Validation(format!("model '{name}': size must be at least {min}")));
    }
    Ok(v)
}

fn parse_f64(name: &str, s: Option<&str>) -> Result<f64> {
    s.ok_or_else(|| Error::Validation(format!("model '{name}' is missing a numeric parameter")))?
        .parse()
        .map_err(|_| Error::Validation(format!("model '{name}': bad numeric parameter")))
}

pub fn cube(n: usize, half_width: f64) -> MeasureModel {
    let a = half_width;
    MeasureModel::body(
        &format!("cube:{n}"),
        Body {
            dim: n,
            membership: Arc::new(move |x| x.iter().all(|v| v.abs() <= a)),
            radius: a * (n as f64).sqrt() * (1.0 + 1e-9),
            log_concave: true,
            shape: BodyShape::Cube { half_width: a },
            volume: Some((2.0 * a).powi(n as i32)),
        },
    )
}

/// Barycentric coordinates of `x` in the regular simplex with vertices `u_i`.
pub fn simplex_barycentric(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let b = simplex_basis(n);
    (0..=n).map(|j| (0..n).map(|i| b[(i, j)] * x[i]).sum::<f64>() + 1.0 / (n as f64 + 1.0)).collect()
}

pub fn simplex_body(n: usize) -> MeasureModel {
    let b = simplex_basis(n);
    let r = simplex_vertices(n).iter().map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    MeasureModel::body(
        &format!("simplex-body:{n}"),
        Body {
            dim: n,
            membership: Arc::new(move |x| {
                (0..=n).all(|j| (0..n).map(|i| b[(i, j)] * x[i]).sum::<f64>() + 1.0 / (n as f64 + 1.0) >= 0.0)
            }),
            radius: r * (1.0 + 1e-9),
            log_concave: true,
            shape: BodyShape::Simplex,
            volume: Some((n as f64 + 1.0).sqrt() / fact),
        },
    )
}

pub fn lp_ball(n: usize, p: f64) -> MeasureModel {
    let g = libm::tgamma(1.0 + 1.0 / p);
    let volume = (2.0 * g).powi(n as i32) / libm::tgamma(1.0 + n as f64 / p);
    let radius = if p >= 2.0 { (n as f64).powf(0.5 - 1.0 / p) } else { 1.0 };
    MeasureModel::body(
        &format!("lp-ball:{n}:{p}"),
        Body {
            dim: n,
            membership: Arc::new(move |x| x.iter().map(|v| v.abs().powf(p)).sum::<f64>() <= 1.0),
            radius: radius * (1.0 + 1e-9),
            log_concave: p >= 1.0,
            shape: BodyShape::LpBall { p },
            volume: Some(volume),
        },
    )
}

/// Singular values of the `d × d` matrix stored row-major in `x`.
pub fn singular_values(x: &[f64], d: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(d, d, x);
    let g = m.transpose() * &m;
    SymmetricEigen::new(g).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect()
}

pub fn schatten_ball(d: usize, p: f64) -> MeasureModel {
    let n = d * d;
    let radius = if p >= 2.0 { (d as f64).powf(0.5 - 1.0 / p) } else { 1.0 };
    let volume = if (p - 2.0).abs() < 1e-15 {
        Some(std::f64::consts::PI.powf(n as f64 / 2.0) / libm::tgamma(1.0 + n as f64 / 2.0))
    } else {
        None
    };
    MeasureModel::body(
        &format!("schatten-ball:{d}:{p}"),
        Body {
            dim: n,
            membership: Arc::new(move |x| {
                if p.is_infinite() {
                    singular_values(x, d).iter().all(|s| *s <= 1.0)
                } else {
                    singular_values(x, d).iter().map(|s| s.powf(p)).sum::<f64>() <= 1.0
                }
            }),
            radius: radius * (1.0 + 1e-9),
            log_concave: p >= 1.0,
            shape: BodyShape::SchattenBall { d, p },
            volume,
        },
    )
}

pub fn spin(n: usize, m: f64, v: Potential1d) -> MeasureModel {
    MeasureModel { name: format!("spin:{n}:{m}:{}", v.name), kind: ModelKind::Spin(SpinModel::new(n, m, v)) }
}

/// Catalog of model names with one-line descriptions.
pub const MODEL_CATALOG: &[(&str, &str)] = &[
    ("gaussian:n", "standard Gaussian on R^n"),
    ("cube:n", "uniform measure on [-1,1]^n"),
    ("isotropic-cube:n", "uniform measure on [-sqrt 3, sqrt 3]^n, in isotropic position"),
    ("simplex-body:n", "uniform measure on the regular simplex of R^n with barycenter 0"),
    ("lp-ball:n:p", "uniform measure on the unit ball of l_p^n"),
    ("schatten-ball:d:p", "uniform measure on the unit Schatten p-ball of d x d matrices"),
    ("spin:n:m:V", "product measure exp(-sum V(x_i)) conditioned on mean m, in n-1 intrinsic coordinates"),
    ("product:n:V", "product measure exp(-sum V(x_i)) on R^n"),
    ("radial-quartic:n", "potential |x|^2/2 + |x|^4/4"),
    ("correlated-gaussian:n:eps", "Gaussian with tridiagonal precision, off-diagonal eps"),
    ("radial-dent:n:a", "potential |x|^2/2 + a exp(-|x|^2/2), non-convex for a > 1"),
    ("quartic-2d", "potential x^2/2 + y^4 + y^2 on R^2"),
    ("quartic-square-2d", "potential (x^2+y^2)/2 + 0.1(x^4+y^4) on R^2"),
];

/// Build a named model.
pub fn builtin_model(name: &str) -> Result<MeasureModel> {
    let parts: Vec<&str> = name.split(':').collect();
    let get = |i: usize| parts.get(i).copied();
    match parts[0] {
        "gaussian" => Ok(MeasureModel::smooth(SmoothPotential::gaussian(parse_usize(name, get(1), 1)?))),
        "cube" => Ok(cube(parse_usize(name, get(1), 1)?, 1.0)),
        "isotropic-cube" => {
            let mut m = cube(parse_usize(name, get(1), 1)?, 3f64.sqrt());
            m.name = name.to_string();
            Ok(m)
        }
        "simplex-body" => Ok(simplex_body(parse_usize(name, get(1), 1)?)),
        "lp-ball" => {
            let p = parse_f64(name, get(2))?;
            if p <= 0.0 {
                return Err(Error::Validation(format!("model '{name}': p must be positive")));
            }
            Ok(lp_ball(parse_usize(name, get(1), 1)?, p))
        }
        "schatten-ball" => {
            let p = parse_f64(name, get(2))?;
            if p <= 0.0 {
                return Err(Error::Validation(format!("model '{name}': p must be positive")));
            }
            Ok(schatten_ball(parse_usize(name, get(1), 1)?, p))
        }
        "spin" => {
            let n = parse_usize(name, get(1), 2)?;
            let m = parse_f64(name, get(2))?;
            if parts.len() < 4 {
                return Err(Error::Validation(format!("model '{name}' is missing the potential")));
            }
            Ok(spin(n, m, Potential1d::named(&parts[3..].join(":"))?))
        }
        "product" => {
            let n = parse_usize(name, get(1), 1)?;
            if parts.len() < 3 {
                return Err(Error::Validation(format!("model '{name}' is missing the potential")));
            }
            let v = Potential1d::named(&parts[2..].join(":"))?;
            Ok(MeasureModel::product(name, vec![v; n]))
        }
        "radial-quartic" => Ok(MeasureModel::smooth(SmoothPotential::radial_quartic(parse_usize(name, get(1), 1)?))),
        "correlated-gaussian" => {
            let n = parse_usize(name, get(1), 1)?;
            let eps = parse_f64(name, get(2))?;
            Ok(MeasureModel::smooth(SmoothPotential::correlated_gaussian(n, eps)))
        }
        "radial-dent" => {
            let n = parse_usize(name, get(1), 1)?;
            let a = parse_f64(name, get(2))?;
            Ok(MeasureModel::smooth(SmoothPotential::radial_dent(n, a)))
        }
        "quartic-2d" => Ok(MeasureModel::smooth(SmoothPotential::quartic_2d())),
        "quartic-square-2d" => Ok(MeasureModel::smooth(SmoothPotential::quartic_square_2d())),
        _ => Err(Error::Validation(format!("unknown model '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_coordinates_roundtrip() {
        let s = SpinModel::new(4, 0.7, Potential1d::quadratic());
        let x = vec![0.3, -1.2, 0.5];
        let y = s.to_ambient(&x);
        assert!((y.iter().sum::<f64>() - 4.0 * 0.7).abs() < 1e-12);
        let back = s.to_intrinsic(&y);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_membership_matches_barycentric() {
        let m = simplex_body(3);
        let b = m.as_body().unwrap();
        assert!(b.contains(&[0.0, 0.0, 0.0]));
        for u in simplex_vertices(3) {
            let inner: Vec<f64> = u.iter().map(|v| v * 0.999).collect();
            let outer: Vec<f64> = u.iter().map(|v| v * 1.001).collect();
            assert!(b.contains(&inner));
            assert!(!b.contains(&outer));
            let lam = simplex_barycentric(&u);
            assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schatten_two_is_euclidean() {
        let m = schatten_ball(2, 2.0);
        let b = m.as_body().unwrap();
        assert!(b.contains(&[0.5, 0.5, 0.5, 0.49]));
        assert!(!b.contains(&[0.5, 0.5, 0.5, 0.51]));
    }

    #[test]
    fn names_parse() {
        for n in ["gaussian:3", "cube:2", "simplex-body:4", "lp-ball:3:1.5", "schatten-ball:2:1", "spin:3:0.5:perturbed:0.2", "product:3:quartic", "radial-dent:2:1.2"] {
            let m = builtin_model(n).unwrap();
            assert!(m.dim() >= 2, "{n}");
        }
        assert!(builtin_model("torus:3").is_err());
        assert!(builtin_model("spin:1:0:abs").is_err());
    }
}
