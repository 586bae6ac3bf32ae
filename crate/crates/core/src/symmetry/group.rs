use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;

use super::isometry::{Isometry, MATRIX_TOL};
use crate::{Error, Result};

/// Default cap on the group order during closure.
pub const DEFAULT_MAX_ORDER: usize = 10080;

const KEY_SCALE: f64 = 1e6;

fn key_of(m: &DMatrix<f64>) -> (Vec<i64>, bool) {
    let mut near_edge = false;
    let key = m
        .iter()
        .map(|v| {
            let s = v * KEY_SCALE;
            let frac = s - s.floor();
            if (frac - 0.5).abs() < 1e-2 {
                near_edge = true;
            }
            s.round() as i64
        })
        .collect();
    (key, near_edge)
}

/// A finite group of isometries, stored extensionally.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    pub elements: Vec<Isometry>,
    pub order: usize,
    pub closed: bool,
    index: HashMap<Vec<i64>, usize>,
}

impl FiniteGroup {
    fn empty() -> Self {
        Self { elements: Vec::new(), order: 0, closed: false, index: HashMap::new() }
    }

    fn insert(&mut self, g: Isometry) -> usize {
        let (key, _) = key_of(&g.matrix);
        let idx = self.elements.len();
        self.index.insert(key, idx);
        self.elements.push(g);
        self.order = self.elements.len();
        idx
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |g| g.dim())
    }

    /// Index of the element within the dedup tolerance of `m`.
    pub fn find(&self, m: &DMatrix<f64>) -> Option<usize> {
        let (key, near_edge) = key_of(m);
        if let Some(&i) = self.index.get(&key) {
            if crate::linalg::max_abs(&(&self.elements[i].matrix - m)) < MATRIX_TOL {
                return Some(i);
            }
        }
        if near_edge {
            return self
                .elements
                .iter()
                .position(|g| crate::linalg::max_abs(&(&g.matrix - m)) < MATRIX_TOL);
        }
        None
    }

    pub fn contains(&self, g: &Isometry) -> bool {
        self.find(&g.matrix).is_some()
    }

    pub fn identity_index(&self) -> usize {
        let n = self.dim();
        self.find(&DMatrix::identity(n, n)).expect("group contains identity")
    }

    /// Index of `elements[a] · elements[b]`.
    pub fn product_index(&self, a: usize, b: usize) -> usize {
        let m = &self.elements[a].matrix * &self.elements[b].matrix;
        self.find(&m).expect("group closed under products")
    }

    pub fn inverse_index(&self, a: usize) -> usize {
        self.find(&self.elements[a].matrix.transpose()).expect("group closed under inverses")
    }
}

/// Breadth-first closure of `generators` under multiplication.
pub fn enumerate_group(generators: &[Isometry], max_order: usize) -> Result<FiniteGroup> {
    if max_order == 0 {
        return Err(Error::Validation("max_order must be at least 1".into()));
    }
    let n = match generators.first() {
        Some(g) => g.dim(),
        None => return Err(Error::Validation("at least one generator is required".into())),
    };
    for g in generators {
        if g.dim() != n {
            return Err(Error::Validation("generators have mismatched dimensions".into()));
        }
        Isometry::new(g.matrix.clone())?;
    }
    let mut group = FiniteGroup::empty();
    group.insert(Isometry::identity(n));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in generators {
            let m = &group.elements[i].matrix * &s.matrix;
            if group.find(&m).is_none() {
                if group.order >= max_order {
                    return Err(Error::Capacity { reached: group.order + 1, max_order });
                }
                let g = group.elements[i].compose(s);
                let idx = group.insert(g);
                queue.push_back(idx);
            }
        }
    }
    group.closed = true;
    Ok(group)
}

/// A conjugacy-stable generating set with orbit labels and weights.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub generators: Vec<Isometry>,
    /// Orbit id for each generator.
    pub orbit_labels: Vec<usize>,
    /// Weight `d` for each orbit.
    pub weights: Vec<f64>,
    /// Position of each generator in the group's element list.
    pub group_indices: Vec<usize>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn num_orbits(&self) -> usize {
        self.weights.len()
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_orbits()];
        for (i, &o) in self.orbit_labels.iter().enumerate() {
            out[o].push(i);
        }
        out
    }

    /// Weight of generator `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[self.orbit_labels[i]]
    }

    pub fn with_uniform_weight(mut self, d: f64) -> Self {
        self.weights = vec![d; self.num_orbits()];
        self
    }
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Smallest conjugacy-stable superset of `generators`, split into orbits.
/// Weights default to 1.
pub fn conjugacy_close(generators: &[Isometry], group: &FiniteGroup) -> Result<GeneratorSet> {
    let mut members: Vec<usize> = Vec::new();
    let mut position: HashMap<usize, usize> = HashMap::new();
    for g in generators {
        let idx = group
            .find(&g.matrix)
            .ok_or_else(|| Error::Validation("generator is not an element of the group".into()))?;
        if !position.contains_key(&idx) {
            position.insert(idx, members.len());
            members.push(idx);
        }
    }
    let mut parent: Vec<usize> = (0..members.len()).collect();
    let mut k = 0;
    while k < members.len() {
        let r = members[k];
        for h in 0..group.order {
            let m = &group.elements[h].matrix * &group.elements[r].matrix * group.elements[h].matrix.transpose();
            let c = group.find(&m).expect("group closed under conjugation");
            let pc = match position.get(&c) {
                Some(&p) => p,
                None => {
                    let p = members.len();
                    position.insert(c, p);
                    members.push(c);
                    parent.push(p);
                    p
                }
            };
            let (a, b) = (find_root(&mut parent, k), find_root(&mut parent, pc));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        k += 1;
    }
    let mut root_label: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(members.len());
    for i in 0..members.len() {
        let r = find_root(&mut parent, i);
        let next = root_label.len();
        labels.push(*root_label.entry(r).or_insert(next));
    }
    Ok(GeneratorSet {
        generators: members.iter().map(|&i| group.elements[i].clone()).collect(),
        orbit_labels: labels,
        weights: vec![1.0; root_label.len()],
        group_indices: members,
    })
}

/// Conjugacy classes of the group under conjugation by `conjugators`
/// (which should generate the group). Returns the class id of each element
/// and the number of classes.
pub fn conjugacy_classes(group: &FiniteGroup, conjugators: &[usize]) -> (Vec<usize>, usize) {
    let mut class = vec![usize::MAX; group.order];
    let mut count = 0;
    let inv: Vec<usize> = conjugators.iter().map(|&s| group.inverse_index(s)).collect();
    for start in 0..group.order {
        if class[start] != usize::MAX {
            continue;
        }
        class[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(g) = queue.pop_front() {
            for (&s, &si) in conjugators.iter().zip(&inv) {
                let m = &group.elements[s].matrix * &group.elements[g].matrix * &group.elements[si].matrix;
                let h = group.find(&m).expect("group closed under conjugation");
                if class[h] == usize::MAX {
                    class[h] = count;
                    queue.push_back(h);
                }
            }
        }
        count += 1;
    }
    (class, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_reflections() -> Vec<Isometry> {
        (0..3)
            .map(|j| {
                let t = std::f64::consts::PI * j as f64 / 3.0;
                Isometry::reflection(&[-t.sin(), t.cos()])
            })
            .collect()
    }

    #[test]
    fn sign_flip_group_has_order_four() {
        let g = enumerate_group(&[Isometry::reflection(&[1.0, 0.0]), Isometry::reflection(&[0.0, 1.0])], 100).unwrap();
        assert_eq!(g.order, 4);
        assert!(g.closed);
    }

    #[test]
    fn triangle_group_has_order_six() {
        let g = enumerate_group(&triangle_reflections(), 100).unwrap();
        assert_eq!(g.order, 6);
    }

    #[test]
    fn transpositions_of_three_letters() {
        let gens = vec![
            Isometry::reflection(&[1.0, -1.0, 0.0]),
            Isometry::reflection(&[1.0, 0.0, -1.0]),
            Isometry::reflection(&[0.0, 1.0, -1.0]),
        ];
        assert_eq!(enumerate_group(&gens, 100).unwrap().order, 6);
    }

    #[test]
    fn irrational_rotation_hits_capacity() {
        let r = Isometry::plane_rotation(2, 0, 1, 1.0);
        match enumerate_group(&[r], 50) {
            Err(Error::Capacity { reached, max_order }) => {
                assert_eq!(max_order, 50);
                assert!(reached > 50);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn odd_polygon_reflections_form_one_orbit() {
        let gens = triangle_reflections();
        let g = enumerate_group(&gens, 100).unwrap();
        let set = conjugacy_close(&gens, &g).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.num_orbits(), 1);
    }

    #[test]
    fn abelian_group_keeps_singleton_orbits() {
        let gens: Vec<Isometry> = (0..3)
            .map(|i| {
                let mut u = vec![0.0; 3];
                u[i] = 1.0;
                Isometry::reflection(&u)
            })
            .collect();
        let g = enumerate_group(&gens, 100).unwrap();
        let set = conjugacy_close(&gens, &g).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.num_orbits(), 3);
    }

    #[test]
    fn closure_adds_missing_conjugates() {
        let gens = triangle_reflections();
        let g = enumerate_group(&gens, 100).unwrap();
        let set = conjugacy_close(&gens[..1], &g).unwrap();
        assert_eq!(set.len(), 3);
    }
}
