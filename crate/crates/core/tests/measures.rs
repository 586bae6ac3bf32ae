use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use symvar::measures::*;
use symvar::symmetry::{builtin_group, enumerate_group, Isometry, Subspace};
use symvar::Error;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

fn line(v: &[f64]) -> Subspace {
    Subspace::span_vectors(v.len(), &[v.to_vec()])
}

#[test]
fn gaussian_slices_are_standard() {
    let m = builtin_model("gaussian:3").unwrap();
    for (x, e) in [([0.3, -1.2, 2.0], unit(&[1.0, 2.0, -1.0])), ([5.0, 0.0, 1.0], vec![0.0, 0.0, 1.0])] {
        let c = condition(&m, &x, &line(&e)).unwrap();
        let p0 = c.potential_1d(0.0);
        for t in [-3.0, -0.5, 0.7, 2.5] {
            assert!((c.potential_1d(t) - p0 - t * t / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn cube_axis_slice_is_uniform() {
    let m = cube(3, 1.0);
    let c = condition(&m, &[0.2, -0.4, 0.9], &line(&[1.0, 0.0, 0.0])).unwrap();
    let (a, b) = c.support_interval().unwrap();
    assert!((a + 1.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9, "{a} {b}");
    assert_eq!(c.potential_1d(0.5), 0.0);
    assert!(c.potential_1d(1.5).is_infinite());
    assert!(matches!(condition(&m, &[3.0, 3.0, 3.0], &line(&[1.0, 0.0, 0.0])).and_then(|c| c.support_interval()), Err(Error::EmptySlice)));
}

#[test]
fn spin_pair_slices() {
    let v = Potential1d::quartic_quadratic();
    let model = spin(4, 0.3, v.clone());
    let s = model.as_spin().unwrap();
    let x = [0.4, -0.7, 1.1];
    let y = s.to_ambient(&x);
    for (i, j) in [(0, 1), (1, 3), (0, 2)] {
        let c = condition(&model, &x, &line(&s.pair_direction(i, j))).unwrap();
        let sij = 0.5 * (y[i] + y[j]);
        let pair = |tau: f64| v.v(sij + tau * FRAC_1_SQRT_2) + v.v(sij - tau * FRAC_1_SQRT_2);
        for t in [-1.3, -0.2, 0.6, 1.7] {
            let lhs = c.potential_1d(t) - c.potential_1d(0.0);
            let rhs = pair(t) - pair(0.0);
            assert!((lhs - rhs).abs() < 1e-10, "({i},{j}) t={t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn gaussian_spin_is_gaussian_on_the_hyperplane() {
    for (n, m) in [(2, 0.0), (3, 1.5), (5, -0.4)] {
        let model = spin(n, m, Potential1d::quadratic());
        let p0 = model.potential(&vec![0.0; n - 1]);
        assert!((p0 - n as f64 * m * m / 2.0).abs() < 1e-12);
        let x: Vec<f64> = (0..n - 1).map(|i| 0.3 * i as f64 - 0.5).collect();
        let q: f64 = x.iter().map(|a| a * a).sum::<f64>() / 2.0;
        assert!((model.potential(&x) - p0 - q).abs() < 1e-12);
        let y = model.as_spin().unwrap().to_ambient(&x);
        assert!((y.iter().sum::<f64>() - n as f64 * m).abs() < 1e-12);
    }
}

#[test]
fn two_site_spin_densities() {
    let v = Potential1d::quartic();
    let model = spin(2, 0.8, v.clone());
    for t in [-2.0, -0.3, 0.0, 1.1] {
        let want = v.v(0.8 + t * FRAC_1_SQRT_2) + v.v(0.8 - t * FRAC_1_SQRT_2);
        assert!((model.potential(&[t]) - want).abs() < 1e-12);
    }
    let model = spin(2, 0.0, Potential1d::abs());
    for t in [-3.0, -0.5, 0.25, 2.0] {
        assert!((model.potential(&[t]) - SQRT_2 * f64::abs(t)).abs() < 2.0 * CORNER_SMOOTHING);
    }
}

#[test]
fn invariance_examples() {
    let g = builtin_model("gaussian:4").unwrap();
    let r = Isometry::plane_rotation(4, 1, 3, 1.234);
    assert!(check_invariance(&g, &r, 500, 3).unwrap() <= 1e-9);
    let c = cube(3, 1.0);
    assert_eq!(check_invariance(&c, &Isometry::permutation(&[2, 0, 1]), 4000, 3).unwrap(), 0.0);
    assert!(check_invariance(&c, &Isometry::plane_rotation(3, 0, 1, PI / 5.0), 4000, 3).unwrap() > 0.0);
    let q = builtin_model("quartic-2d").unwrap();
    assert!(check_invariance(&q, &Isometry::reflection(&[0.0, 1.0]), 500, 3).unwrap() <= 1e-9);
    assert!(check_invariance(&q, &Isometry::permutation(&[1, 0]), 500, 3).unwrap() > 1e-3);
}

#[test]
fn symmetrize_examples() {
    let minus = Isometry::new(-DMatrix::<f64>::identity(3, 3)).unwrap();
    let pm = Arc::new(enumerate_group(&[minus], 16).unwrap());
    assert_eq!(pm.order, 2);
    let odd = TestFunction::new("odd", 3, |x| x[0] + x[1].powi(3) - x[0] * x[1] * x[2], |x| {
        vec![1.0 - x[1] * x[2], 3.0 * x[1] * x[1] - x[0] * x[2], -x[0] * x[1]]
    });
    let f = symmetrize(&odd, &pm);
    let x = [0.3, -1.1, 2.0];
    assert!(f.eval(&x).abs() < 1e-15);
    assert!(f.grad(&x).iter().all(|g| g.abs() < 1e-15));

    let s3 = Arc::new(builtin_group("exchangeable:3").unwrap().group);
    assert_eq!(s3.order, 6);
    let f = symmetrize(&TestFunction::coordinate(3, 0), &s3);
    assert!((f.eval(&x) - (0.3 - 1.1 + 2.0) / 3.0).abs() < 1e-15);
    assert!(f.grad(&x).iter().all(|g| (g - 1.0 / 3.0).abs() < 1e-15));

    let d5 = Arc::new(builtin_group("dihedral:5").unwrap().group);
    let sq = TestFunction::squared_norm(2);
    let f = symmetrize(&sq, &d5);
    assert!((f.eval(&[0.7, -0.2]) - sq.eval(&[0.7, -0.2])).abs() < 1e-14);
    assert!(f.invariance_defect(&d5, 200, 2.0, 1) < 1e-12);
}

#[test]
fn centered_conditionals_by_quadrature() {
    let g2 = builtin_model("gaussian:2").unwrap();
    let rep = centered_conditional_check(&g2, &TestFunction::squared_norm(2), &Isometry::reflection(&[1.0, 0.0]), &TestFunction::generic(2), 6, 64, 1).unwrap();
    assert!(rep.gradient_defect <= 1e-8 && rep.meanzero_defect <= 1e-8, "{rep:?}");

    let product = builtin_model("product:3:quartic-quadratic").unwrap();
    let g = TestFunction::new("even", 3, |x| x[0].powi(4) + x[0] * x[0] * x[1] * x[1] + x[2], |x| {
        vec![4.0 * x[0].powi(3) + 2.0 * x[0] * x[1] * x[1], 2.0 * x[0] * x[0] * x[1], 1.0]
    });
    let u = TestFunction::generic(3);
    let rep = centered_conditional_check(&product, &g, &Isometry::reflection(&[1.0, 0.0, 0.0]), &u, 6, 96, 2).unwrap();
    assert_eq!(rep.slice_dim, 1);
    assert!(rep.gradient_defect <= 1e-8 && rep.meanzero_defect <= 1e-8, "{rep:?}");

    let flip2 = Isometry::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 1.0]))).unwrap();
    let rep = centered_conditional_check(&product, &g, &flip2, &u, 3, 48, 3).unwrap();
    assert_eq!(rep.slice_dim, 2);
    assert!(rep.gradient_defect <= 1e-8 && rep.meanzero_defect <= 1e-8, "{rep:?}");

    let sq = builtin_model("quartic-square-2d").unwrap();
    let diag = Isometry::reflection(&unit(&[1.0, -1.0]));
    let g = TestFunction::squared_norm(2);
    let rep = centered_conditional_check(&sq, &g, &diag, &TestFunction::generic(2), 6, 96, 4).unwrap();
    assert!(rep.gradient_defect <= 1e-8 && rep.meanzero_defect <= 1e-8, "{rep:?}");

    let q = builtin_model("quartic-2d").unwrap();
    let swap = Isometry::permutation(&[1, 0]);
    assert!(matches!(centered_conditional_check(&q, &g, &swap, &TestFunction::generic(2), 2, 32, 5), Err(Error::Precondition(_))));
}

fn trapezoid(lo: f64, hi: f64, k: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / k as f64;
    (0..=k).map(|i| f(lo + i as f64 * h) * if i == 0 || i == k { 0.5 } else { 1.0 }).sum::<f64>() * h
}

#[test]
fn fubini_on_two_dimensional_models() {
    let f = |x: &[f64]| x[0] * x[0] + (x[1]).sin() + 0.5 * x[0] * x[1] + x[1].powi(4);
    for (name, dir) in [("quartic-2d", unit(&[1.0, 1.0])), ("quartic-square-2d", vec![1.0, 0.0]), ("correlated-gaussian:2:0.3", unit(&[2.0, -1.0]))] {
        let model = builtin_model(name).unwrap();
        let e = line(&dir);
        let perp = [-dir[1], dir[0]];
        let (l, k) = (9.0, 1800);
        let joint = |x: f64, y: f64| (-model.potential(&[x, y])).exp();
        let z = trapezoid(-l, l, k, |x| trapezoid(-l, l, k, |y| joint(x, y)));
        let direct = trapezoid(-l, l, k, |x| trapezoid(-l, l, k, |y| joint(x, y) * f(&[x, y]))) / z;

        let mut num = 0.0;
        let mut den = 0.0;
        let (ks, h) = (1800, 2.0 * l / 1800.0);
        for i in 0..=ks {
            let s = -l + i as f64 * h;
            let w = if i == 0 || i == ks { 0.5 } else { 1.0 };
            let c = condition(&model, &[s * perp[0], s * perp[1]], &e).unwrap();
            let zs = trapezoid(-l, l, k, |t| (-c.potential_1d(t)).exp());
            if zs < 1e-280 {
                continue;
            }
            let rule = slice_rule(&c, 128).unwrap();
            num += w * zs * rule.expect(|t| f(&c.point(t)));
            den += w * zs;
        }
        let nested = num / den;
        assert!((nested - direct).abs() <= 1e-6 * direct.abs(), "{name}: {nested} vs {direct}");
    }
}

fn quad_field(dec: &symvar::symmetry::IdentityDecomposition, x: &[f64], u: &[f64]) -> f64 {
    dec.terms
        .iter()
        .map(|t| {
            let px: f64 = t.subspace.project(x).iter().map(|a| a * a).sum();
            let pu: f64 = t.subspace.project(u).iter().map(|a| a * a).sum();
            t.coefficient * (1.0 + px + (px * 3.0).sin().powi(2)) * pu
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditioning_is_anchor_consistent(
        x in prop::collection::vec(-2.0f64..2.0, 3),
        shift in -3.0f64..3.0,
        t in -2.0f64..2.0,
        which in 0usize..3,
    ) {
        let model = builtin_model(["correlated-gaussian:3:0.2", "radial-quartic:3", "product:3:double-well"][which]).unwrap();
        let e = line(&unit(&[1.0, -2.0, 0.5]));
        let moved: Vec<f64> = x.iter().zip(e.embed(&[shift])).map(|(a, b)| a + b).collect();
        let a = condition(&model, &x, &e).unwrap();
        let b = condition(&model, &moved, &e).unwrap();
        prop_assert!((a.potential_1d(t) - b.potential_1d(t)).abs() <= 1e-12 * (1.0 + a.potential_1d(t).abs()));
    }

    #[test]
    fn symmetrize_is_idempotent(x in prop::collection::vec(-2.0f64..2.0, 3), which in 0usize..3) {
        let group = Arc::new(builtin_group(["unconditional:3", "simplex:3", "exchangeable:3"][which]).unwrap().group);
        let f = symmetrize(&TestFunction::generic(3), &group);
        let ff = symmetrize(&f, &group);
        prop_assert!((f.eval(&x) - ff.eval(&x)).abs() <= 1e-12);
        for (a, b) in f.grad(&x).iter().zip(ff.grad(&x)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratic_forms_are_invariant(
        x in prop::collection::vec(-2.0f64..2.0, 3),
        u in prop::collection::vec(-2.0f64..2.0, 3),
        which in 0usize..3,
        pick in 0usize..1000,
    ) {
        let bg = builtin_group(["unconditional:3", "simplex:3", "exchangeable:3"][which]).unwrap();
        let dec = bg.decomposition().unwrap();
        let g = &bg.group.elements[pick % bg.group.order];
        let lhs = quad_field(&dec, &g.apply(&x), &g.apply(&u));
        let rhs = quad_field(&dec, &x, &u);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}
