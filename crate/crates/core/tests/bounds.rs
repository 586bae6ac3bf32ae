use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symvar::bounds::*;
use symvar::gap1d::{slice_gap_1d, Grid};
use symvar::measures::*;
use symvar::sampling::*;
use symvar::symmetry::*;
use symvar::Error;

const N: usize = 100_000;

fn constants() -> Constants {
    Constants::default()
}

fn sq_norm(n: usize) -> TestFunction {
    TestFunction::squared_norm(n)
}

#[test]
fn brascamp_lieb_examples() {
    let g = builtin_model("gaussian:3").unwrap();
    let b = sample(&g, N, 1).unwrap();
    let r = brascamp_lieb(&g, &TestFunction::coordinate(3, 0), &b).unwrap();
    assert!((r.rhs.value - 1.0).abs() < 1e-12);
    assert_eq!(r.verdict, Verdict::Consistent, "{r:?}");
    let c = brascamp_lieb(&g, &TestFunction::constant(3, 1.0), &b).unwrap();
    assert_eq!(c.rhs.value, 0.0);
    assert_eq!(c.lhs.value, 0.0);

    let q = builtin_model("radial-quartic:3").unwrap();
    let b = sample(&q, N, 2).unwrap();
    let r = brascamp_lieb(&q, &TestFunction::coordinate(3, 0), &b).unwrap();
    assert!(r.rhs.value >= r.lhs.value - 3.0 * r.lhs.std_error, "{r:?}");
    assert!(r.acceptable());
}

#[test]
fn brascamp_lieb_rejects_singular_hessian() {
    let q = MeasureModel::product("product:2:quartic", vec![Potential1d::quartic(); 2]);
    let b = SampleBatch::from_points(vec![0.0, 0.0, 0.5, 0.5], 2, 0);
    let e = brascamp_lieb(&q, &TestFunction::coordinate(2, 0), &b).unwrap_err();
    assert!(matches!(e, Error::Positivity { .. }), "{e:?}");
}

#[test]
fn helffer_examples() {
    // Product measure: K is diagonal, so the bound is E c_P(μ_{x,ℝe_1}).
    let p = builtin_model("product:2:quartic").unwrap();
    let b = sample(&p, N, 3).unwrap();
    let r = helffer(&p, &TestFunction::coordinate(2, 0), &b, SliceGapSource::Auto, &constants()).unwrap();
    let exact = slice_gap_1d(&|t: f64| t.powi(4), 2048).unwrap();
    assert!((r.rhs.value - exact).abs() < 1e-3 * exact, "{} vs {exact}", r.rhs.value);
    assert_eq!(r.verdict, Verdict::Verified, "{r:?}");

    let c = builtin_model("correlated-gaussian:3:0.2").unwrap();
    let b = sample(&c, N, 4).unwrap();
    let r = helffer(&c, &TestFunction::coordinate(3, 0), &b, SliceGapSource::Auto, &constants()).unwrap();
    assert!(r.rhs.value.is_finite());
    assert!(r.rhs.value >= r.lhs.value - 3.0 * r.lhs.std_error, "{r:?}");

    // Non-log-concave product with K still positive.
    let d = builtin_model("product:2:double-well").unwrap();
    let b = sample(&d, N, 5).unwrap();
    let r = helffer(&d, &TestFunction::coordinate(2, 0), &b, SliceGapSource::Auto, &constants()).unwrap();
    assert!(r.acceptable(), "{r:?}");
}

#[test]
fn invariance1_gaussian_chi_square() {
    let n = 4;
    let g = builtin_model(&format!("gaussian:{n}")).unwrap();
    let grp = builtin_group(&format!("unconditional:{n}")).unwrap();
    let dec = grp.decomposition().unwrap();
    let b = sample(&g, N, 6).unwrap();
    let r = invariance1(&g, &dec, &grp.group, &sq_norm(n), &b, Some(1.0), SliceGapSource::Auto, &constants()).unwrap();
    assert!(r.relaxed.rhs.within(2.0 * n as f64, 3.0), "{:?}", r.relaxed);
    assert!(r.relaxed.lhs.within(2.0 * n as f64, 3.0), "{:?}", r.relaxed);
    assert_eq!(r.relaxed.verdict, Verdict::Consistent);
    assert!(r.full.acceptable());
    assert!(r.h_certificate > 0.0);
}

#[test]
fn invariance1_isotropic_cube() {
    let n = 4;
    let c = cube(n, 3f64.sqrt());
    let grp = builtin_group(&format!("unconditional:{n}")).unwrap();
    let dec = grp.decomposition().unwrap();
    let b = sample(&c, N, 7).unwrap();
    let r = invariance1(&c, &dec, &grp.group, &sq_norm(n), &b, None, SliceGapSource::Auto, &constants()).unwrap();
    assert!(r.full.lhs.within(0.8 * n as f64, 3.0), "{:?}", r.full);
    assert_eq!(r.full.verdict, Verdict::Verified, "{:?}", r.full);
    assert_eq!(r.relaxed.verdict, Verdict::Verified);
}

#[test]
fn invariance1_nonconvex_dent() {
    let n = 2;
    let m = builtin_model("radial-dent:2:1.5").unwrap();
    let rho = m.convexity_floor().unwrap();
    assert!(rho < 0.0);
    let grp = builtin_group(&format!("unconditional:{n}")).unwrap();
    let dec = grp.decomposition().unwrap();
    let b = sample(&m, 40_000, 8).unwrap();
    let r = invariance1(&m, &dec, &grp.group, &sq_norm(n), &b, Some(rho), SliceGapSource::Auto, &constants()).unwrap();
    assert!(r.full.acceptable() && r.relaxed.acceptable(), "{r:?}");
    assert_eq!(r.relaxed.verdict, Verdict::Verified, "{r:?}");
}

#[test]
fn invariance1_requires_invariant_function() {
    let g = builtin_model("gaussian:2").unwrap();
    let grp = builtin_group("unconditional:2").unwrap();
    let dec = grp.decomposition().unwrap();
    let b = sample(&g, 1000, 9).unwrap();
    let e = invariance1(&g, &dec, &grp.group, &TestFunction::coordinate(2, 0), &b, None, SliceGapSource::Auto, &constants())
        .unwrap_err();
    assert!(matches!(e, Error::Precondition(_)), "{e:?}");
}

fn whole_space(n: usize) -> IdentityDecomposition {
    let e = Subspace::full(n);
    IdentityDecomposition::new(vec![DecompositionTerm { coefficient: 1.0, subspace: e.clone() }], e, vec![0]).unwrap()
}

#[test]
fn invariance2_examples() {
    for n in [2, 3] {
        let g = builtin_model(&format!("gaussian:{n}")).unwrap();
        let b = sample(&g, N, 10).unwrap();
        let h2 = TestFunction::new(
            "x1^2-1",
            n,
            |x: &[f64]| x[0] * x[0] - 1.0,
            move |x: &[f64]| {
                let mut v = vec![0.0; x.len()];
                v[0] = 2.0 * x[0];
                v
            },
        );
        let r = invariance2(&g, &whole_space(n), &h2, &b, 1.0, 8, SliceGapSource::Auto, &constants()).unwrap();
        assert!(r.lhs.within(2.0, 3.0) && r.rhs.within(2.0, 3.0), "{r:?}");
        assert_eq!(r.verdict, Verdict::Consistent);

        let bad = invariance2(&g, &whole_space(n), &TestFunction::coordinate(n, 0), &b, 1.0, 8, SliceGapSource::Auto, &constants())
            .unwrap();
        assert_eq!(bad.verdict, Verdict::PreconditionViolated, "{bad:?}");
    }
    // Invariant function: the zero-mean condition holds automatically.
    let g = builtin_model("gaussian:3").unwrap();
    let grp = builtin_group("unconditional:3").unwrap();
    let dec = grp.decomposition().unwrap();
    let b = sample(&g, N, 11).unwrap();
    let r = invariance2(&g, &dec, &sq_norm(3), &b, 1.0, 8, SliceGapSource::Auto, &constants()).unwrap();
    let r1 = invariance1(&g, &dec, &grp.group, &sq_norm(3), &b, Some(1.0), SliceGapSource::Auto, &constants()).unwrap();
    assert!((r.rhs.value - r1.relaxed.rhs.value).abs() < 1e-12);
}

#[test]
fn varnorm_examples() {
    let n = 4;
    let g = builtin_model(&format!("gaussian:{n}")).unwrap();
    let dec = builtin_group(&format!("unconditional:{n}")).unwrap().decomposition().unwrap();
    let b = sample(&g, N, 12).unwrap();
    let r = varnorm(&b, &dec, &constants()).unwrap();
    assert!(r.bound.rhs.within(48.0 * n as f64, 3.0), "{:?}", r.bound);
    assert!(r.bound.lhs.within(2.0 * n as f64, 3.0));
    assert_eq!(r.bound.verdict, Verdict::Verified);
    assert_eq!(r.isotropic.rhs.value, 48.0 * n as f64);
    assert_eq!(r.isotropic.verdict, Verdict::Reported);

    let c = builtin_model(&format!("cube:{n}")).unwrap();
    let (_, y) = isotropize(&c, &sample(&c, N, 13).unwrap()).unwrap();
    let r = varnorm(&y, &dec, &constants()).unwrap();
    assert!(r.bound.rhs.within(28.8 * n as f64, 3.0), "{:?}", r.bound);
    assert!(r.bound.lhs.within(0.8 * n as f64, 3.0), "{:?}", r.bound);
    assert_eq!(r.bound.verdict, Verdict::Verified);

    let s = builtin_model("simplex-body:4").unwrap();
    let grp = builtin_group("simplex:4").unwrap();
    let (_, y) = isotropize(&s, &sample(&s, N, 14).unwrap()).unwrap();
    let r = varnorm(&y, &grp.decomposition().unwrap(), &constants()).unwrap();
    assert_eq!(r.bound.verdict, Verdict::Verified);
    assert!(r.bound.lhs.value / 4.0 < 2.0, "{:?}", r.bound);
}

fn partial_unconditional(n: usize, k: usize) -> (IdentityDecomposition, GeneratorSet) {
    let gens: Vec<Isometry> = (0..k)
        .map(|i| {
            let mut u = vec![0.0; n];
            u[i] = 1.0;
            Isometry::reflection(&u)
        })
        .collect();
    let group = enumerate_group(&gens, DEFAULT_MAX_ORDER).unwrap();
    let gs = conjugacy_close(&gens, &group).unwrap();
    (identity_decomposition(&gs, &group).unwrap(), gs)
}

#[test]
fn var_split_examples() {
    let n = 6;
    let g = builtin_model(&format!("gaussian:{n}")).unwrap();
    let b = sample(&g, N, 15).unwrap();
    let full = builtin_group(&format!("unconditional:{n}")).unwrap();
    let dec0 = full.decomposition().unwrap();
    let r = var_split(&b, Some(&dec0), Some(&full.gens), &constants()).unwrap();
    assert_eq!(r.rhs.value, 48.0 * n as f64);

    let (dec, gs) = partial_unconditional(n, n - 2);
    let r = var_split(&b, Some(&dec), Some(&gs), &constants()).unwrap();
    assert_eq!(r.rhs.value, 2.0 * 4.0 + 48.0 * n as f64);
    assert!(r.lhs.within(2.0 * n as f64, 3.0));
    assert_eq!(r.verdict, Verdict::Reported);

    let r = var_split(&b, None, None, &constants()).unwrap();
    assert_eq!(r.rhs.value, 2.0 * (n * n) as f64);

    assert!(matches!(var_split(&b, Some(&dec0), Some(&gs), &constants()), Err(Error::Validation(_))));
}

#[test]
fn vargeneral_examples() {
    let n = 3;
    let g = builtin_model(&format!("gaussian:{n}")).unwrap();
    let grp = builtin_group(&format!("unconditional:{n}")).unwrap();
    let dec = grp.decomposition().unwrap();
    let group = Arc::new(grp.group.clone());
    let b = sample(&g, N, 16).unwrap();
    let f = TestFunction::coordinate(n, 0);
    let r = vargeneral(&g, &dec, &group, &grp.gens, &f, &b, 0.0, SliceGapSource::Auto, &constants()).unwrap();
    assert!((r.kappa - 0.25).abs() < 1e-9);
    assert!(r.kappa_form.rhs.within(2.0, 3.0), "{:?}", r.kappa_form);
    assert_eq!(r.kappa_form.verdict, Verdict::Verified);
    assert_eq!(r.main.verdict, Verdict::Verified);
    assert!(r.averaging.acceptable());

    // Invariant f: the symmetrization is f itself.
    let h = sq_norm(n);
    let r = vargeneral(&g, &dec, &group, &grp.gens, &h, &b, 0.0, SliceGapSource::Auto, &constants()).unwrap();
    let var_f: f64 = r.averaging.lhs.value;
    let var_bar: f64 = r.averaging.config["var_symmetrized"].parse().unwrap();
    assert!((var_f - var_bar).abs() < 1e-9 * var_f);
    assert!(r.averaging.acceptable());

    // Exchangeable spin-like Gaussian.
    let s = builtin_model("spin:4:0.3:quadratic").unwrap();
    let sg = builtin_group("simplex:3").unwrap();
    let sdec = sg.decomposition().unwrap();
    let sgroup = Arc::new(sg.group.clone());
    let b = sample(&s, 40_000, 17).unwrap();
    let f = TestFunction::coordinate(3, 0);
    let r = vargeneral(&s, &sdec, &sgroup, &sg.gens, &f, &b, 0.0, SliceGapSource::Auto, &constants()).unwrap();
    assert!((r.kappa - 0.25).abs() < 1e-9, "{}", r.kappa);
    assert_eq!(r.kappa_form.verdict, Verdict::Verified, "{:?}", r.kappa_form);
}

#[test]
fn poincsym_examples() {
    let n = 5;
    let grp = builtin_group(&format!("unconditional:{n}")).unwrap();
    let c = cayley_spectral_gap(&grp.group, &grp.gens).unwrap().constant;
    let gens = grp.gens.clone().with_uniform_weight(c);
    let p = poincsym(&grp.decomposition().unwrap(), &gens, &constants()).unwrap();
    assert_eq!(p.m_prime, n);
    let target = 2.0 * (1.0 + (n as f64).ln()).powi(2);
    assert!((p.value - target).abs() < 1e-9, "{p:?}");

    let d = 3;
    let grp = builtin_group(&format!("schatten-rows:{d}")).unwrap();
    let c = cayley_spectral_gap(&grp.group, &grp.gens).unwrap().constant;
    let gens = grp.gens.clone().with_uniform_weight(c);
    let p = poincsym(&grp.decomposition().unwrap(), &gens, &constants()).unwrap();
    assert_eq!(p.m_prime, d);
    assert_eq!(p.max_dim, d);
    let target = (1.0 + 4.0 * p.kappa) * (1.0 + (d as f64).ln()).powi(2) * d as f64;
    assert!((p.value - target).abs() < 1e-9);
}

#[test]
fn spin_gap_examples() {
    let ms: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let q = spin_gap_rhs(&Potential1d::quadratic(), 0.0, &ms, 1024).unwrap();
    assert!(!q.unbounded);
    assert!((q.rhs - 2.0).abs() < 2e-3, "{}", q.rhs);
    for n in [2, 3] {
        let c = spin_conditional_gap(&Potential1d::quadratic(), n, 0.4, if n == 2 { 2048 } else { 128 }).unwrap();
        assert!((c - 1.0).abs() < 1e-3, "n={n}: {c}");
        assert!(c <= q.rhs);
    }
    let a = spin_gap_rhs(&Potential1d::abs(), 0.0, &ms, 1024).unwrap();
    assert!(a.unbounded && a.rhs.is_infinite());
    assert!(a.growth_exponent >= 1.8, "{}", a.growth_exponent);

    let qq = spin_gap_rhs(&Potential1d::quartic_quadratic(), 0.0, &ms, 1024).unwrap();
    assert!(!qq.unbounded && qq.rhs.is_finite());
    for r in &qq.rows {
        let ratio = r.cp2 / r.j2;
        assert!(ratio > 0.05 && ratio < 20.0, "{r:?}");
    }
    assert!(matches!(spin_gap_rhs(&Potential1d::double_well(), 0.5, &ms, 256), Err(Error::Precondition(_))));
}

#[test]
fn spin_linear_examples() {
    let m = builtin_model("spin:3:0.5:quadratic").unwrap();
    let b = sample(&m, N, 18).unwrap();
    let r = spin_linear_variance(&m, &b, 96).unwrap();
    assert!(r.pooled.within(1.0, 3.0), "{r:?}");
    assert!(r.exchangeable);
    assert_eq!(r.below_poincare, Some(true));

    // Laplace sites, n = 4, m = 0: Var(ℓ) = 7/5 by convolving Laplace densities.
    let m = builtin_model("spin:4:0:abs").unwrap();
    let b = sample(&m, N, 19).unwrap();
    let r = spin_linear_variance(&m, &b, 96).unwrap();
    assert!(r.exchangeable, "{r:?}");
    assert!(r.pooled.within(1.4, 3.0), "{r:?}");
}

#[test]
fn isotropy_examples() {
    let c = builtin_model("cube:3").unwrap();
    let b = sample(&c, N, 20).unwrap();
    let r = isotropy_constant(&c, &b).unwrap();
    assert!(r.l_k.within(1.0 / 12f64.sqrt(), 3.0), "{r:?}");
    assert!(!r.volume_estimated);

    let mut ls = Vec::new();
    for n in [3, 5, 8] {
        let s = builtin_model(&format!("simplex-body:{n}")).unwrap();
        let b = sample(&s, 50_000, 21).unwrap();
        ls.push(isotropy_constant(&s, &b).unwrap().l_k.value);
    }
    let (lo, hi) = ls.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo < 1.5, "{ls:?}");

    let g = builtin_model("gaussian:2").unwrap();
    assert!(matches!(isotropy_constant(&g, &sample(&g, 100, 0).unwrap()), Err(Error::Unsupported(_))));
}

#[test]
fn isotropy_with_estimated_volume() {
    let mut k = builtin_model("cube:2").unwrap();
    if let ModelKind::Body(b) = &mut k.kind {
        b.volume = None;
    }
    let b = sample(&k, N, 22).unwrap();
    let r = isotropy_constant(&k, &b).unwrap();
    assert!(r.volume_estimated);
    assert!((r.volume - 4.0).abs() < 0.05);
    assert!((r.l_k.value - 1.0 / 12f64.sqrt()).abs() < 5e-3, "{r:?}");
}

#[test]
fn fixed_subspace_section() {
    assert!(cube_fix_section_check(&[1, 0, 2, 3], 200, 1).unwrap() < 1e-12);
    assert!(cube_fix_section_check(&[1, 2, 0, 4, 3], 200, 2).unwrap() < 1e-12);
    assert!(cube_fix_section_check(&[0, 0, 1], 1, 3).is_err());
}

#[test]
fn kls_dominates_grid_on_slices() {
    let m = builtin_model("radial-quartic:2").unwrap();
    let e = vec![Subspace::coordinates(2, &[0]), Subspace::span_vectors(2, &[vec![1.0, 1.0]])];
    let grid = SliceGaps::new(&m, e.clone(), SliceGapSource::Grid, 512).unwrap();
    let kls = SliceGaps::new(&m, e, SliceGapSource::Kls, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = [rng.random::<f64>() * 3.0 - 1.5, rng.random::<f64>() * 3.0 - 1.5];
        for i in 0..2 {
            let (a, b) = (grid.gap(&x, i).unwrap(), kls.gap(&x, i).unwrap());
            assert!(b >= a * (1.0 - 1e-6), "{a} {b}");
        }
    }
    let body = builtin_model("cube:2").unwrap();
    let gb = SliceGaps::new(&body, vec![Subspace::coordinates(2, &[1])], SliceGapSource::Grid, 256).unwrap();
    let kb = SliceGaps::new(&body, vec![Subspace::coordinates(2, &[1])], SliceGapSource::Kls, 256).unwrap();
    assert!((gb.gap(&[0.2, 0.0], 0).unwrap() - 4.0 / std::f64::consts::PI.powi(2)).abs() < 1e-9);
    assert!(kb.gap(&[0.2, 0.0], 0).unwrap() >= gb.gap(&[0.2, 0.0], 0).unwrap());
    let _ = Grid::interval(-1.0, 1.0, 16);
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&a + a.transpose()) * 0.5
}

fn decompositions() -> Vec<IdentityDecomposition> {
    let mut out: Vec<IdentityDecomposition> =
        ["unconditional:4", "simplex:3", "dihedral:5", "schatten-rows:2", "exchangeable:4"]
            .iter()
            .map(|n| builtin_group(n).unwrap().decomposition().unwrap())
            .collect();
    out.push(exchangeable_decomposition(5).unwrap());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_schmidt_projection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for dec in decompositions() {
            let h = random_symmetric(dec.ambient(), &mut rng);
            prop_assert!(hs_projection_gap(&h, &dec) >= -1e-9);
        }
    }

    #[test]
    fn h_inversion(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for dec in decompositions() {
            let n = dec.ambient();
            if dec.target.dim() != n {
                continue;
            }
            let alphas: Vec<f64> = dec.terms.iter().map(|_| 0.1 + 3.0 * rng.random::<f64>()).collect();
            let mut h = DMatrix::zeros(n, n);
            for (t, a) in dec.terms.iter().zip(&alphas) {
                h += t.subspace.projector() * (t.coefficient * a);
            }
            let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            h += &b * b.transpose();
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            prop_assert!(h_inversion_gap(&h, &dec, &alphas, &v) >= -1e-9);
        }
    }

    #[test]
    fn verdict_matches_three_sigma(l in -5.0f64..5.0, r in -5.0f64..5.0, sl in 0.0f64..1.0, sr in 0.0f64..1.0) {
        let lhs = symvar::stats::Estimate { value: l, std_error: sl };
        let rhs = symvar::stats::Estimate { value: r, std_error: sr };
        let s = (sl * sl + sr * sr).sqrt();
        let v = BoundReport::compare("p", lhs, rhs).verdict;
        if l < r - 3.0 * s - 1e-9 { prop_assert_eq!(v, Verdict::Verified); }
        if l > r + 3.0 * s + 1e-9 { prop_assert_eq!(v, Verdict::Violated); }
        if (l - r).abs() < 3.0 * s - 1e-9 { prop_assert_eq!(v, Verdict::Consistent); }
    }
}
