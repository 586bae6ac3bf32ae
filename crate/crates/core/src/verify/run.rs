use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::{parse_grid, DecompositionSpec, Scenario};
use crate::bounds::*;
use crate::gap1d::{anti_invariant_eigenfunction_check, moment_ratio, SpinRow};
use crate::measures::{
    builtin_model, centered_conditional_check, check_invariance, symmetrize, MeasureModel, ModelKind, Potential1d,
    TestFunction,
};
use crate::sampling::{borell_ratio, isotropize, sample_with, ChainMeta, SampleBatch, SamplerConfig};
use crate::stats::{jackknife, mean, Estimate};
use crate::symmetry::{
    builtin_group, cayley_spectral_gap, exchangeable_decomposition, kappa, BuiltinGroup, DecompositionSummary,
    DecompositionTerm, FiniteGroup, IdentityDecomposition, IsometryKind, Subspace, DECOMPOSITION_TOL,
};
use crate::{Error, Result};

/// Tolerance of the matrix inequalities over random trials.
pub const MATRIX_INEQUALITY_TOL: f64 = 1e-9;
/// Tolerance of the quadrature centered-conditional defects.
pub const CENTERED_TOL: f64 = 1e-8;
/// Grid resolution for two-dimensional eigenproblems launched from scenarios.
pub const GRID_2D_RESOLUTION: usize = 96;

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantResult {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub order: usize,
    pub generators: usize,
    pub orbits: usize,
    pub cayley_gap: f64,
    pub kappa: f64,
    pub decomposition: DecompositionSummary,
}

impl GroupSummary {
    /// Order, orbit count, Cayley gap and `κ` of a group with decomposition `dec`.
    pub fn new(bg: &BuiltinGroup, dec: &IdentityDecomposition) -> Result<Self> {
        let gap = cayley_spectral_gap(&bg.group, &bg.gens)?;
        let weighted = bg.gens.clone().with_uniform_weight(gap.constant);
        Ok(Self {
            name: bg.name.clone(),
            order: bg.group.order,
            generators: bg.gens.len(),
            orbits: bg.gens.num_orbits(),
            cayley_gap: gap.constant,
            kappa: kappa(dec, &weighted)?,
            decomposition: dec.summary(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpinTable {
    pub rows: Vec<SpinRow>,
    pub unbounded: bool,
    pub growth_exponent: f64,
}

/// Everything produced by one scenario. Timings are kept out of the
/// serialized form.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub version: String,
    pub sampler: ChainMeta,
    pub group: Option<GroupSummary>,
    pub bounds: Vec<BoundReport>,
    pub invariants: Vec<InvariantResult>,
    pub spin: Option<SpinTable>,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn violated(&self) -> bool {
        self.bounds.iter().any(|b| b.verdict == Verdict::Violated) || self.invariants.iter().any(|i| !i.passed)
    }

    /// 0 when nothing is violated, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.violated() {
            2
        } else {
            0
        }
    }
}

/// Test function by name: `x<i>`, `norm2`, `norm4` (`∑ x_i⁴`), `h2:<i>`,
/// `generic`, `const`.
pub fn parse_function(name: &str, dim: usize) -> Result<TestFunction> {
    let bad = || Error::Configuration(format!("unknown function '{name}' for dimension {dim}"));
    let index = |s: &str| -> Result<usize> {
        let i: usize = s.parse().map_err(|_| bad())?;
        if i == 0 || i > dim {
            return Err(bad());
        }
        Ok(i - 1)
    };
    match name {
        "norm2" => Ok(TestFunction::squared_norm(dim)),
        "norm4" => Ok(TestFunction::new(
            "sum x^4",
            dim,
            |x: &[f64]| x.iter().map(|v| v.powi(4)).sum(),
            |x: &[f64]| x.iter().map(|v| 4.0 * v.powi(3)).collect(),
        )),
        "generic" => Ok(TestFunction::generic(dim)),
        "const" => Ok(TestFunction::constant(dim, 1.0)),
        _ => {
            if let Some(i) = name.strip_prefix("h2:") {
                Ok(TestFunction::hermite2(dim, index(i)?))
            } else if let Some(i) = name.strip_prefix('x') {
                Ok(TestFunction::coordinate(dim, index(i)?))
            } else {
                Err(bad())
            }
        }
    }
}

struct Context<'a> {
    sc: &'a Scenario,
    model: MeasureModel,
    batch: SampleBatch,
    iso: Option<SampleBatch>,
    group: Option<(BuiltinGroup, Arc<FiniteGroup>, IdentityDecomposition)>,
    functions: Vec<TestFunction>,
}

impl Context<'_> {
    fn iso_batch(&self) -> &SampleBatch {
        self.iso.as_ref().unwrap_or(&self.batch)
    }

    fn group(&self, bound: &str) -> Result<&(BuiltinGroup, Arc<FiniteGroup>, IdentityDecomposition)> {
        self.group.as_ref().ok_or_else(|| Error::Configuration(format!("bound '{bound}' needs a [group]")))
    }

    fn spin_potential(&self) -> Result<(Potential1d, Option<(usize, f64)>)> {
        if let Some(s) = self.model.as_spin() {
            return Ok((s.v.clone(), Some((s.n, s.m))));
        }
        let name = self.sc.bounds.potential.as_deref().ok_or_else(|| {
            Error::Configuration("spin bounds need a spin model or [bounds] potential".into())
        })?;
        Ok((Potential1d::named(name)?, None))
    }
}

fn scenario_error(line: usize, e: Error) -> Error {
    match e {
        Error::Scenario { .. } => e,
        other => Error::Scenario { line, message: other.to_string() },
    }
}

fn tagged(mut r: BoundReport, f: &TestFunction) -> BoundReport {
    r.name = format!("{}[{}]", r.name, f.name);
    r
}

// Failed hypotheses become report rows; anything else aborts the scenario.
fn soften(name: &str, r: Result<Vec<BoundReport>>) -> Result<Vec<BoundReport>> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ (Error::Precondition(_) | Error::Positivity { .. })) => {
            Ok(vec![BoundReport::precondition_violated(name, &e.to_string())])
        }
        Err(e) => Err(e),
    }
}

fn rayleigh(f: &TestFunction, batch: &SampleBatch) -> Estimate {
    let v = batch.map(|x| f.eval(x));
    let v2: Vec<f64> = v.iter().map(|t| t * t).collect();
    let g = batch.map(|x| f.grad(x).iter().map(|t| t * t).sum());
    jackknife(&[v, v2, g], |m, _| (m[1] - m[0] * m[0]) / m[2])
}

fn run_bound(cx: &Context, name: &str, spin: &mut Option<SpinTable>) -> Result<Vec<BoundReport>> {
    let sc = cx.sc;
    let src = sc.bounds.slice_source;
    let k = &sc.constants;
    let per_function = |f: &dyn Fn(&TestFunction) -> Result<Vec<BoundReport>>| -> Result<Vec<BoundReport>> {
        let mut out = Vec::new();
        for t in &cx.functions {
            let label = format!("{name}[{}]", t.name);
            out.extend(soften(&label, f(t))?);
        }
        Ok(out)
    };
    match name {
        "brascamp-lieb" => per_function(&|f| Ok(vec![tagged(brascamp_lieb(&cx.model, f, &cx.batch)?, f)])),
        "helffer" => per_function(&|f| Ok(vec![tagged(helffer(&cx.model, f, &cx.batch, src, k)?, f)])),
        "invariance1" => {
            let (_, g, dec) = cx.group(name)?;
            per_function(&|f| {
                let r = invariance1(&cx.model, dec, g, f, &cx.batch, sc.bounds.rho, src, k)?;
                Ok(vec![tagged(r.full, f), tagged(r.relaxed.with_config("h_certificate", r.h_certificate), f)])
            })
        }
        "invariance2" => {
            let (_, _, dec) = cx.group(name)?;
            let rho = sc.bounds.rho.unwrap_or_else(|| cx.model.convexity_floor().unwrap_or(0.0));
            per_function(&|f| Ok(vec![tagged(invariance2(&cx.model, dec, f, &cx.batch, rho, sc.bounds.anchors, src, k)?, f)]))
        }
        "vargeneral" => {
            let (bg, g, dec) = cx.group(name)?;
            per_function(&|f| {
                let r = vargeneral(&cx.model, dec, g, &bg.gens, f, &cx.batch, sc.bounds.alpha, src, k)?;
                Ok(vec![tagged(r.main, f), tagged(r.kappa_form, f), tagged(r.averaging, f)])
            })
        }
        "varnorm" => {
            let (_, _, dec) = cx.group(name)?;
            let r = varnorm(cx.iso_batch(), dec, k)?;
            Ok(vec![r.bound, r.isotropic])
        }
        "var-split" => {
            let (bg, _, dec) = cx.group(name)?;
            Ok(vec![var_split(cx.iso_batch(), Some(dec), Some(&bg.gens), k)?])
        }
        "poincsym" => {
            let (bg, g, dec) = cx.group(name)?;
            let c = cayley_spectral_gap(g, &bg.gens)?.constant;
            let p = poincsym(dec, &bg.gens.clone().with_uniform_weight(c), k)?;
            let b = cx.iso_batch();
            let lhs = cx
                .functions
                .iter()
                .map(|f| rayleigh(f, b))
                .filter(|e| e.value.is_finite())
                .fold(Estimate { value: f64::NAN, std_error: f64::NAN }, |a, e| if a.value.is_nan() || e.value > a.value { e } else { a });
            Ok(vec![BoundReport::reported("poincsym", lhs, Estimate::exact(p.value))
                .with_config("m_prime", p.m_prime)
                .with_config("kappa", p.kappa)
                .with_config("max_dim", p.max_dim)])
        }
        "borell" => {
            let b = cx.iso_batch();
            let n = b.dim;
            let centre: Vec<f64> = (0..n).map(|j| b.rows().map(|x| x[j]).sum::<f64>() / b.len() as f64).collect();
            let diag = vec![1.0 / (n as f64).sqrt(); n];
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            let mut out = Vec::new();
            for (label, theta) in [("e1", e1), ("diagonal", diag)] {
                let c = centre.clone();
                let h = move |x: &[f64]| x.iter().zip(&c).zip(&theta).map(|((a, m), t)| (a - m) * t).sum::<f64>();
                let r = borell_ratio(h, b)?;
                out.push(BoundReport::reported(&format!("borell[{label}]"), r, Estimate::exact(k.c_borell)));
            }
            Ok(out)
        }
        "kls" => {
            let n = cx.model.dim();
            let mut subspaces: Vec<Subspace> = match &cx.group {
                Some((_, _, dec)) => dec.terms.iter().filter(|t| t.subspace.dim() == 1).map(|t| t.subspace.clone()).collect(),
                None => Vec::new(),
            };
            if subspaces.is_empty() {
                subspaces = (0..n).map(|i| Subspace::coordinates(n, &[i])).collect();
            }
            subspaces.truncate(4);
            let grid = SliceGaps::new(&cx.model, subspaces.clone(), crate::bounds::SliceGapSource::Grid, k.slice_resolution)?;
            let kls = SliceGaps::new(&cx.model, subspaces.clone(), crate::bounds::SliceGapSource::Kls, k.slice_resolution)?;
            let pts = subsample(&cx.batch, sc.bounds.anchors.max(1));
            let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
            for x in pts {
                for i in 0..subspaces.len() {
                    let (a, b) = (grid.gap(x, i)?, kls.gap(x, i)?);
                    if a / b > worst.0 {
                        worst = (a / b, a, b);
                    }
                }
            }
            Ok(vec![BoundReport::compare("kls", Estimate::exact(worst.1), Estimate::exact(worst.2))])
        }
        "anti-invariant" => {
            let (bg, _, _) = cx.group(name)?;
            let ModelKind::Smooth(p) = &cx.model.kind else {
                return Err(Error::Configuration("anti-invariant check needs a smooth model".into()));
            };
            let refl: Vec<_> = bg.gens.generators.iter().filter(|g| g.kind == IsometryKind::Reflection).cloned().collect();
            soften(name, (|| {
                let r = anti_invariant_eigenfunction_check(p, &refl, GRID_2D_RESOLUTION, 9)?;
                let rhs = Estimate::exact(r.max_slice_constant + r.constant_tolerance);
                Ok(vec![BoundReport::compare("anti-invariant", Estimate::exact(r.poincare_constant), rhs)
                    .with_config("phi_norm", r.phi_norm)
                    .with_config("phi_residual", r.phi_residual)
                    .with_config("grid_tolerance", r.grid_tolerance)
                    .with_config("multiplicity", r.multiplicity)])
            })())
        }
        "spin-gap" => {
            let (v, site) = cx.spin_potential()?;
            let ms = parse_grid(&sc.bounds.m_grid)?;
            let r = spin_gap_rhs(&v, sc.bounds.alpha, &ms, sc.bounds.resolution)?;
            let lhs = match site {
                Some((n, m)) if n <= 3 => {
                    let res = if n == 2 { sc.bounds.resolution } else { GRID_2D_RESOLUTION };
                    Estimate::exact(spin_conditional_gap(&v, n, m, res)?)
                }
                _ => Estimate { value: f64::NAN, std_error: f64::NAN },
            };
            let rep = if lhs.value.is_nan() {
                BoundReport::reported("spin-gap", lhs, Estimate::exact(r.rhs))
            } else {
                BoundReport::compare("spin-gap", lhs, Estimate::exact(r.rhs))
            };
            let rep = rep.with_config("unbounded", r.unbounded).with_config("growth_exponent", r.growth_exponent);
            *spin = Some(SpinTable { rows: r.rows, unbounded: r.unbounded, growth_exponent: r.growth_exponent });
            Ok(vec![rep])
        }
        "spin-linear" => {
            let s = cx.model.as_spin().ok_or_else(|| Error::Configuration("spin-linear needs a spin model".into()))?;
            let res = if s.n == 2 { sc.bounds.resolution } else { GRID_2D_RESOLUTION };
            let r = spin_linear_variance(&cx.model, &cx.batch, res)?;
            let rep = match r.poincare_constant {
                Some(c) => BoundReport::compare("spin-linear", r.pooled, Estimate::exact(c)),
                None => BoundReport::reported("spin-linear", r.pooled, Estimate { value: f64::NAN, std_error: f64::NAN }),
            };
            Ok(vec![rep.with_config("exchangeable", r.exchangeable)])
        }
        "moment-ratio" => {
            let (v, site) = cx.spin_potential()?;
            let m = site.map_or(0.0, |s| s.1);
            let v0 = v.v_exact(m);
            let f = |t: f64| (-(v.v_exact(m + t) + v.v_exact(m - t) - 2.0 * v0)).exp();
            let bps: Vec<f64> = v.breakpoints.iter().map(|b| (b - m).abs()).filter(|t| *t > 0.0).collect();
            let r = moment_ratio(&f, &bps);
            Ok(vec![BoundReport::compare("moment-ratio", Estimate::exact(r.value), Estimate::exact(2.0 + crate::gap1d::MOMENT_RATIO_TOL))
                .with_config("log_concave_consistent", r.log_concave_consistent)])
        }
        "isotropy" => {
            let r = isotropy_constant(&cx.model, &cx.batch)?;
            Ok(vec![BoundReport::reported("isotropy", r.l_k, Estimate { value: f64::NAN, std_error: f64::NAN })
                .with_config("volume", r.volume)
                .with_config("volume_estimated", r.volume_estimated)])
        }
        "fix-section" => {
            let n = cx.model.dim();
            if !matches!(cx.model.as_body().map(|b| &b.shape), Some(crate::measures::BodyShape::Cube { .. })) || n < 2 {
                return Err(Error::Configuration("fix-section needs a cube model of dimension at least 2".into()));
            }
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(0, 1);
            let d = cube_fix_section_check(&perm, 200, sc.seed)?;
            Ok(vec![BoundReport::compare("fix-section", Estimate::exact(d), Estimate::exact(MATRIX_INEQUALITY_TOL))])
        }
        _ => Err(Error::Configuration(format!("unknown bound '{name}'"))),
    }
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&a + a.transpose()) * 0.5
}

fn invariant_suites(cx: &Context) -> Result<Vec<InvariantResult>> {
    let sc = cx.sc;
    let mut out = Vec::new();
    let Some((bg, group, dec)) = &cx.group else { return Ok(out) };
    let n = dec.ambient();
    out.push(InvariantResult::at_most("decomposition-residual", dec.residual(), DECOMPOSITION_TOL));
    out.push(InvariantResult::at_most("decomposition-trace", dec.trace_defect(), DECOMPOSITION_TOL));

    let mut model_defect: f64 = 0.0;
    for g in &bg.gens.generators {
        model_defect = model_defect.max(check_invariance(&cx.model, g, 256, sc.seed)?);
    }
    out.push(InvariantResult::at_most("model-invariance", model_defect, 1e-9));

    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed ^ 0x1a2b);
    let mut hs = f64::INFINITY;
    let mut inv = f64::INFINITY;
    let full = dec.target.dim() == n;
    for _ in 0..sc.trials {
        let h = random_symmetric(n, &mut rng);
        hs = hs.min(hs_projection_gap(&h, dec));
        if full {
            let alphas: Vec<f64> = dec.terms.iter().map(|_| 0.1 + 3.0 * rng.random::<f64>()).collect();
            let mut m = DMatrix::zeros(n, n);
            for (t, a) in dec.terms.iter().zip(&alphas) {
                m += t.subspace.projector() * (t.coefficient * a);
            }
            let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            m += &b * b.transpose();
            let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            inv = inv.min(h_inversion_gap(&m, dec, &alphas, &v));
        }
    }
    if sc.trials > 0 {
        out.push(InvariantResult::at_most("hilbert-schmidt-projection", -hs, MATRIX_INEQUALITY_TOL));
        if full {
            out.push(InvariantResult::at_most("h-inversion", -inv, MATRIX_INEQUALITY_TOL));
        }
    }

    // Centered conditionals by quadrature, one generator per orbit.
    if model_defect <= 1e-9 {
        let g = TestFunction::squared_norm(n);
        let u = TestFunction::generic(n);
        let mut worst: f64 = 0.0;
        let mut any = false;
        for orbit in bg.gens.orbits() {
            let r = &bg.gens.generators[orbit[0]];
            match centered_conditional_check(&cx.model, &g, r, &u, 3, 24, sc.seed) {
                Ok(rep) => {
                    any = true;
                    worst = worst.max(rep.gradient_defect).max(rep.meanzero_defect);
                }
                Err(Error::Unsupported(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if any {
            out.push(InvariantResult::at_most("centered-conditional", worst, CENTERED_TOL));
        }
    }

    // Mean-zero of u∘R − u under μ, by Monte Carlo.
    let u = TestFunction::generic(n);
    let mut excess = f64::NEG_INFINITY;
    for r in &bg.gens.generators {
        let d = cx.batch.map(|x| u.eval(&r.apply(x)) - u.eval(x));
        let e = mean(&d);
        excess = excess.max(e.value.abs() - 3.0 * e.std_error);
    }
    out.push(InvariantResult::at_most("mean-zero-mc", excess, 0.0));

    // Averaging contraction of the Dirichlet form.
    let f_bar = symmetrize(&u, group);
    let d = cx.batch.map(|x| {
        let a: f64 = f_bar.grad(x).iter().map(|t| t * t).sum();
        let b: f64 = u.grad(x).iter().map(|t| t * t).sum();
        a - b
    });
    let e = mean(&d);
    out.push(InvariantResult::at_most("averaging-contraction", e.value - 3.0 * e.std_error, 0.0));
    Ok(out)
}

fn whole_space(n: usize) -> Result<IdentityDecomposition> {
    let e = Subspace::full(n);
    IdentityDecomposition::new(vec![DecompositionTerm { coefficient: 1.0, subspace: e.clone() }], e, vec![0])
}

/// Execute a parsed scenario.
pub fn run(sc: &Scenario) -> Result<RunReport> {
    let mut timings = Vec::new();
    let clock = Instant::now();
    let model = builtin_model(&sc.model).map_err(|e| scenario_error(sc.line("model", "name"), e))?;
    let n = model.dim();

    let group = match &sc.group {
        None => None,
        Some(name) => {
            let line = sc.line("group", "name");
            let bg = builtin_group(name).map_err(|e| scenario_error(line, e))?;
            if bg.dim() != n {
                return Err(Error::Scenario { line, message: format!("group acts on R^{}, model on R^{n}", bg.dim()) });
            }
            let dec = match sc.decomposition {
                DecompositionSpec::Auto => bg.decomposition(),
                DecompositionSpec::Exchangeable => exchangeable_decomposition(n),
                DecompositionSpec::Whole => whole_space(n),
            }
            .map_err(|e| scenario_error(sc.line("group", "decomposition"), e))?;
            let g = Arc::new(bg.group.clone());
            Some((bg, g, dec))
        }
    };
    timings.push(("group".to_string(), clock.elapsed().as_secs_f64()));

    let functions = sc
        .bounds
        .functions
        .iter()
        .map(|f| parse_function(f, n))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| scenario_error(sc.line("bounds", "functions"), e))?;

    let cfg = SamplerConfig {
        burn_in: sc.sampler.burn_in,
        thin: sc.sampler.thin,
        chains: sc.sampler.chains,
        force_mcmc: sc.sampler.force_mcmc,
    };
    let batch = sample_with(&model, sc.sampler.samples, sc.seed, &cfg).map_err(|e| scenario_error(sc.line("sampler", "samples"), e))?;
    let iso = if sc.isotropize {
        Some(isotropize(&model, &batch).map_err(|e| scenario_error(sc.line("model", "isotropize"), e))?.1)
    } else {
        None
    };
    timings.push(("sampling".to_string(), clock.elapsed().as_secs_f64()));

    let summary = match &group {
        None => None,
        Some((bg, _, dec)) => Some(GroupSummary::new(bg, dec).map_err(|e| scenario_error(sc.line("group", "name"), e))?),
    };

    let cx = Context { sc, model, batch, iso, group, functions };
    let line = sc.line("bounds", "list");
    let mut bounds = Vec::new();
    let mut spin = None;
    for name in &sc.bounds.list {
        let t0 = clock.elapsed().as_secs_f64();
        bounds.extend(run_bound(&cx, name, &mut spin).map_err(|e| scenario_error(line, e))?);
        timings.push((name.clone(), clock.elapsed().as_secs_f64() - t0));
    }
    let t0 = clock.elapsed().as_secs_f64();
    let invariants = invariant_suites(&cx).map_err(|e| scenario_error(sc.line("group", "name"), e))?;
    timings.push(("invariants".to_string(), clock.elapsed().as_secs_f64() - t0));

    let bounds = bounds
        .into_iter()
        .map(|mut b| {
            b.config.insert("seed".into(), sc.seed.to_string());
            b
        })
        .collect();
    Ok(RunReport {
        scenario: sc.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        sampler: cx.batch.meta.clone(),
        group: summary,
        bounds,
        invariants,
        spin,
        timings,
    })
}
