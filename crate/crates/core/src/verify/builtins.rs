use serde::Serialize;

use super::scenario::Scenario;
use crate::measures::{MODEL_CATALOG, POTENTIAL_CATALOG};
use crate::symmetry::GROUP_CATALOG;
use crate::{Error, Result};

/// Built-in scenarios as `(name, description, file contents)`.
pub const SCENARIOS: &[(&str, &str, &str)] = &[
    (
        "unconditional-gaussian",
        "standard Gaussian on R^4 under coordinate sign flips: every inequality for sum x_i^4",
        r#"name = "unconditional-gaussian"
seed = 20240101

[model]
name = "gaussian:4"

[group]
name = "unconditional:4"

[sampler]
samples = 40000

[bounds]
list = ["brascamp-lieb", "helffer", "invariance1", "invariance2", "vargeneral", "varnorm", "var-split", "poincsym", "kls"]
functions = ["norm4"]
rho = 0.5

[constants]
slice_samples = 40000
"#,
    ),
    (
        "spin-abs",
        "two-site spin system with V = |t|: J(m) = |m| + 1/2 and an unbounded gap",
        r#"name = "spin-abs"
seed = 7

[model]
name = "spin:2:0:abs"

[sampler]
samples = 20000

[bounds]
list = ["spin-gap", "spin-linear", "moment-ratio"]
m_grid = "-10:10:0.5"
"#,
    ),
    (
        "spin-gaussian",
        "three-site Gaussian spin system at m = 0.5 under site permutations",
        r#"name = "spin-gaussian"
seed = 11

[model]
name = "spin:3:0.5:quadratic"

[group]
name = "simplex:2"

[sampler]
samples = 20000

[bounds]
list = ["spin-gap", "spin-linear", "moment-ratio", "brascamp-lieb", "vargeneral"]
functions = ["x1", "norm2"]
m_grid = "0:10:0.5"

[constants]
slice_samples = 600
"#,
    ),
    (
        "spin-quartic",
        "three-site spin system with V = t^4 at m = 0",
        r#"name = "spin-quartic"
seed = 12

[model]
name = "spin:3:0:quartic"

[sampler]
samples = 20000

[bounds]
list = ["spin-gap", "spin-linear", "moment-ratio"]
m_grid = "0:6:0.5"
"#,
    ),
    (
        "spin-exchangeable",
        "four-site Gaussian spin system: exchangeable decomposition and the general-function bound",
        r#"name = "spin-exchangeable"
seed = 13

[model]
name = "spin:4:0.3:quadratic"

[group]
name = "simplex:3"

[sampler]
samples = 20000

[bounds]
list = ["helffer", "vargeneral", "spin-linear", "var-split"]
functions = ["x1", "generic"]

[constants]
slice_samples = 400
"#,
    ),
    (
        "isotropic-cube",
        "isotropic cube in R^4: the |X|^2 variance bound and the invariant-function bound",
        r#"name = "isotropic-cube"
seed = 21

[model]
name = "isotropic-cube:4"

[group]
name = "unconditional:4"

[sampler]
samples = 20000

[bounds]
list = ["varnorm", "var-split", "invariance1", "poincsym", "borell", "kls"]
functions = ["norm2"]

[constants]
slice_samples = 1000
"#,
    ),
    (
        "simplex-body",
        "regular simplex in R^4 under its symmetry group, isotropized",
        r#"name = "simplex-body"
seed = 22

[model]
name = "simplex-body:4"
isotropize = true

[group]
name = "simplex:4"

[sampler]
samples = 20000

[bounds]
list = ["varnorm", "var-split", "poincsym", "isotropy", "borell"]
functions = ["norm2", "x1"]
"#,
    ),
    (
        "cube-isotropy",
        "isotropy constant of the cube and the fixed-subspace section identity",
        r#"name = "cube-isotropy"
seed = 23

[model]
name = "cube:3"

[group]
name = "unconditional:3"

[sampler]
samples = 20000

[bounds]
list = ["isotropy", "fix-section", "kls"]
"#,
    ),
    (
        "dihedral-square",
        "quartic potential with the symmetries of the square: anti-invariant eigenfunctions",
        r#"name = "dihedral-square"
seed = 31

[model]
name = "quartic-square-2d"

[group]
name = "dihedral:4"

[sampler]
samples = 20000

[bounds]
list = ["anti-invariant", "brascamp-lieb", "helffer", "invariance1", "vargeneral", "poincsym"]
functions = ["norm2", "generic"]

[constants]
slice_samples = 600
"#,
    ),
    (
        "quartic-axes",
        "x^2/2 + y^4 + y^2 under the two axis reflections",
        r#"name = "quartic-axes"
seed = 32

[model]
name = "quartic-2d"

[group]
name = "unconditional:2"

[sampler]
samples = 20000

[bounds]
list = ["anti-invariant", "helffer", "invariance1", "invariance2", "kls"]
functions = ["norm2"]

[constants]
slice_samples = 800
"#,
    ),
    (
        "gaussian-plane",
        "standard Gaussian on R^2: anti-invariant eigenfunctions and the linear equality cases",
        r#"name = "gaussian-plane"
seed = 33

[model]
name = "gaussian:2"

[group]
name = "unconditional:2"

[sampler]
samples = 20000

[bounds]
list = ["anti-invariant", "brascamp-lieb", "helffer", "vargeneral", "borell"]
functions = ["x1", "generic"]
"#,
    ),
    (
        "radial-dent",
        "non-convex radial potential with a negative convexity floor",
        r#"name = "radial-dent"
seed = 41

[model]
name = "radial-dent:2:1.5"

[group]
name = "unconditional:2"

[sampler]
samples = 20000

[bounds]
list = ["invariance1", "helffer", "brascamp-lieb"]
functions = ["norm2"]

[constants]
slice_samples = 600
"#,
    ),
    (
        "correlated-gaussian",
        "Gaussian with tridiagonal precision: the Helffer matrix without symmetry",
        r#"name = "correlated-gaussian"
seed = 42

[model]
name = "correlated-gaussian:3:0.2"

[sampler]
samples = 20000

[bounds]
list = ["brascamp-lieb", "helffer"]
functions = ["x1", "generic"]

[constants]
slice_samples = 600
"#,
    ),
    (
        "exchangeable-product",
        "product of quartic sites under coordinate permutations",
        r#"name = "exchangeable-product"
seed = 51

[model]
name = "product:4:quartic-quadratic"

[group]
name = "exchangeable:4"

[sampler]
samples = 20000

[bounds]
list = ["helffer", "invariance1", "vargeneral", "var-split"]
functions = ["norm2"]

[constants]
slice_samples = 600
"#,
    ),
    (
        "schatten-ball",
        "unit Schatten 1-ball of 2x2 matrices under row symmetries",
        r#"name = "schatten-ball"
seed = 52

[model]
name = "schatten-ball:2:1"
isotropize = true

[group]
name = "schatten-rows:2"

[sampler]
samples = 10000
burn_in = 2000

[bounds]
list = ["varnorm", "var-split", "poincsym"]
"#,
    ),
    (
        "lp-ball",
        "unit l_1.5 ball in R^3, isotropized",
        r#"name = "lp-ball"
seed = 53

[model]
name = "lp-ball:3:1.5"
isotropize = true

[group]
name = "unconditional:3"

[sampler]
samples = 20000

[bounds]
list = ["varnorm", "borell", "isotropy"]
"#,
    ),
    (
        "double-well",
        "product of double wells: a measure that is not log-concave",
        r#"name = "double-well"
seed = 54

[model]
name = "product:2:double-well"

[group]
name = "unconditional:2"

[sampler]
samples = 20000

[bounds]
list = ["helffer", "brascamp-lieb"]
functions = ["x1"]
"#,
    ),
    (
        "invariants-only",
        "dihedral group of the hexagon acting on a Gaussian, invariant suites only",
        r#"name = "invariants-only"
seed = 61

[model]
name = "gaussian:2"

[group]
name = "dihedral:6"

[sampler]
samples = 5000

[bounds]
list = []
"#,
    ),
];

/// Parse a built-in scenario by name.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let (_, _, text) = SCENARIOS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::Configuration(format!("unknown scenario '{name}'")))?;
    Scenario::parse(text)
}

/// Text of a built-in scenario.
pub fn builtin_scenario_text(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _, _)| *n == name).map(|s| s.2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub kind: &'static str,
    pub name: &'static str,
    pub description: &'static str,
}

/// Every named model, group, potential and scenario whose name contains
/// `filter`.
pub fn list_builtins(filter: Option<&str>) -> Vec<CatalogEntry> {
    let keep = |n: &str| filter.is_none_or(|f| n.contains(f));
    let mut out = Vec::new();
    let mut push = |kind: &'static str, name: &'static str, description: &'static str| {
        if keep(name) {
            out.push(CatalogEntry { kind, name, description });
        }
    };
    for (n, d) in MODEL_CATALOG {
        push("model", n, d);
    }
    for (n, d) in GROUP_CATALOG {
        push("group", n, d);
    }
    for (n, d) in POTENTIAL_CATALOG {
        push("potential", n, d);
    }
    for (n, d, _) in SCENARIOS {
        push("scenario", n, d);
    }
    out
}
