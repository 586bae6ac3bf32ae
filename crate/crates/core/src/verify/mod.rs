//! Scenario files, the scenario runner and its CSV and JSON reports.
//!
//! A scenario is a TOML file with a mandatory top-level `seed` and the
//! sections `[model]`, `[group]`, `[sampler]`, `[bounds]`, `[constants]`
//! and `[invariants]`; the grammar is described in the README.

mod builtins;
mod output;
mod run;
mod scenario;

use std::path::Path;

pub use builtins::{builtin_scenario, builtin_scenario_text, list_builtins, CatalogEntry, SCENARIOS};
pub use output::{fmt_num, sorted_json, spin_rows_csv, BOUND_COLUMNS};
pub use run::{
    parse_function, run, GroupSummary, InvariantResult, RunReport, SpinTable, CENTERED_TOL, GRID_2D_RESOLUTION,
    MATRIX_INEQUALITY_TOL,
};
pub use scenario::{key_line, parse_grid, BoundsSpec, DecompositionSpec, SamplerSpec, Scenario};

use crate::{Error, Result};

/// Every bound a scenario can request.
pub const BOUND_NAMES: &[&str] = &[
    "kls",
    "brascamp-lieb",
    "borell",
    "helffer",
    "invariance1",
    "invariance2",
    "varnorm",
    "var-split",
    "vargeneral",
    "poincsym",
    "anti-invariant",
    "spin-gap",
    "spin-linear",
    "moment-ratio",
    "isotropy",
    "fix-section",
];

/// Exit code for configuration errors.
pub const EXIT_CONFIGURATION: i32 = 3;

/// Run the scenario file at `path` and write its reports into `out_dir`,
/// or next to the file when `out_dir` is `None`.
pub fn run_scenario(path: &Path, out_dir: Option<&Path>) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
    let sc = Scenario::parse(&text)?;
    let report = run(&sc)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    report.write(&dir, stem)?;
    Ok(report)
}
