use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use symvar::gap1d::{spin_scan, SPIN_RESOLUTION};
use symvar::measures::{builtin_model, Potential1d};
use symvar::sampling::{sample_with, SamplerConfig};
use symvar::symmetry::builtin_group;
use symvar::verify::{
    builtin_scenario_text, list_builtins, parse_grid, run, sorted_json, spin_rows_csv, GroupSummary, Scenario,
    EXIT_CONFIGURATION,
};
use symvar::Error;

#[derive(Parser)]
#[command(name = "symvar", version, about = "Symmetry-aware variance bounds for log-concave measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or built-in scenario and write its reports.
    Verify {
        /// Built-in scenario name or path to a scenario file.
        name: Option<String>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Directory for the reports; defaults to the scenario's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        chains: Option<usize>,
        /// Constant override `key=value`; may be repeated.
        #[arg(long, value_name = "KEY=VALUE")]
        constants: Vec<String>,
    },
    /// Two-site spin scan: CSV of m, J, J², c_P(μ^{2|m}).
    Gap1d {
        #[arg(long, default_value = "abs")]
        potential: String,
        #[arg(long, default_value = "0:10:0.5", allow_hyphen_values = true)]
        m_grid: String,
        #[arg(long, default_value_t = SPIN_RESOLUTION)]
        resolution: usize,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Order, orbits, Cayley gap and decomposition of a built-in group, as JSON.
    Group { name: String },
    /// Draw a batch from a built-in model as CSV with header x1..xn.
    Sample {
        model: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Built-in models, groups, potentials and scenarios.
    List { filter: Option<String> },
}

fn emit(output: Option<&Path>, body: &str) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn verify(
    name: Option<String>,
    scenario: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    samples: Option<usize>,
    chains: Option<usize>,
    constants: Vec<String>,
) -> Result<i32, Error> {
    let target = scenario
        .map(|p| p.display().to_string())
        .or(name)
        .ok_or_else(|| Error::Configuration("verify needs a scenario file or built-in name".into()))?;
    let path = Path::new(&target);
    let (text, stem, default_dir) = if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
        (text, stem, path.parent().map(Path::to_path_buf).unwrap_or_default())
    } else if let Some(text) = builtin_scenario_text(&target) {
        (text.to_string(), target.clone(), PathBuf::from("."))
    } else {
        return Err(Error::Configuration(format!("'{target}' is neither a file nor a built-in scenario")));
    };

    let mut sc = Scenario::parse(&text)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(n) = samples {
        sc.sampler.samples = n;
    }
    if let Some(c) = chains {
        sc.sampler.chains = c;
    }
    for kv in &constants {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Configuration(format!("--constants expects key=value, got '{kv}'")))?;
        sc.constants.set(k.trim(), v.trim())?;
    }

    let report = run(&sc)?;
    let dir = out_dir.unwrap_or(default_dir);
    for p in report.write(&dir, &stem)? {
        eprintln!("wrote {}", p.display());
    }
    print!("{}", report.bounds_csv()?);
    for i in report.invariants.iter().filter(|i| !i.passed) {
        eprintln!("invariant {} failed: {} > {}", i.name, i.value, i.tolerance);
    }
    Ok(report.exit_code())
}

fn lookup<T>(r: Result<T, Error>) -> Result<T, Error> {
    r.map_err(|e| Error::Configuration(e.to_string()))
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Verify { name, scenario, out_dir, seed, samples, chains, constants } => {
            verify(name, scenario, out_dir, seed, samples, chains, constants)
        }
        Command::Gap1d { potential, m_grid, resolution, output } => {
            let v = lookup(Potential1d::named(&potential))?;
            let rows = spin_scan(&v, &lookup(parse_grid(&m_grid))?, resolution)?;
            emit(output.as_deref(), &spin_rows_csv(&rows)?)?;
            Ok(0)
        }
        Command::Group { name } => {
            let bg = lookup(builtin_group(&name))?;
            let summary = GroupSummary::new(&bg, &bg.decomposition()?)?;
            emit(None, &sorted_json(&summary)?)?;
            Ok(0)
        }
        Command::Sample { model, samples, seed, chains, burnin, thin, output } => {
            let model = lookup(builtin_model(&model))?;
            let cfg = SamplerConfig { burn_in: burnin, thin, chains, force_mcmc: false };
            let batch = sample_with(&model, samples, seed, &cfg)?;
            match output {
                Some(p) => batch.write_csv(std::fs::File::create(p)?)?,
                None => batch.write_csv(std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::List { filter } => {
            let mut out = std::io::stdout().lock();
            for e in list_builtins(filter.as_deref()) {
                writeln!(out, "{:<10} {:<28} {}", e.kind, e.name, e.description)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("symvar: {e}");
            match e {
                Error::Configuration(_) | Error::Scenario { .. } => ExitCode::from(EXIT_CONFIGURATION as u8),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
