use serde::Serialize;
use toml::{Table, Value};

use crate::bounds::{Constants, SliceGapSource};
use crate::{Error, Result};

/// How the decomposition of the identity is obtained from the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionSpec {
    /// From the conjugacy-closed generators.
    Auto,
    /// The exchangeable decomposition with coefficients `2/n`.
    Exchangeable,
    /// The single term `E = ℝⁿ` with coefficient 1.
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerSpec {
    pub samples: usize,
    pub chains: usize,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub force_mcmc: bool,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self { samples: 20_000, chains: 4, burn_in: None, thin: None, force_mcmc: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSpec {
    pub list: Vec<String>,
    pub functions: Vec<String>,
    pub alpha: f64,
    pub rho: Option<f64>,
    #[serde(serialize_with = "source_name")]
    pub slice_source: SliceGapSource,
    /// Single-site potential for the spin bounds when the model is not a spin model.
    pub potential: Option<String>,
    pub m_grid: String,
    pub resolution: usize,
    pub anchors: usize,
}

fn source_name<S: serde::Serializer>(s: &SliceGapSource, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(match s {
        SliceGapSource::Auto => "auto",
        SliceGapSource::Grid => "grid",
        SliceGapSource::Kls => "kls",
    })
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            list: Vec::new(),
            functions: vec!["norm2".into()],
            alpha: 0.0,
            rho: None,
            slice_source: SliceGapSource::Auto,
            potential: None,
            m_grid: "0:10:0.5".into(),
            resolution: 1024,
            anchors: 8,
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub model: String,
    /// Give varnorm, var-split and borell an isotropized copy of the batch.
    pub isotropize: bool,
    pub group: Option<String>,
    pub decomposition: DecompositionSpec,
    pub sampler: SamplerSpec,
    pub bounds: BoundsSpec,
    pub constants: Constants,
    /// Random-matrix trials per matrix invariant.
    pub trials: usize,
    #[serde(skip)]
    pub(crate) source: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["name", "description", "seed"]),
    ("model", &["name", "isotropize"]),
    ("group", &["name", "decomposition"]),
    ("sampler", &["samples", "chains", "burn_in", "thin", "force_mcmc"]),
    ("bounds", &["list", "functions", "alpha", "rho", "slice_source", "potential", "m_grid", "resolution", "anchors"]),
    ("constants", &["c_borell", "var_split_c", "c_prime", "slice_resolution", "slice_samples"]),
    ("invariants", &["trials"]),
];

/// 1-based line of `key` inside `[section]` (`""` for the top level), or of
/// the section header when the key is absent.
pub fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = h.trim().to_string();
            if current == section {
                header = i + 1;
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header.max(1)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1)).unwrap_or(1);
            Error::Scenario { line, message: e.message().to_string() }
        })?;
        let err = |section: &str, key: &str, message: String| Error::Scenario { line: key_line(text, section, key), message };

        for (k, v) in &table {
            match v {
                Value::Table(t) => {
                    let allowed = SECTIONS
                        .iter()
                        .find(|(s, _)| s == k)
                        .ok_or_else(|| err(k, "", format!("unknown section [{k}]")))?
                        .1;
                    for key in t.keys() {
                        if !allowed.contains(&key.as_str()) {
                            return Err(err(k, key, format!("unknown key '{key}' in [{k}]")));
                        }
                    }
                }
                _ if SECTIONS[0].1.contains(&k.as_str()) => {}
                _ => return Err(err("", k, format!("unknown top-level key '{k}'"))),
            }
        }

        let section = |name: &str| table.get(name).and_then(Value::as_table);
        let get = |sec: &str, key: &str| -> Option<&Value> {
            if sec.is_empty() {
                table.get(key)
            } else {
                section(sec).and_then(|t| t.get(key))
            }
        };
        let string = |sec: &str, key: &str| -> Result<Option<String>> {
            match get(sec, key) {
                None => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                Some(_) => Err(err(sec, key, format!("'{key}' must be a string"))),
            }
        };
        let integer = |sec: &str, key: &str| -> Result<Option<usize>> {
            match get(sec, key) {
                None => Ok(None),
                Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
                Some(_) => Err(err(sec, key, format!("'{key}' must be a nonnegative integer"))),
            }
        };
        let float = |sec: &str, key: &str| -> Result<Option<f64>> {
            match get(sec, key) {
                None => Ok(None),
                Some(Value::Float(x)) => Ok(Some(*x)),
                Some(Value::Integer(i)) => Ok(Some(*i as f64)),
                Some(_) => Err(err(sec, key, format!("'{key}' must be a number"))),
            }
        };
        let boolean = |sec: &str, key: &str| -> Result<Option<bool>> {
            match get(sec, key) {
                None => Ok(None),
                Some(Value::Boolean(b)) => Ok(Some(*b)),
                Some(_) => Err(err(sec, key, format!("'{key}' must be true or false"))),
            }
        };
        let strings = |sec: &str, key: &str| -> Result<Option<Vec<String>>> {
            match get(sec, key) {
                None => Ok(None),
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|v| v.as_str().map(str::to_string).ok_or_else(|| err(sec, key, format!("'{key}' must list strings"))))
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(_) => Err(err(sec, key, format!("'{key}' must be an array of strings"))),
            }
        };

        let seed = match get("", "seed") {
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(err("", "seed", "'seed' must be a nonnegative integer".into())),
            None => return Err(err("", "seed", "'seed' is mandatory".into())),
        };
        let model = string("model", "name")?.ok_or_else(|| err("model", "name", "[model] needs 'name'".into()))?;
        let decomposition = match string("group", "decomposition")?.as_deref() {
            None | Some("auto") => DecompositionSpec::Auto,
            Some("exchangeable") => DecompositionSpec::Exchangeable,
            Some("whole") => DecompositionSpec::Whole,
            Some(o) => return Err(err("group", "decomposition", format!("unknown decomposition '{o}'"))),
        };

        let d = SamplerSpec::default();
        let sampler = SamplerSpec {
            samples: integer("sampler", "samples")?.unwrap_or(d.samples),
            chains: integer("sampler", "chains")?.unwrap_or(d.chains),
            burn_in: integer("sampler", "burn_in")?,
            thin: integer("sampler", "thin")?,
            force_mcmc: boolean("sampler", "force_mcmc")?.unwrap_or(false),
        };
        if sampler.samples == 0 {
            return Err(err("sampler", "samples", "'samples' must be positive".into()));
        }

        let b = BoundsSpec::default();
        let slice_source = match string("bounds", "slice_source")?.as_deref() {
            None | Some("auto") => SliceGapSource::Auto,
            Some("grid") => SliceGapSource::Grid,
            Some("kls") => SliceGapSource::Kls,
            Some(o) => return Err(err("bounds", "slice_source", format!("unknown slice source '{o}'"))),
        };
        let bounds = BoundsSpec {
            list: strings("bounds", "list")?.unwrap_or_default(),
            functions: strings("bounds", "functions")?.unwrap_or(b.functions),
            alpha: float("bounds", "alpha")?.unwrap_or(b.alpha),
            rho: float("bounds", "rho")?,
            slice_source,
            potential: string("bounds", "potential")?,
            m_grid: string("bounds", "m_grid")?.unwrap_or(b.m_grid),
            resolution: integer("bounds", "resolution")?.unwrap_or(b.resolution),
            anchors: integer("bounds", "anchors")?.unwrap_or(b.anchors),
        };
        for name in &bounds.list {
            if !super::BOUND_NAMES.contains(&name.as_str()) {
                return Err(err("bounds", "list", format!("unknown bound '{name}'")));
            }
        }
        parse_grid(&bounds.m_grid).map_err(|e| err("bounds", "m_grid", e.to_string()))?;

        let mut constants = Constants::default();
        if let Some(t) = section("constants") {
            for (k, v) in t {
                let s = match v {
                    Value::Float(x) => x.to_string(),
                    Value::Integer(i) => i.to_string(),
                    _ => return Err(err("constants", k, format!("constant '{k}' must be a number"))),
                };
                constants.set(k, &s).map_err(|e| err("constants", k, e.to_string()))?;
            }
        }

        Ok(Scenario {
            name: string("", "name")?.unwrap_or_else(|| "scenario".into()),
            description: string("", "description")?.unwrap_or_default(),
            seed,
            model,
            isotropize: boolean("model", "isotropize")?.unwrap_or(false),
            group: string("group", "name")?,
            decomposition,
            sampler,
            bounds,
            constants,
            trials: integer("invariants", "trials")?.unwrap_or(200),
            source: text.to_string(),
        })
    }

    pub(crate) fn line(&self, section: &str, key: &str) -> usize {
        key_line(&self.source, section, key)
    }
}

/// Parse `a:b:step` into `a, a+step, …, b`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Configuration(format!("grid '{spec}' is not of the form a:b:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let k = ((b - a) / step + 1e-9).floor() as usize;
    if k > 1_000_000 {
        return Err(Error::Configuration(format!("grid '{spec}' has too many points")));
    }
    Ok((0..=k).map(|i| a + i as f64 * step).collect())
}
