use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use serde::Serialize;

use super::run::RunReport;
use crate::gap1d::SpinRow;
use crate::{Error, Result};

/// Bound table columns.
pub const BOUND_COLUMNS: [&str; 8] = ["name", "lhs", "lhs_err", "rhs", "rhs_err", "ratio", "verdict", "seed"];

/// Shortest round-trip decimal, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(fmt_num(v)))
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect::<Map<_, _>>())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_rows(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// `m, J, J², c_P(μ^{2|m})` rows as CSV with header `m,J,J2,cp`.
pub fn spin_rows_csv(rows: &[SpinRow]) -> Result<String> {
    let rows = rows.iter().map(|r| vec![fmt_num(r.m), fmt_num(r.j), fmt_num(r.j2), fmt_num(r.cp2)]).collect();
    write_rows(&["m", "J", "J2", "cp"], rows)
}

/// Pretty JSON with recursively sorted keys and a trailing newline.
pub fn sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&sorted(v)).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

impl RunReport {
    /// Bound table as CSV.
    pub fn bounds_csv(&self) -> Result<String> {
        let rows = self
            .bounds
            .iter()
            .map(|b| {
                vec![
                    b.name.clone(),
                    fmt_num(b.lhs.value),
                    fmt_num(b.lhs.std_error),
                    fmt_num(b.rhs.value),
                    fmt_num(b.rhs.std_error),
                    fmt_num(b.ratio),
                    b.verdict.as_str().to_string(),
                    self.scenario.seed.to_string(),
                ]
            })
            .collect();
        write_rows(&BOUND_COLUMNS, rows)
    }

    pub fn invariants_csv(&self) -> Result<String> {
        let rows = self
            .invariants
            .iter()
            .map(|i| vec![i.name.clone(), fmt_num(i.value), fmt_num(i.tolerance), i.passed.to_string()])
            .collect();
        write_rows(&["name", "value", "tolerance", "passed"], rows)
    }

    /// `m, J, J², c_P(μ^{2|m})` rows of the spin scan, if one ran.
    pub fn spin_csv(&self) -> Result<Option<String>> {
        let Some(s) = &self.spin else { return Ok(None) };
        spin_rows_csv(&s.rows).map(Some)
    }

    /// Full report as pretty JSON with sorted keys. Non-finite numbers in
    /// the bound table are written as strings.
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        let table: Vec<Value> = self
            .bounds
            .iter()
            .map(|b| {
                let mut m = Map::new();
                m.insert("name".into(), Value::String(b.name.clone()));
                m.insert("lhs".into(), num(b.lhs.value));
                m.insert("lhs_err".into(), num(b.lhs.std_error));
                m.insert("rhs".into(), num(b.rhs.value));
                m.insert("rhs_err".into(), num(b.rhs.std_error));
                m.insert("ratio".into(), num(b.ratio));
                m.insert("verdict".into(), Value::String(b.verdict.as_str().into()));
                m.insert("seed".into(), Value::from(self.scenario.seed));
                Value::Object(m)
            })
            .collect();
        if let Value::Object(m) = &mut v {
            m.insert("table".into(), Value::Array(table));
        }
        sorted_json(&v)
    }

    pub fn timings_json(&self) -> String {
        let m: Map<String, Value> = self.timings.iter().map(|(k, t)| (k.clone(), num(*t))).collect();
        let mut s = serde_json::to_string_pretty(&sorted(Value::Object(m))).unwrap_or_default();
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv`, `<stem>.invariants.csv`, `<stem>.json`,
    /// `<stem>.timings.json` and, after a spin scan, `<stem>.spin.csv`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![
            (format!("{stem}.csv"), self.bounds_csv()?),
            (format!("{stem}.invariants.csv"), self.invariants_csv()?),
            (format!("{stem}.json"), self.to_json()?),
            (format!("{stem}.timings.json"), self.timings_json()),
        ];
        if let Some(s) = self.spin_csv()? {
            files.push((format!("{stem}.spin.csv"), s));
        }
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}
