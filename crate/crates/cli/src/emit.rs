use crate::config::{Format, Units};
use anyhow::{Context, Result};
use serde_json::{json, Value};
use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// A value in nats, converted when bits are requested.
    Entropy(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

/// Rounded to 12 significant digits, printed in shortest form.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float")
}

pub fn fmt_num(x: f64) -> String {
    let y = round12(x);
    if y == 0.0 {
        // Avoid printing -0.0.
        return "0.0".into();
    }
    format!("{y:?}")
}

impl Cell {
    fn number(&self, units: Units) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Entropy(x) => Some(match units {
                Units::Nats => x,
                Units::Bits => x / LN_2,
            }),
            _ => None,
        }
    }

    pub fn render(&self, units: Units) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            _ => fmt_num(self.number(units).expect("numeric cell")),
        }
    }

    fn to_json(&self, units: Units) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            _ => {
                let x = round12(self.number(units).expect("numeric cell"));
                if x.is_finite() {
                    json!(if x == 0.0 { 0.0 } else { x })
                } else {
                    json!(format!("{x}"))
                }
            }
        }
    }
}

/// One experiment's output: fixed column order, one row per depth/trial/time.
#[derive(Debug, Clone)]
pub struct Table {
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(experiment: &str, seed: u64, config_hash: String, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            config_hash,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    fn banner(&self, units: Units) -> String {
        let u = match units {
            Units::Nats => "nats",
            Units::Bits => "bits",
        };
        format!("# experiment={} seed={} units={} config={}", self.experiment, self.seed, u, self.config_hash)
    }

    pub fn to_csv(&self, units: Units) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(units)))?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
        Ok(format!("{}\n{body}", self.banner(units)))
    }

    pub fn to_json(&self, units: Units) -> Result<String> {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(|c| c.to_json(units)).collect())).collect();
        let doc = json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "units": match units { Units::Nats => "nats", Units::Bits => "bits" },
            "config": self.config_hash,
            "columns": self.columns,
            "rows": rows,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn file_name(&self, format: Format) -> String {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        format!("{}-{}.{ext}", self.experiment, self.seed)
    }

    /// Write `<dir>/<experiment>-<seed>.<ext>` and return its path.
    pub fn write(&self, dir: &Path, format: Format, units: Units) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(self.file_name(format));
        let text = match format {
            Format::Csv => self.to_csv(units)?,
            Format::Json => self.to_json(units)?,
        };
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
