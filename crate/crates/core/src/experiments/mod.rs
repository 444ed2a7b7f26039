//! Experiment harnesses confronting Monte Carlo estimates with the PDE
//! oracles, at desk scale, with confidence intervals and full reproducibility
//! metadata.

mod escape;
mod largedev;
mod mixing;
mod moments;
mod theorem1;

pub use escape::{corollary_escape, escape_oracle_cdf, EscapeParams};
pub use largedev::{largedev, LargeDevParams};
pub use mixing::{mixing_decay, MixingParams};
pub use moments::{homogenization_moments, variance_oracle, MomentsMode, MomentsParams};
pub use theorem1::{theorem1, Theorem1Params};

use crate::error::Result;
use std::io::Write;
use std::time::Instant;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV cell. Floats are printed with 17 significant digits so oracle
/// values can be re-verified bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    I(i64),
    S(String),
    B(bool),
    /// Missing value (e.g. oracle for a bound-only row).
    Empty,
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::I(v) => v.to_string(),
            Cell::S(v) => v.clone(),
            Cell::B(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Sorted key = value echo of the effective configuration.
    pub config_echo: Vec<(String, String)>,
    pub master_seed: u64,
    pub wall_seconds: f64,
    /// Free-form per-experiment summary quantities.
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl ExperimentResult {
    pub fn new(name: &str, columns: Vec<&'static str>) -> Self {
        ExperimentResult {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
            config_echo: Vec::new(),
            master_seed: 0,
            wall_seconds: 0.0,
            summary: serde_json::Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn set_summary(&mut self, key: &str, value: serde_json::Value) {
        self.summary.insert(key.to_string(), value);
    }

    /// FNV-1a hash of the canonical config echo.
    pub fn config_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for (k, v) in &self.config_echo {
            for b in k.bytes().chain("=".bytes()).chain(v.bytes()).chain("\n".bytes()) {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }

    /// CSV with a header row, UTF-8, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let echo: serde_json::Map<String, serde_json::Value> = self
            .config_echo
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::json!({
            "experiment": self.name,
            "tool_version": TOOL_VERSION,
            "master_seed": self.master_seed,
            "config_hash": format!("{:016x}", self.config_hash()),
            "config": echo,
            "wall_seconds": self.wall_seconds,
            "columns": self.columns,
            "summary": serde_json::Value::Object(self.summary.clone()),
        })
    }

    pub fn write_files(&self, dir: &std::path::Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.summary.json", self.name));
        let mut f = std::fs::File::create(&csv_path)?;
        f.write_all(self.to_csv().as_bytes())?;
        let mut f = std::fs::File::create(&json_path)?;
        f.write_all(serde_json::to_string_pretty(&self.summary_json()).unwrap().as_bytes())?;
        f.write_all(b"\n")?;
        Ok((csv_path, json_path))
    }
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Timer(Instant::now())
    }

    pub fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// z-score of an estimate against an oracle, when the standard error is
/// informative.
pub(crate) fn z_score(estimate: f64, se: f64, oracle: f64) -> Option<f64> {
    if se > 0.0 {
        Some((estimate - oracle) / se)
    } else {
        None
    }
}

/// One-sided 95% upper bound for a probability with zero observed hits.
pub(crate) fn clopper_upper_zero(n: u64) -> f64 {
    1.0 - 0.05f64.powf(1.0 / n as f64)
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance together with the large-sample standard error of the
/// variance estimate, sqrt((m4 - var²)/n).
pub(crate) fn variance_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let se = ((m4 - var * var).max(0.0) / n).sqrt();
    (var, se)
}
