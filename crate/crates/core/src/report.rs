//! Experiment reports with provenance, serialized to JSON and CSV.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const SCHEMA: &str = "basis-forge/experiment-report/v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Statistics of one quantity at one n across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerNStat {
    pub n: u64,
    pub order: u32,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub expected: Option<f64>,
    /// (mean - expected) / standard error; 0 when both spread and bias vanish.
    pub z_score: Option<f64>,
    pub target: Option<f64>,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub positive_fraction: f64,
}

impl PerNStat {
    pub fn from_samples(
        n: u64,
        order: u32,
        values: &[f64],
        expected: Option<f64>,
        target: Option<f64>,
    ) -> PerNStat {
        let count = values.len();
        let c = count.max(1) as f64;
        let mean = values.iter().sum::<f64>() / c;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (c - 1.0)
        } else {
            0.0
        };
        let sd = var.sqrt();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (min, max) = if count == 0 { (0.0, 0.0) } else { (min, max) };
        let z_score = expected.and_then(|e| {
            let se = sd / c.sqrt();
            let bias = mean - e;
            if se > 0.0 {
                Some(bias / se)
            } else if bias.abs() <= 1e-9 * e.abs().max(1.0) {
                Some(0.0)
            } else {
                None
            }
        });
        let ratio = |v: f64| target.filter(|t| *t > 0.0).map(|t| v / t);
        PerNStat {
            n,
            order,
            count,
            mean,
            sd,
            min,
            max,
            expected,
            z_score,
            target,
            ratio_min: ratio(min),
            ratio_max: ratio(max),
            positive_fraction: values.iter().filter(|v| **v > 0.0).count() as f64 / c,
        }
    }
}

/// Version, config hash and time stamp attached to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub timestamp: u64,
    pub config: Value,
}

impl Provenance {
    pub fn new<T: Serialize>(config: &T) -> Result<Provenance> {
        Ok(Provenance {
            tool_version: TOOL_VERSION.into(),
            config_hash: config_hash(config)?,
            timestamp: unix_timestamp(),
            config: serde_json::to_value(config)?,
        })
    }
}

/// A report with its provenance block alongside the report fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WithProvenance<T> {
    #[serde(flatten)]
    pub report: T,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    /// Unix seconds; excluded from reproducibility comparisons.
    pub timestamp: u64,
    pub kind: String,
    pub config: Value,
    pub assignment: Value,
    pub seeds: Vec<u64>,
    pub grid: Vec<u64>,
    pub per_n: Vec<PerNStat>,
    pub summary: Value,
}

/// SHA-256 of the canonical (key-sorted, compact) JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let v = serde_json::to_value(config)?;
    let bytes = serde_json::to_vec(&v)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Current Unix time, or SOURCE_DATE_EPOCH when set.
pub fn unix_timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
    {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ExperimentReport {
    pub fn new<T: Serialize>(kind: &str, config: &T) -> Result<ExperimentReport> {
        Ok(ExperimentReport {
            schema: SCHEMA.into(),
            tool_version: TOOL_VERSION.into(),
            config_hash: config_hash(config)?,
            timestamp: unix_timestamp(),
            kind: kind.into(),
            config: serde_json::to_value(config)?,
            assignment: Value::Null,
            seeds: Vec::new(),
            grid: Vec::new(),
            per_n: Vec::new(),
            summary: Value::Null,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timestamp zeroed, for byte comparisons between runs.
    pub fn to_json_without_timestamp(&self) -> Result<String> {
        let mut c = self.clone();
        c.timestamp = 0;
        c.to_json()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "n",
            "order",
            "count",
            "mean",
            "sd",
            "min",
            "max",
            "expected",
            "z_score",
            "target",
            "ratio_min",
            "ratio_max",
            "positive_fraction",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.per_n {
            out.write_record([
                s.n.to_string(),
                s.order.to_string(),
                s.count.to_string(),
                s.mean.to_string(),
                s.sd.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                opt(s.expected),
                opt(s.z_score),
                opt(s.target),
                opt(s.ratio_min),
                opt(s.ratio_max),
                s.positive_fraction.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv_to(std::fs::File::create(path)?)
    }
}
