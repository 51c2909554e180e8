//! Desk-scale experiments checking finite consequences of EA theory.
//!
//! Every experiment produces an [`ExperimentReport`] whose verdicts are a
//! pure function of its CSV payload, so a saved report can be re-judged with
//! [`verdicts_from_csv`] without re-running anything.

mod convergence;
mod esrate;
mod nfl;
mod schema;

use std::fmt;

use thiserror::Error;

use crate::ea::EaError;

pub use convergence::{convergence_experiment, ConvergenceConfig};
pub use esrate::{es_rate_experiment, fit_line, EsRateConfig, LineFit};
pub use nfl::{
    named_algorithm, nfl_compare, nfl_experiment, performance_vector, NflConfig, NflProblem,
    PerformanceVector, SearchAlgorithm,
};
pub use schema::{schema_experiment, SchemaConfig, SchemaSpec};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("invalid experiment input: {0}")]
    Input(String),
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Ea(#[from] EaError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// The judged part of a report: parameters plus one row per work item.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Payload {
    fn new(header: &[&str]) -> Self {
        Self {
            params: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.push((key.into(), value.to_string()));
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, LabError> {
        let (_, v) = self
            .params
            .iter()
            .find(|(k, _)| k == key)
            .ok_or_else(|| LabError::Report(format!("missing parameter {key}")))?;
        v.parse()
            .map_err(|_| LabError::Report(format!("parameter {key}={v} does not parse")))
    }

    fn column(&self, name: &str) -> Result<usize, LabError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Report(format!("missing column {name}")))
    }

    fn cell<T: std::str::FromStr>(&self, row: &[String], col: usize) -> Result<T, LabError> {
        row.get(col).and_then(|c| c.parse().ok()).ok_or_else(|| {
            LabError::Report(format!(
                "bad cell {:?} in column {}",
                row.get(col),
                self.header[col]
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub payload: Payload,
    pub criteria: Vec<Criterion>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn judged(
        name: &str,
        seeds: Vec<u64>,
        payload: Payload,
        notes: Vec<String>,
    ) -> Result<Self, LabError> {
        let criteria = judge(name, &payload)?;
        Ok(Self {
            name: name.into(),
            config_digest: String::new(),
            seeds,
            payload,
            criteria,
            notes,
        })
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = digest.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// `# key=value` preamble followed by the payload table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut meta = |k: &str, v: &str| out.push_str(&format!("# {k}={v}\n"));
        meta("experiment", &self.name);
        meta("config_digest", &self.config_digest);
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        meta("seeds", &seeds.join(","));
        for (k, v) in &self.payload.params {
            meta(&format!("param.{k}"), v);
        }
        for n in &self.notes {
            meta("note", n);
        }
        for c in &self.criteria {
            meta(
                &format!("verdict.{}", c.name),
                if c.passed { "PASS" } else { "FAIL" },
            );
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.payload.header)
            .expect("in-memory write");
        for r in &self.payload.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"),
        );
        out
    }
}

fn judge(name: &str, payload: &Payload) -> Result<Vec<Criterion>, LabError> {
    match name {
        "convergence" => convergence::judge(payload),
        "nfl" => nfl::judge(payload),
        "schema" => schema::judge(payload),
        "esrate" => esrate::judge(payload),
        other => Err(LabError::Report(format!("unknown experiment {other}"))),
    }
}

/// Re-judges a report from its CSV text alone. Stored `verdict.*` lines are
/// ignored.
pub fn verdicts_from_csv(text: &str) -> Result<Vec<Criterion>, LabError> {
    let mut name = None;
    let mut params = Vec::new();
    let mut table = String::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# ") {
            let (k, v) = meta
                .split_once('=')
                .ok_or_else(|| LabError::Report(format!("preamble line without '=': {line}")))?;
            if k == "experiment" {
                name = Some(v.to_string());
            } else if let Some(p) = k.strip_prefix("param.") {
                params.push((p.to_string(), v.to_string()));
            }
        } else {
            table.push_str(line);
            table.push('\n');
        }
    }
    let name = name.ok_or_else(|| LabError::Report("no experiment name".into()))?;
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| LabError::Report(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| LabError::Report(e.to_string()))?;
    judge(
        &name,
        &Payload {
            params,
            header,
            rows,
        },
    )
}

fn seed_range(first: u64, count: u64) -> Vec<u64> {
    (first..first + count).collect()
}
