//! Report files: `report.json`, `estimates.csv` and scenario tables.
//!
//! `report.json` fields:
//!
//! | field | type | meaning |
//! |---|---|---|
//! | `artifact`, `version` | string | program name and version |
//! | `scenario` | string | scenario name |
//! | `spec_id` | string | config `name`, else the first 12 hex digits of the config hash |
//! | `config_sha256` | string | SHA-256 of the config file bytes |
//! | `seed` | integer | master seed |
//! | `model` | string | `stable`, `map` or `marw` |
//! | `pass` | bool | all verdicts passed |
//! | `checks` | array | every estimate: `name, value, stderr, n, seed` and, when judged, `target, tolerance, verdict` |
//! | `verdicts` | array | judged checks: `theorem, spec_id, grid, estimates, target, tolerance, pass` |
//! | `results` | object | scenario-specific numbers |
//! | `files` | array | CSV files written next to the report |
//!
//! `estimates.csv` columns: `name, value, stderr, n, seed, verdict` with
//! verdict `pass`, `fail` or empty for unjudged estimates.

use std::path::Path;

use serde::Serialize;
use ssmp_core::stats::EstimateReport;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub theorem: String,
    pub spec_id: String,
    pub grid: Vec<f64>,
    pub estimates: Vec<Estimate>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

/// A CSV file produced by a scenario.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &'static str, header: &[&str]) -> Self {
        Table { file, header: header.iter().map(|h| h.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a scenario hands back to the runner.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub theorem: String,
    pub grid: Vec<f64>,
    pub checks: Vec<EstimateReport>,
    pub results: serde_json::Value,
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub artifact: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub spec_id: String,
    pub config_sha256: String,
    pub seed: u64,
    pub model: &'static str,
    pub pass: bool,
    pub checks: Vec<EstimateReport>,
    pub verdicts: Vec<Verdict>,
    pub results: serde_json::Value,
    pub files: Vec<String>,
}

impl Report {
    pub fn assemble(scenario: &str, spec_id: String, sha: String, seed: u64, model: &'static str, out: &Outcome) -> Self {
        let verdicts: Vec<Verdict> = out
            .checks
            .iter()
            .filter(|c| c.verdict.is_some())
            .map(|c| Verdict {
                theorem: out.theorem.clone(),
                spec_id: spec_id.clone(),
                grid: out.grid.clone(),
                estimates: vec![Estimate { name: c.name.clone(), value: c.value, stderr: c.stderr, n: c.n }],
                target: c.target,
                tolerance: c.tolerance,
                pass: c.passed(),
            })
            .collect();
        let mut files = vec!["estimates.csv".to_string()];
        files.extend(out.tables.iter().map(|t| t.file.to_string()));
        Report {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            scenario: scenario.to_string(),
            spec_id,
            config_sha256: sha,
            seed,
            model,
            pass: verdicts.iter().all(|v| v.pass),
            checks: out.checks.clone(),
            verdicts,
            results: out.results.clone(),
            files,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output { path: path.display().to_string(), message: e.to_string() }
}

fn write_table(dir: &Path, table: &Table) -> Result<(), CliError> {
    let path = dir.join(table.file);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(&table.header).map_err(|e| io_err(&path, e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))
}

pub fn estimates_table(checks: &[EstimateReport]) -> Table {
    let mut t = Table::new("estimates.csv", &["name", "value", "stderr", "n", "seed", "verdict"]);
    for c in checks {
        let verdict = match c.verdict {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "",
        };
        t.push(vec![
            c.name.clone(),
            c.value.to_string(),
            c.stderr.to_string(),
            c.n.to_string(),
            c.seed.to_string(),
            verdict.to_string(),
        ]);
    }
    t
}

pub fn write_all(dir: &Path, report: &Report, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).map_err(|e| io_err(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    write_table(dir, &estimates_table(&out.checks))?;
    for t in &out.tables {
        write_table(dir, t)?;
    }
    Ok(())
}
