//! Scenario runner for the affine-frames toolkit: parses TOML scenarios,
//! runs the requested analyses and writes `report.json` plus one CSV per
//! tabular analysis.

pub mod analysis;
pub mod catalog;
pub mod scenario;

use anyhow::{Context, Result};
use scenario::Scenario;
use serde::Serialize;
use serde_json::Value;
use std::path::Path;
use std::time::Instant;

/// Every verdict passed.
pub const EXIT_PASS: i32 = 0;
/// Bad input, I/O trouble or a resource limit.
pub const EXIT_ERROR: i32 = 1;
/// Some verdict failed or was violated.
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: Tool,
    /// The scenario with every default filled in.
    pub scenario: Scenario,
    pub workers: Option<usize>,
    pub analyses: Vec<AnalysisRecord>,
    pub pass: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct AnalysisRecord {
    pub index: usize,
    pub kind: &'static str,
    pub pass: bool,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    pub result: Value,
    pub elapsed_ms: f64,
}

/// Reads a scenario from a path, or from the shipped catalog by name.
pub fn load(source: &str, overrides: &[String]) -> Result<(Scenario, Option<std::path::PathBuf>)> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let s = scenario::parse(&text, overrides).with_context(|| format!("in {}", path.display()))?;
        Ok((s, path.parent().map(|p| p.to_path_buf())))
    } else if let Some(text) = catalog::get(source) {
        Ok((scenario::parse(text, overrides)?, None))
    } else {
        anyhow::bail!("no scenario file or shipped scenario named {source:?}")
    }
}

/// Runs every analysis and writes the report files into `out`.
pub fn run(scenario: &Scenario, base_dir: Option<&Path>, out: &Path, workers: Option<usize>) -> Result<RunReport> {
    let start = Instant::now();
    let resolved = scenario.resolved();
    let setting = resolved.build(base_dir)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut records = Vec::new();
    for (i, spec) in resolved.analysis.iter().enumerate() {
        let t = Instant::now();
        let o = analysis::run(spec, &resolved, &setting).with_context(|| format!("analysis {i} ({})", spec.kind()))?;
        let table = match &o.table {
            Some(tab) => {
                let name = format!("{i:02}_{}.csv", tab.name);
                std::fs::write(out.join(&name), tab.to_csv()?).with_context(|| format!("writing {name}"))?;
                Some(name)
            }
            None => None,
        };
        records.push(AnalysisRecord {
            index: i,
            kind: spec.kind(),
            pass: o.pass,
            verdict: o.verdict,
            table,
            result: o.result,
            elapsed_ms: t.elapsed().as_secs_f64() * 1e3,
        });
    }
    let report = RunReport {
        schema_version: scenario::SCHEMA_VERSION,
        tool: Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: affine_frames::VERSION,
        },
        scenario: resolved,
        workers,
        pass: records.iter().all(|r| r.pass),
        analyses: records,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(out.join("report.json"), json + "\n").context("writing report.json")?;
    Ok(report)
}
