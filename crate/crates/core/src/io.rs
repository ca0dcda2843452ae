//! Instance files and report output.
//!
//! Instances are JSON documents with fields `version`, `n`, `T`,
//! `durations`, `c_lower`, `c_hat` and optional `w` and `meta`. Reports list
//! activities 1-based.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostMatrix, Instance, InstanceMeta, IterationRecord, Ordering, SolveReport, SolveStatus};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    n: usize,
    #[serde(rename = "T")]
    horizon: usize,
    durations: Vec<u32>,
    c_lower: CostMatrix,
    c_hat: CostMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<CostMatrix>,
    #[serde(default, skip_serializing_if = "is_default_meta")]
    meta: InstanceMeta,
}

fn is_default_meta(m: &InstanceMeta) -> bool {
    m == &InstanceMeta::default()
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if f.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported instance version {} (expected {FORMAT_VERSION})", f.version)));
    }
    if f.durations.len() != f.n {
        return Err(Error::Format(format!("n = {} but {} durations", f.n, f.durations.len())));
    }
    let inst = Instance { durations: f.durations, horizon: f.horizon, c_lower: f.c_lower, c_hat: f.c_hat, w: f.w, meta: f.meta };
    inst.ensure_valid()?;
    Ok(inst)
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let f = InstanceFile {
        version: FORMAT_VERSION,
        n: inst.n(),
        horizon: inst.horizon,
        durations: inst.durations.clone(),
        c_lower: inst.c_lower.clone(),
        c_hat: inst.c_hat.clone(),
        w: inst.w.clone(),
        meta: inst.meta.clone(),
    };
    serde_json::to_string_pretty(&f).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    let mut text = instance_to_json(inst)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn one_based(ord: &Ordering) -> Vec<usize> {
    ord.perm().iter().map(|j| j + 1).collect()
}

#[derive(Debug, Serialize)]
struct IterationView {
    iteration: usize,
    master_value: f64,
    adversarial_value: f64,
    ordering: Vec<usize>,
    pool_size: usize,
    wall_time: f64,
}

impl From<&IterationRecord> for IterationView {
    fn from(r: &IterationRecord) -> Self {
        Self {
            iteration: r.iteration,
            master_value: r.master_value,
            adversarial_value: r.adversarial_value,
            ordering: one_based(&r.ordering),
            pool_size: r.pool_size,
            wall_time: r.wall_time,
        }
    }
}

#[derive(Debug, Serialize)]
struct ReportView {
    method: String,
    status: SolveStatus,
    objective: f64,
    bound: f64,
    gap_rel: f64,
    wall_time: f64,
    /// Activities in processing order, 1-based.
    ordering: Vec<usize>,
    /// Start slot of activity `j` at index `j - 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    root_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iter_best: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<Vec<IterationView>>,
}

/// JSON rendering of a report with 1-based activity labels.
pub fn report_to_json(method: &str, report: &SolveReport) -> Result<String> {
    let view = ReportView {
        method: method.to_string(),
        status: report.status,
        objective: report.objective,
        bound: report.bound,
        gap_rel: report.gap_rel,
        wall_time: report.wall_time,
        ordering: one_based(&report.ordering),
        start: report.schedule.as_ref().map(|s| s.start.clone()),
        root_bound: report.root_bound,
        iter_best: report.iter_best,
        iterations: report.iterations.as_ref().map(|v| v.iter().map(IterationView::from).collect()),
    };
    serde_json::to_string_pretty(&view).map_err(|e| Error::Format(e.to_string()))
}
