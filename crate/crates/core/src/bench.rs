//! Method dispatch, ordering evaluation and the batch experiment runner.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversarial::{adv_continuous, adv_discrete};
use crate::compact::{solve_compact, CompactOptions};
use crate::deterministic::{solve_nominal, solve_second_stage_dp, NominalMode};
use crate::error::{Error, Result};
use crate::instgen::{gamma_from_level, generate, GenParams};
use crate::iterative::{solve_iterative, IterativeOptions};
use crate::mip::{SolverSettings, DEFAULT_REL_GAP, DEFAULT_TIME_LIMIT, LARGE_TIME_LIMIT};
use crate::model::{Instance, Ordering, SolveReport, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NominalLb,
    NominalUb,
    Compact,
    CompactStr,
    Iterative,
    IterativeStr,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::NominalLb, Method::NominalUb, Method::Compact, Method::CompactStr, Method::Iterative, Method::IterativeStr];

    pub fn name(self) -> &'static str {
        match self {
            Method::NominalLb => "nominal-lb",
            Method::NominalUb => "nominal-ub",
            Method::Compact => "compact",
            Method::CompactStr => "compact-str",
            Method::Iterative => "iterative",
            Method::IterativeStr => "iterative-str",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Time limit used when none is given: 7200 s, or 10800 s from `n = 35` on.
pub fn default_time_limit(n: usize) -> f64 {
    if n >= 35 {
        LARGE_TIME_LIMIT
    } else {
        DEFAULT_TIME_LIMIT
    }
}

#[derive(Debug, Clone)]
pub struct MethodOptions {
    pub warm_start: bool,
    pub enrich_k: usize,
    pub settings: SolverSettings,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self { warm_start: false, enrich_k: 0, settings: SolverSettings::default() }
    }
}

/// Runs one method on one instance.
pub fn solve_method(inst: &Instance, method: Method, budget: f64, opts: &MethodOptions) -> Result<SolveReport> {
    let settings = opts.settings.clone();
    match method {
        Method::NominalLb => solve_nominal(inst, NominalMode::Lower, &settings),
        Method::NominalUb => solve_nominal(inst, NominalMode::Upper, &settings),
        Method::Compact | Method::CompactStr => {
            let o = CompactOptions {
                strengthen: method == Method::CompactStr,
                warm_start: opts.warm_start,
                settings,
                ..Default::default()
            };
            Ok(solve_compact(inst, budget, &o)?.report)
        }
        Method::Iterative | Method::IterativeStr => {
            let o = IterativeOptions { strengthen: method == Method::IterativeStr, enrich_k: opts.enrich_k, settings };
            Ok(solve_iterative(inst, budget, &o)?.report)
        }
    }
}

/// Cost of an ordering under the nominal, continuous and discrete models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub lb: f64,
    pub cont: f64,
    /// `None` when the budget is not an integer.
    pub disc: Option<f64>,
}

pub fn evaluate_ordering(inst: &Instance, ord: &Ordering, budget: f64, settings: &SolverSettings) -> Result<Evaluation> {
    inst.ensure_valid()?;
    let (lb, _) = solve_second_stage_dp(inst, &inst.c_lower, ord)?;
    let cont = adv_continuous(inst, ord, budget, settings)?.value;
    let disc = if budget.fract() == 0.0 { Some(adv_discrete(inst, ord, budget, settings)?.value) } else { None };
    Ok(Evaluation { lb, cont, disc })
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Budget levels in percent of `n`.
    pub u_levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Per-row limit; `None` picks [`default_time_limit`].
    pub time_limit: Option<f64>,
    pub rel_gap: f64,
    pub warm_start: bool,
    pub enrich_k: usize,
    pub threads: u32,
    pub params: GenParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![10],
            u_levels: vec![30.0],
            seeds: (1..=20).collect(),
            methods: vec![Method::Compact],
            time_limit: None,
            rel_gap: DEFAULT_REL_GAP,
            warm_start: false,
            enrich_k: 0,
            threads: 1,
            params: GenParams::default(),
        }
    }
}

/// One result line; empty cells mean "not applicable" or "failed".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub u: f64,
    pub gamma: u64,
    pub seed: u64,
    pub method: Method,
    pub status: SolveStatus,
    pub obj: Option<f64>,
    pub root_bound: Option<f64>,
    pub gap_rel: Option<f64>,
    pub time_s: f64,
    pub n_iter: Option<usize>,
    pub iter_best: Option<usize>,
    pub eval_lb: Option<f64>,
    pub eval_cont: Option<f64>,
    pub eval_disc: Option<f64>,
}

fn run_cell(inst: &Instance, n: usize, u: f64, gamma: u64, seed: u64, method: Method, opts: &MethodOptions) -> BenchRow {
    let mut row = BenchRow {
        n,
        u,
        gamma,
        seed,
        method,
        status: SolveStatus::Error,
        obj: None,
        root_bound: None,
        gap_rel: None,
        time_s: 0.0,
        n_iter: None,
        iter_best: None,
        eval_lb: None,
        eval_cont: None,
        eval_disc: None,
    };
    let start = std::time::Instant::now();
    match solve_method(inst, method, gamma as f64, opts) {
        Ok(r) => {
            row.status = r.status;
            row.obj = Some(r.objective);
            row.root_bound = r.root_bound;
            row.gap_rel = Some(r.gap_rel);
            row.n_iter = r.iterations.as_ref().map(Vec::len);
            row.iter_best = r.iter_best;
            match evaluate_ordering(inst, &r.ordering, gamma as f64, &opts.settings) {
                Ok(e) => {
                    row.eval_lb = Some(e.lb);
                    row.eval_cont = Some(e.cont);
                    row.eval_disc = e.disc;
                }
                Err(e) => log::warn!("n={n} seed={seed} {method}: evaluation failed: {e}"),
            }
        }
        Err(Error::Infeasible(msg)) => {
            log::warn!("n={n} seed={seed} {method}: {msg}");
            row.status = SolveStatus::Infeasible;
        }
        Err(e) => log::warn!("n={n} seed={seed} {method}: {e}"),
    }
    row.time_s = start.elapsed().as_secs_f64();
    row
}

/// Generates each `(n, seed)` instance, runs every `(u, method)` cell on it
/// and streams the rows as CSV to `out` when given.
pub fn run_benchmark<W: Write>(cfg: &BenchConfig, out: Option<W>) -> Result<Vec<BenchRow>> {
    let mut writer = out.map(csv::Writer::from_writer);
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for &seed in &cfg.seeds {
            let mut inst = generate(n, seed, &cfg.params)?;
            for &u in &cfg.u_levels {
                let gamma = gamma_from_level(n, u)?;
                inst.meta.u_level = Some(u);
                let settings = SolverSettings {
                    time_limit: cfg.time_limit.unwrap_or_else(|| default_time_limit(n)),
                    rel_gap: cfg.rel_gap,
                    threads: cfg.threads,
                    ..SolverSettings::default()
                };
                let opts = MethodOptions { warm_start: cfg.warm_start, enrich_k: cfg.enrich_k, settings };
                for &method in &cfg.methods {
                    let row = run_cell(&inst, n, u, gamma, seed, method, &opts);
                    if let Some(w) = writer.as_mut() {
                        w.serialize(&row)?;
                        w.flush()?;
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

/// Means per `(n, u, gamma, method)` cell, in the layout of the result tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub n: usize,
    pub u: f64,
    pub gamma: u64,
    pub method: Method,
    pub rows: usize,
    pub n_opt: usize,
    /// Share of rows stopped by the time limit, in percent.
    pub tl_pct: f64,
    pub n_err: usize,
    pub mean_obj: Option<f64>,
    pub mean_root_bound: Option<f64>,
    pub mean_gap_rel: Option<f64>,
    pub mean_time_s: f64,
    pub mean_n_iter: Option<f64>,
    pub mean_iter_best: Option<f64>,
    pub mean_eval_lb: Option<f64>,
    pub mean_eval_cont: Option<f64>,
    pub mean_eval_disc: Option<f64>,
}

fn mean<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups rows by configuration (first-seen order) and averages each metric
/// over the rows that report it.
pub fn aggregate(rows: &[BenchRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, u64, u64, Method)> = Vec::new();
    for r in rows {
        let k = (r.n, r.u.to_bits(), r.gamma, r.method);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(n, u_bits, gamma, method)| {
            let cell: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.n == n && r.u.to_bits() == u_bits && r.gamma == gamma && r.method == method)
                .collect();
            let count = |s: SolveStatus| cell.iter().filter(|r| r.status == s).count();
            AggregateRow {
                n,
                u: f64::from_bits(u_bits),
                gamma,
                method,
                rows: cell.len(),
                n_opt: count(SolveStatus::Optimal),
                tl_pct: 100.0 * count(SolveStatus::TimeLimit) as f64 / cell.len() as f64,
                n_err: count(SolveStatus::Error) + count(SolveStatus::Infeasible),
                mean_obj: mean(cell.iter().map(|r| r.obj)),
                mean_root_bound: mean(cell.iter().map(|r| r.root_bound)),
                mean_gap_rel: mean(cell.iter().map(|r| r.gap_rel)),
                mean_time_s: mean(cell.iter().map(|r| Some(r.time_s))).unwrap_or(0.0),
                mean_n_iter: mean(cell.iter().map(|r| r.n_iter.map(|v| v as f64))),
                mean_iter_best: mean(cell.iter().map(|r| r.iter_best.map(|v| v as f64))),
                mean_eval_lb: mean(cell.iter().map(|r| r.eval_lb)),
                mean_eval_cont: mean(cell.iter().map(|r| r.eval_cont)),
                mean_eval_disc: mean(cell.iter().map(|r| r.eval_disc)),
            }
        })
        .collect()
}

pub fn write_aggregate<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
