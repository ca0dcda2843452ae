//! Backend-agnostic linear / mixed-binary models.
//!
//! Formulation modules build a [`LinearModel`] and hand it to a
//! [`MipBackend`]. The backend is chosen once per process through the
//! `ROBSCHED_MIP_BACKEND` environment variable (currently only `highs`).

mod highs_backend;

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub use highs_backend::HighsBackend;

/// Environment variable naming the solver backend.
pub const BACKEND_ENV: &str = "ROBSCHED_MIP_BACKEND";

/// Default time limit per solve, in seconds.
pub const DEFAULT_TIME_LIMIT: f64 = 7200.0;
/// Time limit used for `n >= 35`.
pub const LARGE_TIME_LIMIT: f64 = 10800.0;
pub const DEFAULT_REL_GAP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
    pub tag: String,
}

impl Constraint {
    pub fn new(terms: Vec<(VarId, f64)>, cmp: Cmp, rhs: f64, tag: impl Into<String>) -> Self {
        Self { terms, cmp, rhs, tag: tag.into() }
    }

    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate the row (0 if satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs(values);
        match self.cmp {
            Cmp::Le => (lhs - self.rhs).max(0.0),
            Cmp::Ge => (self.rhs - lhs).max(0.0),
            Cmp::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub sense: ObjSense,
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
}

impl LinearModel {
    pub fn new(sense: ObjSense) -> Self {
        Self { sense, vars: Vec::new(), cons: Vec::new() }
    }

    pub fn add_var(&mut self, kind: VarKind, lower: f64, upper: f64, obj: f64) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.vars.push(Variable { kind, lower, upper, obj });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, obj: f64) -> VarId {
        self.add_var(VarKind::Binary, 0.0, 1.0, obj)
    }

    pub fn add_continuous(&mut self, lower: f64, upper: f64, obj: f64) -> VarId {
        self.add_var(VarKind::Continuous, lower, upper, obj)
    }

    pub fn add_constraint(&mut self, c: Constraint) -> ConId {
        self.cons.push(c);
        ConId(self.cons.len() - 1)
    }

    pub fn add_row(&mut self, terms: Vec<(VarId, f64)>, cmp: Cmp, rhs: f64, tag: &str) -> ConId {
        self.add_constraint(Constraint::new(terms, cmp, rhs, tag))
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    pub fn is_mip(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.obj * x).sum()
    }

    /// Checks that rows only reference declared variables and bounds are sane.
    pub fn check(&self) -> Result<(), BackendError> {
        for (k, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || !v.obj.is_finite() {
                return Err(BackendError::Malformed(format!("variable {k} has bounds [{}, {}]", v.lower, v.upper)));
            }
        }
        for c in &self.cons {
            if let Some(&(v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(BackendError::Malformed(format!("row {:?} references unknown variable {}", c.tag, v.0)));
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(BackendError::Malformed(format!("row {:?} has non-finite data", c.tag)));
            }
        }
        Ok(())
    }
}

/// Called with the values of an integer candidate; returns rows it violates.
/// Must be a pure function of its argument.
pub type LazySeparator = Arc<dyn Fn(&[f64]) -> Vec<Constraint> + Send + Sync>;

#[derive(Clone)]
pub struct SolveOptions {
    pub time_limit: f64,
    pub rel_gap_target: f64,
    /// Initial incumbent; unspecified variables default to their lower bound (or 0).
    pub warm_start: Option<Vec<(VarId, f64)>>,
    pub lazy_separator: Option<LazySeparator>,
    pub want_duals: bool,
    pub want_pool: bool,
    /// Solve the LP relaxation first and report its value as `root_bound`.
    pub want_root_bound: bool,
    /// Drop integrality and solve the LP relaxation only.
    pub relax: bool,
    pub threads: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: DEFAULT_TIME_LIMIT,
            rel_gap_target: DEFAULT_REL_GAP,
            warm_start: None,
            lazy_separator: None,
            want_duals: false,
            want_pool: false,
            want_root_bound: false,
            relax: false,
            threads: 1,
        }
    }
}

impl fmt::Debug for SolveOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolveOptions")
            .field("time_limit", &self.time_limit)
            .field("rel_gap_target", &self.rel_gap_target)
            .field("warm_start", &self.warm_start.as_ref().map(Vec::len))
            .field("lazy_separator", &self.lazy_separator.is_some())
            .field("want_duals", &self.want_duals)
            .field("want_pool", &self.want_pool)
            .field("want_root_bound", &self.want_root_bound)
            .field("relax", &self.relax)
            .field("threads", &self.threads)
            .finish()
    }
}

impl SolveOptions {
    pub fn check(&self) -> Result<(), BackendError> {
        if !(self.time_limit > 0.0) {
            return Err(BackendError::Malformed(format!("time limit {} must be positive", self.time_limit)));
        }
        if !(self.rel_gap_target >= 0.0) {
            return Err(BackendError::Malformed(format!("gap target {} must be nonnegative", self.rel_gap_target)));
        }
        if self.threads == 0 {
            return Err(BackendError::Malformed("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendStatus {
    Optimal,
    /// Time limit hit; `values` hold the incumbent.
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct BackendResult {
    pub status: BackendStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub root_bound: Option<f64>,
    pub values: Vec<f64>,
    /// Row duals, sign convention of the backend: for a minimization,
    /// `<=` rows have nonpositive and `>=` rows nonnegative duals.
    pub duals: Option<Vec<f64>>,
    pub pool: Option<Vec<(f64, Vec<f64>)>>,
    pub wall_time: f64,
    /// Number of rows added by the lazy separator.
    pub lazy_rows: usize,
}

impl BackendResult {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    pub fn dual(&self, c: ConId) -> Option<f64> {
        self.duals.as_ref().map(|d| d[c.0])
    }

    pub fn gap_rel(&self) -> f64 {
        (self.objective - self.best_bound).abs() / self.objective.abs().max(1e-10)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackendError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("model is unbounded")]
    Unbounded,
    #[error("time limit reached without a feasible solution")]
    NoIncumbent,
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("backend `{0}` lacks required capability: {1}")]
    MissingCapability(String, &'static str),
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
    #[error("backend failure: {0}")]
    Failure(String),
}

pub trait MipBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn supports_duals(&self) -> bool;
    fn supports_pool(&self) -> bool;
    fn solve(&self, model: &LinearModel, opts: &SolveOptions) -> Result<BackendResult, BackendError>;
}

/// Resolves a backend by name. Backends without LP duals are rejected.
pub fn backend_by_name(name: &str) -> Result<Arc<dyn MipBackend>, BackendError> {
    let backend: Arc<dyn MipBackend> = match name.trim().to_ascii_lowercase().as_str() {
        "" | "highs" => Arc::new(HighsBackend),
        other => return Err(BackendError::UnknownBackend(other.to_string())),
    };
    if !backend.supports_duals() {
        return Err(BackendError::MissingCapability(backend.name().into(), "LP duals"));
    }
    Ok(backend)
}

/// Backend selected by [`BACKEND_ENV`], defaulting to HiGHS.
pub fn backend_from_env() -> Result<Arc<dyn MipBackend>, BackendError> {
    backend_by_name(&std::env::var(BACKEND_ENV).unwrap_or_default())
}

/// Process-wide backend, resolved once from the environment.
pub fn default_backend() -> Arc<dyn MipBackend> {
    static BACKEND: OnceLock<Arc<dyn MipBackend>> = OnceLock::new();
    BACKEND
        .get_or_init(|| match backend_from_env() {
            Ok(b) => b,
            Err(e) => {
                log::warn!("{e}; falling back to highs");
                Arc::new(HighsBackend)
            }
        })
        .clone()
}

/// Solver plumbing shared by every formulation module.
#[derive(Clone)]
pub struct SolverSettings {
    pub backend: Arc<dyn MipBackend>,
    pub time_limit: f64,
    pub rel_gap: f64,
    pub threads: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { backend: default_backend(), time_limit: DEFAULT_TIME_LIMIT, rel_gap: DEFAULT_REL_GAP, threads: 1 }
    }
}

impl fmt::Debug for SolverSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverSettings")
            .field("backend", &self.backend.name())
            .field("time_limit", &self.time_limit)
            .field("rel_gap", &self.rel_gap)
            .field("threads", &self.threads)
            .finish()
    }
}

impl SolverSettings {
    pub fn with_time_limit(mut self, secs: f64) -> Self {
        self.time_limit = secs;
        self
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.rel_gap = gap;
        self
    }

    /// Base backend options derived from these settings.
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            time_limit: self.time_limit,
            rel_gap_target: self.rel_gap,
            threads: self.threads,
            ..SolveOptions::default()
        }
    }

    pub fn solve(&self, model: &LinearModel, opts: &SolveOptions) -> Result<BackendResult, BackendError> {
        self.backend.solve(model, opts)
    }
}
