//! Domain types shared by every solver: instances, orderings, schedules,
//! scenarios and solve reports, plus the pure arithmetic on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing objective values across solvers.
pub const VALUE_TOL: f64 = 1e-6;

/// Dense row-major `rows x cols` matrix of costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    /// Builds a matrix from nested rows. Ragged input is rejected.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Entrywise `self + scale * other`.
    pub fn add_scaled(&self, other: &CostMatrix, scale: f64) -> Result<CostMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + scale * b).collect();
        Ok(CostMatrix { rows: self.rows, cols: self.cols, data })
    }
}

impl From<Vec<Vec<f64>>> for CostMatrix {
    fn from(rows: Vec<Vec<f64>>) -> Self {
        // Ragged input cannot be represented; validation reports the shape mismatch.
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            let mut r = r;
            r.resize(cols, f64::NAN);
            data.extend(r);
        }
        CostMatrix { rows: n, cols, data }
    }
}

impl From<CostMatrix> for Vec<Vec<f64>> {
    fn from(m: CostMatrix) -> Self {
        m.to_rows()
    }
}

/// Optional provenance attached to generated instances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_level: Option<f64>,
}

/// A robust scheduling instance: `n` activities on a horizon `{0..T-1}` with
/// nominal start costs `c_lower` and maximal deviations `c_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub durations: Vec<u32>,
    pub horizon: usize,
    pub c_lower: CostMatrix,
    pub c_hat: CostMatrix,
    /// Execution-time costs the nominal matrix was derived from, if known.
    pub w: Option<CostMatrix>,
    pub meta: InstanceMeta,
}

/// One failed instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

impl Instance {
    pub fn new(durations: Vec<u32>, horizon: usize, c_lower: CostMatrix, c_hat: CostMatrix) -> Self {
        Self { durations, horizon, c_lower, c_hat, w: None, meta: InstanceMeta::default() }
    }

    /// Builds an instance and rejects it if any invariant fails.
    pub fn checked(
        durations: Vec<u32>,
        horizon: usize,
        c_lower: CostMatrix,
        c_hat: CostMatrix,
    ) -> Result<Self> {
        let inst = Self::new(durations, horizon, c_lower, c_hat);
        inst.ensure_valid()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.durations.len()
    }

    pub fn duration(&self, j: usize) -> usize {
        self.durations[j] as usize
    }

    /// Worst-case costs `c_lower + c_hat`.
    pub fn c_upper(&self) -> CostMatrix {
        self.c_lower.add_scaled(&self.c_hat, 1.0).expect("validated shapes")
    }

    /// Returns every violated invariant. An empty list means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n();
        let t = self.horizon;
        if n == 0 {
            out.push(Violation { rule: "activities", detail: "instance has no activities".into() });
        }
        if t == 0 {
            out.push(Violation { rule: "horizon", detail: "horizon must be at least 1".into() });
        }
        for (j, &d) in self.durations.iter().enumerate() {
            if d == 0 {
                out.push(Violation { rule: "duration", detail: format!("activity {} has duration 0", j + 1) });
            }
        }
        for (name, m) in [("c_lower", &self.c_lower), ("c_hat", &self.c_hat)]
            .into_iter()
            .chain(self.w.as_ref().map(|w| ("w", w)))
        {
            if m.rows() != n || m.cols() != t {
                out.push(Violation {
                    rule: "shape",
                    detail: format!("{name} is {}x{}, expected {n}x{t}", m.rows(), m.cols()),
                });
                continue;
            }
            if let Some(pos) = m.iter().position(|v| !v.is_finite() || v < 0.0) {
                out.push(Violation {
                    rule: "nonnegativity",
                    detail: format!(
                        "{name}[{}][{}] = {}",
                        pos / t.max(1) + 1,
                        pos % t.max(1),
                        m.as_slice()[pos]
                    ),
                });
            }
        }
        if n > 0 && t > 0 {
            let sum: u64 = self.durations.iter().map(|&d| d as u64).sum();
            let max = self.durations.iter().copied().max().unwrap_or(0) as u64;
            if sum - max > t as u64 - 1 {
                out.push(Violation {
                    rule: "feasibility",
                    detail: format!("sum(d) - max(d) = {} exceeds T - 1 = {}", sum - max, t - 1),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// Cost matrix realized by a scenario: `c_lower + c_hat * delta`.
    pub fn realize(&self, scenario: &Scenario) -> Result<CostMatrix> {
        let mut c = self.c_lower.clone();
        if scenario.delta.rows() != self.n() || scenario.delta.cols() != self.horizon {
            return Err(Error::Shape("scenario does not match instance".into()));
        }
        for j in 0..self.n() {
            for t in 0..self.horizon {
                c.set(j, t, c.get(j, t) + self.c_hat.get(j, t) * scenario.delta.get(j, t));
            }
        }
        Ok(c)
    }
}

/// Free-standing form of [`Instance::validate`].
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    inst.validate()
}

/// Converts execution-time costs into start-time costs:
/// `c[j][t] = sum_{s=t}^{t+d_j-1} w[j][s]`, where slots past the horizon cost 0.
pub fn execution_to_start_costs(w: &CostMatrix, durations: &[u32], horizon: usize) -> Result<CostMatrix> {
    if w.rows() != durations.len() || w.cols() != horizon {
        return Err(Error::Shape(format!(
            "w is {}x{}, expected {}x{}",
            w.rows(),
            w.cols(),
            durations.len(),
            horizon
        )));
    }
    let mut c = CostMatrix::zeros(w.rows(), horizon);
    for (j, &d) in durations.iter().enumerate() {
        let row = w.row(j);
        // prefix[s] = w[0] + ... + w[s-1]
        let mut prefix = vec![0.0; horizon + 1];
        for s in 0..horizon {
            prefix[s + 1] = prefix[s] + row[s];
        }
        for t in 0..horizon {
            let end = (t + d as usize).min(horizon);
            c.set(j, t, prefix[end] - prefix[t]);
        }
    }
    Ok(c)
}

/// A total order on activities: `perm[k]` is the `k`-th activity to run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &j in &perm {
            if j >= n || seen[j] {
                return Err(Error::InvalidOrdering(format!("{perm:?} is not a permutation of 0..{n}")));
            }
            seen[j] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    /// Parses a 1-based comma separated list, e.g. `"2,1,3"`.
    pub fn parse_one_based(s: &str) -> Result<Self> {
        let perm = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .map(|v| v - 1)
                    .ok_or_else(|| Error::InvalidOrdering(format!("bad activity index {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Position of each activity in the order.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (k, &j) in self.perm.iter().enumerate() {
            pos[j] = k;
        }
        pos
    }

    /// Precedence matrix: `y[i][j] = true` iff `i` runs before `j`.
    pub fn precedence_matrix(&self) -> Vec<Vec<bool>> {
        let pos = self.positions();
        let n = self.perm.len();
        (0..n).map(|i| (0..n).map(|j| pos[i] < pos[j]).collect()).collect()
    }

    /// Consecutive pairs `(perm[k], perm[k+1])`.
    pub fn chain(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.perm.windows(2).map(|w| (w[0], w[1]))
    }

    /// Recovers an ordering from a (possibly noisy) 0/1 precedence matrix by
    /// counting predecessors. Fails if the matrix is not a strict total order.
    pub fn from_precedence(y: &[Vec<f64>]) -> Result<Self> {
        let n = y.len();
        let mut preds: Vec<(usize, usize)> = (0..n)
            .map(|j| ((0..n).filter(|&i| i != j && y[i][j] > 0.5).count(), j))
            .collect();
        preds.sort();
        for (k, &(count, _)) in preds.iter().enumerate() {
            if count != k {
                return Err(Error::InvalidOrdering("precedence matrix is not transitive".into()));
            }
        }
        Ordering::new(preds.into_iter().map(|(_, j)| j).collect())
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Ordering> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            out.push(Ordering { perm: perm.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else { break };
            let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        out
    }

    /// Whether the ordering leaves room for every activity before the horizon
    /// (only the last one may overrun `T - 1`).
    pub fn fits(&self, inst: &Instance) -> bool {
        let head: usize = self.perm.iter().take(self.perm.len().saturating_sub(1)).map(|&j| inst.duration(j)).sum();
        inst.horizon >= 1 && head <= inst.horizon - 1
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Ordering::new(v)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.perm
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.perm.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "{}", parts.join("->"))
    }
}

/// Start slot per activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: Vec<usize>,
}

impl Schedule {
    pub fn new(start: Vec<usize>) -> Self {
        Self { start }
    }

    /// Checks horizon bounds and pairwise non-overlap.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        if self.start.len() != inst.n() {
            return Err(Error::InvalidSchedule(format!(
                "{} start times for {} activities",
                self.start.len(),
                inst.n()
            )));
        }
        if let Some(j) = self.start.iter().position(|&s| s >= inst.horizon) {
            return Err(Error::InvalidSchedule(format!(
                "activity {} starts at {} outside horizon {}",
                j + 1,
                self.start[j],
                inst.horizon
            )));
        }
        for i in 0..inst.n() {
            for j in (i + 1)..inst.n() {
                let (si, sj) = (self.start[i], self.start[j]);
                if si < sj + inst.duration(j) && sj < si + inst.duration(i) {
                    return Err(Error::InvalidSchedule(format!("activities {} and {} overlap", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// Checks that consecutive activities of `ord` do not start before their
    /// predecessor completes.
    pub fn respects(&self, inst: &Instance, ord: &Ordering) -> bool {
        ord.chain().all(|(a, b)| self.start[b] >= self.start[a] + inst.duration(a))
    }
}

/// `sum_j costs[j][start[j]]`.
pub fn schedule_cost(sched: &Schedule, costs: &CostMatrix) -> Result<f64> {
    let mut total = 0.0;
    for (j, &s) in sched.start.iter().enumerate() {
        if j >= costs.rows() || s >= costs.cols() {
            return Err(Error::InvalidSchedule(format!("start time {s} of activity {} out of range", j + 1)));
        }
        total += costs.get(j, s);
    }
    Ok(total)
}

/// The first-stage decision implied by a schedule: activities sorted by start.
pub fn ordering_of_schedule(sched: &Schedule) -> Ordering {
    let mut perm: Vec<usize> = (0..sched.start.len()).collect();
    perm.sort_by_key(|&j| (sched.start[j], j));
    Ordering { perm }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    Continuous,
    Discrete,
}

impl fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UncertaintyKind::Continuous => "continuous",
            UncertaintyKind::Discrete => "discrete",
        })
    }
}

/// A deviation pattern `delta` drawn from a budgeted uncertainty set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub delta: CostMatrix,
    pub kind: UncertaintyKind,
    pub budget: f64,
}

impl Scenario {
    pub fn nominal(n: usize, horizon: usize, kind: UncertaintyKind, budget: f64) -> Self {
        Self { delta: CostMatrix::zeros(n, horizon), kind, budget }
    }

    /// Box, integrality and budget checks at tolerance `tol`.
    pub fn is_admissible(&self, tol: f64) -> bool {
        let in_box = self.delta.iter().all(|d| {
            (-tol..=1.0 + tol).contains(&d)
                && (self.kind == UncertaintyKind::Continuous || d.abs() <= tol || (d - 1.0).abs() <= tol)
        });
        in_box && self.delta.iter().sum::<f64>() <= self.budget + tol
    }

    /// Entries with `delta > 1/2`, as `(activity, slot)` pairs.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.delta.rows() {
            for t in 0..self.delta.cols() {
                if self.delta.get(j, t) > 0.5 {
                    out.push((j, t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    Infeasible,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Error => "error",
        })
    }
}

/// One row of the scenario-generation log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Master objective bound (lower bound on the robust optimum).
    pub master_value: f64,
    /// Worst-case value of the master's ordering (upper bound).
    pub adversarial_value: f64,
    pub ordering: Ordering,
    pub pool_size: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub objective: f64,
    pub bound: f64,
    pub gap_rel: f64,
    pub status: SolveStatus,
    pub wall_time: f64,
    pub ordering: Ordering,
    pub schedule: Option<Schedule>,
    /// Objective bound of the root relaxation, when the method has one.
    pub root_bound: Option<f64>,
    pub iterations: Option<Vec<IterationRecord>>,
    /// Iteration (1-based) whose ordering achieved the reported objective.
    pub iter_best: Option<usize>,
}

/// `(objective - bound) / max(|objective|, 1e-10)`, floored at zero.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    ((objective - bound) / objective.abs().max(1e-10)).max(0.0)
}
