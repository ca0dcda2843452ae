//! Scenario generation for discrete budgeted uncertainty.
//!
//! A master problem picks the order minimizing the worst cost over a finite
//! scenario pool (a lower bound); the discrete adversary then finds the worst
//! scenario for that order (an upper bound). New scenarios join the pool
//! until the bounds meet.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::adversarial::adv_discrete_ranked;
use crate::compact::separate_transitivity;
use crate::deterministic::{precedence_terms, solve_second_stage_dp};
use crate::error::{Error, Result};
use crate::mip::{BackendError, BackendStatus, Cmp, Constraint, LinearModel, ObjSense, SolveOptions, SolverSettings, VarId};
use crate::model::{
    relative_gap, CostMatrix, Instance, IterationRecord, Ordering, Scenario, Schedule, SolveReport, SolveStatus,
    UncertaintyKind, VALUE_TOL,
};

const SEPARATION_TOL: f64 = 1e-6;
const ROOT_SEPARATION_ROUNDS: usize = 50;

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub delta: CostMatrix,
    /// Realized costs `c_lower + c_hat * delta`.
    pub costs: CostMatrix,
    /// Iteration that added the scenario (0 for the initial nominal one).
    pub iteration: usize,
    /// Adversarial value recorded when the scenario was found.
    pub value: f64,
}

/// Finite scenario set of the master problem; members are pairwise distinct.
#[derive(Debug, Clone, Default)]
pub struct ScenarioPool {
    entries: Vec<PoolEntry>,
}

impl ScenarioPool {
    /// Pool holding only the nominal scenario `c_lower`.
    pub fn nominal(inst: &Instance) -> Self {
        let mut pool = Self::default();
        let delta = CostMatrix::zeros(inst.n(), inst.horizon);
        pool.entries.push(PoolEntry { delta, costs: inst.c_lower.clone(), iteration: 0, value: f64::NAN });
        pool
    }

    pub fn contains(&self, delta: &CostMatrix) -> bool {
        self.entries.iter().any(|e| &e.delta == delta)
    }

    /// Adds a scenario unless an identical `delta` is present.
    pub fn insert(&mut self, inst: &Instance, delta: CostMatrix, iteration: usize, value: f64) -> Result<bool> {
        if self.contains(&delta) {
            return Ok(false);
        }
        let costs = inst.realize(&Scenario { delta: delta.clone(), kind: UncertaintyKind::Discrete, budget: f64::INFINITY })?;
        self.entries.push(PoolEntry { delta, costs, iteration, value });
        Ok(true)
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub ordering: Ordering,
    /// Incumbent objective `z`.
    pub value: f64,
    /// Lower bound on the master optimum.
    pub bound: f64,
    pub status: SolveStatus,
    /// Second-stage schedule per pool scenario.
    pub schedules: Vec<Schedule>,
}

struct MasterModel {
    model: LinearModel,
    x: Vec<Vec<Vec<VarId>>>,
    y: Vec<Vec<Option<VarId>>>,
}

fn transitivity_row(y: &[Vec<Option<VarId>>], (i, j, k): (usize, usize, usize)) -> Constraint {
    let v = |a: usize, b: usize| y[a][b].expect("off-diagonal");
    Constraint::new(vec![(v(i, j), 1.0), (v(j, k), 1.0), (v(i, k), -1.0)], Cmp::Le, 1.0, "transitivity")
}

fn y_matrix(y: &[Vec<Option<VarId>>], values: &[f64]) -> Vec<Vec<f64>> {
    y.iter().map(|row| row.iter().map(|v| v.map_or(0.0, |v| values[v.0])).collect()).collect()
}

fn build_master(inst: &Instance, pool: &ScenarioPool, strengthen: bool) -> MasterModel {
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut m = LinearModel::new(ObjSense::Minimize);
    let z = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y: Vec<Vec<Option<VarId>>> =
        (0..n).map(|i| (0..n).map(|j| (i != j).then(|| m.add_binary(0.0))).collect()).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            m.add_row(vec![(y[i][j].unwrap(), 1.0), (y[j][i].unwrap(), 1.0)], Cmp::Eq, 1.0, "antisymmetry");
        }
    }
    if !strengthen {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && j != k && i != k {
                        m.add_constraint(transitivity_row(&y, (i, j, k)));
                    }
                }
            }
        }
    }
    let mut x = Vec::with_capacity(pool.len());
    for entry in pool.entries() {
        let xk: Vec<Vec<VarId>> = (0..n).map(|_| (0..horizon).map(|_| m.add_binary(0.0)).collect()).collect();
        for xj in &xk {
            m.add_row(xj.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0, "assign");
        }
        for i in 0..n {
            for j in 0..n {
                if let Some(yij) = y[i][j] {
                    for t in 0..horizon {
                        let mut terms = precedence_terms(inst, &xk, i, j, t);
                        terms.push((yij, 1.0));
                        m.add_row(terms, Cmp::Le, 2.0, "precedence");
                    }
                }
            }
        }
        if strengthen {
            for t in 0..horizon {
                let terms = (0..n)
                    .flat_map(|j| {
                        let from = (t + 1).saturating_sub(inst.duration(j));
                        xk[j][from..=t].iter().map(|&v| (v, 1.0))
                    })
                    .collect();
                m.add_row(terms, Cmp::Le, 1.0, "capacity");
            }
        }
        let mut epi = vec![(z, 1.0)];
        for j in 0..n {
            for t in 0..horizon {
                epi.push((xk[j][t], -entry.costs.get(j, t)));
            }
        }
        m.add_row(epi, Cmp::Ge, 0.0, "epigraph");
        x.push(xk);
    }
    MasterModel { model: m, x, y }
}

/// Warm start from an ordering: its precedence matrix and the DP schedule per scenario.
fn master_warm_start(inst: &Instance, pool: &ScenarioPool, mm: &MasterModel, ord: &Ordering) -> Result<Vec<(VarId, f64)>> {
    let prec = ord.precedence_matrix();
    let mut out = Vec::new();
    for (i, row) in mm.y.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                out.push((*v, if prec[i][j] { 1.0 } else { 0.0 }));
            }
        }
    }
    let mut z = f64::NEG_INFINITY;
    for (entry, xk) in pool.entries().iter().zip(&mm.x) {
        let (v, sched) = solve_second_stage_dp(inst, &entry.costs, ord)?;
        z = z.max(v);
        for (j, &t) in sched.start.iter().enumerate() {
            out.push((xk[j][t], 1.0));
        }
    }
    out.push((VarId(0), z));
    Ok(out)
}

/// Minimizes, over orderings, the largest second-stage cost across the pool.
pub fn solve_master(
    inst: &Instance,
    pool: &ScenarioPool,
    strengthen: bool,
    settings: &SolverSettings,
    warm: Option<&Ordering>,
) -> Result<MasterSolution> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("scenario pool is empty".into()));
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(settings.time_limit.max(0.0));
    let mut mm = build_master(inst, pool, strengthen);
    let map = |e: BackendError| match e {
        BackendError::Infeasible => Error::Infeasible("no ordering fits the horizon".into()),
        e => e.into(),
    };
    if strengthen && inst.n() >= 3 {
        for _ in 0..ROOT_SEPARATION_ROUNDS {
            let remaining = deadline.saturating_duration_since(Instant::now()).as_secs_f64();
            if remaining <= 0.0 {
                break;
            }
            let opts = SolveOptions { relax: true, time_limit: remaining, ..settings.options() };
            let res = settings.solve(&mm.model, &opts).map_err(map)?;
            let cuts = separate_transitivity(&y_matrix(&mm.y, &res.values), SEPARATION_TOL);
            if cuts.is_empty() {
                break;
            }
            for c in cuts {
                let row = transitivity_row(&mm.y, c);
                mm.model.add_constraint(row);
            }
        }
    }
    let mut opts = settings.options();
    opts.time_limit = deadline.saturating_duration_since(Instant::now()).as_secs_f64().max(1e-3);
    if let Some(ord) = warm.filter(|o| o.fits(inst)) {
        opts.warm_start = Some(master_warm_start(inst, pool, &mm, ord)?);
    }
    if strengthen {
        let y = mm.y.clone();
        opts.lazy_separator = Some(Arc::new(move |values: &[f64]| {
            separate_transitivity(&y_matrix(&y, values), SEPARATION_TOL)
                .into_iter()
                .map(|c| transitivity_row(&y, c))
                .collect()
        }));
    }
    let res = settings.solve(&mm.model, &opts).map_err(map)?;
    let ordering = Ordering::from_precedence(&y_matrix(&mm.y, &res.values))?;
    let schedules = mm
        .x
        .iter()
        .map(|xk| {
            Schedule::new(
                xk.iter()
                    .map(|xj| (0..xj.len()).max_by(|&a, &b| res.value(xj[a]).total_cmp(&res.value(xj[b]))).unwrap_or(0))
                    .collect(),
            )
        })
        .collect();
    let status = match res.status {
        BackendStatus::Optimal => SolveStatus::Optimal,
        BackendStatus::TimeLimit => SolveStatus::TimeLimit,
    };
    Ok(MasterSolution { ordering, value: res.objective, bound: res.best_bound.min(res.objective), status, schedules })
}

/// Picks up to `max(k, 1)` candidates by value, best first, skipping any
/// `delta` already in the pool or already picked. Candidates are expected
/// best first, so the exact worst case leads whenever it is new.
pub fn enrich_scenarios(candidates: &[(CostMatrix, f64)], existing: &ScenarioPool, k: usize) -> Vec<(CostMatrix, f64)> {
    let mut sorted: Vec<&(CostMatrix, f64)> = candidates.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut out: Vec<(CostMatrix, f64)> = Vec::new();
    for (delta, value) in sorted {
        if out.len() >= k.max(1) {
            break;
        }
        if existing.contains(delta) || out.iter().any(|(d, _)| d == delta) {
            continue;
        }
        out.push((delta.clone(), *value));
    }
    out
}

/// Spends unused budget on the largest remaining deviations. Costs only go
/// up, so the worst-case value of the scenario is preserved.
fn pad_scenario(inst: &Instance, delta: &CostMatrix, budget: u64) -> CostMatrix {
    let mut out = delta.clone();
    let used = delta.iter().filter(|&d| d > 0.5).count() as u64;
    let mut free: Vec<(f64, usize, usize)> = (0..inst.n())
        .flat_map(|j| (0..inst.horizon).map(move |t| (j, t)))
        .filter(|&(j, t)| delta.get(j, t) < 0.5 && inst.c_hat.get(j, t) > 0.0)
        .map(|(j, t)| (inst.c_hat.get(j, t), j, t))
        .collect();
    free.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for &(_, j, t) in free.iter().take(budget.saturating_sub(used) as usize) {
        out.set(j, t, 1.0);
    }
    out
}

#[derive(Debug, Clone)]
pub struct IterativeOptions {
    /// Capacity rows per scenario copy and lazy transitivity in the master.
    pub strengthen: bool,
    /// Extra adversarial candidates added per iteration.
    pub enrich_k: usize,
    pub settings: SolverSettings,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self { strengthen: false, enrich_k: 0, settings: SolverSettings::default() }
    }
}

/// Result of [`solve_iterative`], with the final pool.
#[derive(Debug, Clone)]
pub struct IterativeSolution {
    pub report: SolveReport,
    pub pool: ScenarioPool,
}

/// Scenario generation for integer budget `gamma`.
///
/// The reported objective is the smallest adversarial value seen (the
/// best-iterate upper bound); the bound is the largest master lower bound.
pub fn solve_iterative(inst: &Instance, budget: f64, opts: &IterativeOptions) -> Result<IterativeSolution> {
    inst.ensure_valid()?;
    if budget < 0.0 || budget.fract() != 0.0 || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("discrete budget {budget} must be a nonnegative integer")));
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(opts.settings.time_limit.max(0.0));
    let remaining = || deadline.saturating_duration_since(Instant::now()).as_secs_f64();
    let mut pool = ScenarioPool::nominal(inst);
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut lb = f64::NEG_INFINITY;
    let mut best: Option<(f64, Ordering, usize)> = None;
    let mut warm: Option<Ordering> = None;
    let mut status = SolveStatus::TimeLimit;

    for iteration in 1.. {
        let master_settings = opts.settings.clone().with_time_limit(remaining().max(1e-3));
        let master = match solve_master(inst, &pool, opts.strengthen, &master_settings, warm.as_ref()) {
            Ok(m) => m,
            Err(Error::Backend(BackendError::NoIncumbent)) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        lb = lb.max(master.bound);

        let adv_settings = opts.settings.clone().with_time_limit(remaining().max(1e-3));
        let ranked = adv_discrete_ranked(inst, &master.ordering, budget, opts.enrich_k.max(1), &adv_settings)?;
        let worst = &ranked[0];
        if best.as_ref().map_or(true, |(v, _, _)| worst.value < *v) {
            best = Some((worst.value, master.ordering.clone(), iteration));
        }
        let ub = best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY);
        log.push(IterationRecord {
            iteration,
            master_value: lb,
            adversarial_value: worst.value,
            ordering: master.ordering.clone(),
            pool_size: pool.len(),
            wall_time: start.elapsed().as_secs_f64(),
        });
        log::debug!("iteration {iteration}: master {:.6} adversary {:.6} pool {}", master.value, worst.value, pool.len());

        let exact = worst.status == SolveStatus::Optimal && master.status == SolveStatus::Optimal;
        if exact && (worst.value <= master.value + VALUE_TOL || ub - lb <= VALUE_TOL) {
            status = SolveStatus::Optimal;
            lb = lb.max(ub.min(master.value));
            break;
        }
        if remaining() <= 0.0 {
            break;
        }
        let candidates: Vec<(CostMatrix, f64)> = ranked
            .iter()
            .map(|r| (pad_scenario(inst, &r.scenario.delta, budget as u64), r.value))
            .collect();
        let mut added = 0;
        for (delta, value) in enrich_scenarios(&candidates, &pool, opts.enrich_k) {
            if pool.insert(inst, delta, iteration, value)? {
                added += 1;
            }
        }
        if added == 0 {
            // every candidate is already in the pool, so the master value is the
            // exact worst case of its ordering up to the master gap
            status = if master.status == SolveStatus::Optimal && worst.status == SolveStatus::Optimal {
                SolveStatus::Optimal
            } else {
                SolveStatus::TimeLimit
            };
            break;
        }
        warm = Some(master.ordering);
    }

    let (objective, ordering, iter_best) = best.ok_or(Error::NoIncumbent)?;
    let bound = lb.min(objective);
    let (_, schedule) = solve_second_stage_dp(inst, &inst.c_lower, &ordering)?;
    Ok(IterativeSolution {
        report: SolveReport {
            objective,
            bound,
            gap_rel: relative_gap(objective, bound),
            status,
            wall_time: start.elapsed().as_secs_f64(),
            ordering,
            schedule: Some(schedule),
            root_bound: None,
            iterations: Some(log),
            iter_best: Some(iter_best),
        },
        pool,
    })
}
