//! Nominal schedules and the fixed-ordering second stage.
//!
//! For a fixed ordering the second stage is a project scheduling problem with
//! chain precedences. Its LP relaxation is integral, so it is solved either
//! by a forward dynamic program over `(position, start)` or as an LP whose
//! duals feed the adversarial models.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mip::{BackendStatus, Cmp, ConId, LinearModel, ObjSense, SolverSettings, VarId};
use crate::model::{
    ordering_of_schedule, relative_gap, schedule_cost, CostMatrix, Instance, Ordering, Schedule, SolveReport,
    SolveStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NominalMode {
    /// Optimize against `c_lower`.
    Lower,
    /// Optimize against `c_lower + c_hat`.
    Upper,
}

/// Solves the time-indexed nominal MILP with non-overlap rows
/// `d_j x_jt + sum_{i != j} sum_{s=t}^{t+d_j-1} x_is <= d_j`.
pub fn solve_nominal(inst: &Instance, mode: NominalMode, settings: &SolverSettings) -> Result<SolveReport> {
    inst.ensure_valid()?;
    let costs = match mode {
        NominalMode::Lower => inst.c_lower.clone(),
        NominalMode::Upper => inst.c_upper(),
    };
    solve_nominal_costs(inst, &costs, settings)
}

/// Nominal MILP for an arbitrary start-cost matrix.
pub fn solve_nominal_costs(inst: &Instance, costs: &CostMatrix, settings: &SolverSettings) -> Result<SolveReport> {
    let start = Instant::now();
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut m = LinearModel::new(ObjSense::Minimize);
    let x: Vec<Vec<VarId>> = (0..n).map(|j| (0..horizon).map(|t| m.add_binary(costs.get(j, t))).collect()).collect();
    for xj in &x {
        m.add_row(xj.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0, "assign");
    }
    for j in 0..n {
        let d = inst.duration(j);
        for t in 0..horizon {
            let mut terms = vec![(x[j][t], d as f64)];
            let end = (t + d).min(horizon);
            for (i, xi) in x.iter().enumerate() {
                if i != j {
                    terms.extend(xi[t..end].iter().map(|&v| (v, 1.0)));
                }
            }
            m.add_row(terms, Cmp::Le, d as f64, "no-overlap");
        }
    }
    let res = settings.solve(&m, &settings.options()).map_err(|e| match e {
        crate::mip::BackendError::Infeasible => Error::Infeasible("no non-overlapping schedule fits the horizon".into()),
        e => e.into(),
    })?;
    let starts = (0..n)
        .map(|j| (0..horizon).max_by(|&a, &b| res.value(x[j][a]).total_cmp(&res.value(x[j][b]))).unwrap_or(0))
        .collect();
    let schedule = Schedule::new(starts);
    let objective = schedule_cost(&schedule, costs)?;
    let status = match res.status {
        BackendStatus::Optimal => SolveStatus::Optimal,
        BackendStatus::TimeLimit => SolveStatus::TimeLimit,
    };
    let bound = res.best_bound.min(objective);
    Ok(SolveReport {
        objective,
        bound,
        gap_rel: relative_gap(objective, bound),
        status,
        wall_time: start.elapsed().as_secs_f64(),
        ordering: ordering_of_schedule(&schedule),
        schedule: Some(schedule),
        root_bound: None,
        iterations: None,
        iter_best: None,
    })
}

/// Exact second stage for a fixed ordering by forward dynamic programming.
///
/// `f(k, t) = costs[pi(k)][t] + min_{t' <= t - d_{pi(k-1)}} f(k-1, t')`, evaluated
/// with running prefix minima in `O(n T)`. Ties go to the earliest start.
pub fn solve_second_stage_dp(inst: &Instance, costs: &CostMatrix, ord: &Ordering) -> Result<(f64, Schedule)> {
    let (n, horizon) = (inst.n(), inst.horizon);
    if ord.len() != n {
        return Err(Error::InvalidOrdering(format!("ordering has {} activities, instance {n}", ord.len())));
    }
    if costs.rows() != n || costs.cols() != horizon {
        return Err(Error::Shape(format!("cost matrix {}x{} for {n}x{horizon}", costs.rows(), costs.cols())));
    }
    if n == 0 {
        return Ok((0.0, Schedule::new(Vec::new())));
    }
    let perm = ord.perm();
    // best[k][u] = (min_{t <= u} f(k, t), earliest argmin)
    let mut best: Vec<Vec<(f64, usize)>> = Vec::with_capacity(n);
    for (k, &job) in perm.iter().enumerate() {
        let mut row = Vec::with_capacity(horizon);
        let mut running = (f64::INFINITY, usize::MAX);
        for t in 0..horizon {
            let f = if k == 0 {
                costs.get(job, t)
            } else {
                let d_prev = inst.duration(perm[k - 1]);
                if t >= d_prev {
                    let prev = best[k - 1][t - d_prev].0;
                    if prev.is_finite() {
                        prev + costs.get(job, t)
                    } else {
                        f64::INFINITY
                    }
                } else {
                    f64::INFINITY
                }
            };
            if f < running.0 {
                running = (f, t);
            }
            row.push(running);
        }
        best.push(row);
    }
    let (value, mut t) = best[n - 1][horizon - 1];
    if !value.is_finite() {
        return Err(Error::Infeasible(format!("ordering {ord} does not fit horizon {horizon}")));
    }
    let mut start = vec![0; n];
    for k in (0..n).rev() {
        start[perm[k]] = t;
        if k > 0 {
            let d_prev = inst.duration(perm[k - 1]);
            t = best[k - 1][t - d_prev].1;
        }
    }
    Ok((value, Schedule::new(start)))
}

/// LP solution of the second stage with its dual certificate.
#[derive(Debug, Clone)]
pub struct SecondStageLp {
    pub value: f64,
    /// Fractional start assignment `x[j][t]`.
    pub x: CostMatrix,
    /// Duals of the assignment rows.
    pub alpha: Vec<f64>,
    /// `gamma[k][t]`: dual of the precedence row for chain pair `k` at slot `t` (nonnegative).
    pub gamma: Vec<Vec<f64>>,
    /// Chain pairs `(i, j)`, aligned with `gamma`.
    pub pairs: Vec<(usize, usize)>,
}

impl SecondStageLp {
    /// Dual objective `sum alpha - sum gamma`.
    pub fn dual_objective(&self) -> f64 {
        self.alpha.iter().sum::<f64>() - self.gamma.iter().flatten().sum::<f64>()
    }

    /// Largest violation of the dual rows
    /// `alpha_j - sum_{(j,r)} sum_{s<=t} gamma - sum_{(r,j)} sum_{s>=t-d_r+1} gamma <= c_jt`.
    pub fn dual_violation(&self, inst: &Instance, costs: &CostMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..inst.n() {
            for t in 0..inst.horizon {
                let lhs = self.alpha[j] - gamma_load(inst, &self.pairs, &self.gamma, j, t);
                worst = worst.max(lhs - costs.get(j, t));
            }
        }
        worst
    }
}

/// `sum_{(j,r)} sum_{s=0}^{t} gamma_{(j,r),s} + sum_{(r,j)} sum_{s=max(0,t-d_r+1)}^{T-1} gamma_{(r,j),s}`.
pub(crate) fn gamma_load(inst: &Instance, pairs: &[(usize, usize)], gamma: &[Vec<f64>], j: usize, t: usize) -> f64 {
    let mut load = 0.0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        if a == j {
            load += gamma[k][..=t].iter().sum::<f64>();
        }
        if b == j {
            let from = (t + 1).saturating_sub(inst.duration(a));
            load += gamma[k][from..].iter().sum::<f64>();
        }
    }
    load
}

/// Precedence row for chain pair `(i, j)` at slot `t`:
/// `sum_{s=t}^{T-1} x_is + sum_{s=0}^{t+d_i-1} x_js`, as coefficient terms.
pub(crate) fn precedence_terms(inst: &Instance, x: &[Vec<VarId>], i: usize, j: usize, t: usize) -> Vec<(VarId, f64)> {
    let horizon = inst.horizon;
    let end = (t + inst.duration(i)).min(horizon);
    x[i][t..].iter().chain(&x[j][..end]).map(|&v| (v, 1.0)).collect()
}

/// Second stage as an LP over the chain precedences of `ord`, with duals.
pub fn solve_second_stage_lp(
    inst: &Instance,
    costs: &CostMatrix,
    ord: &Ordering,
    settings: &SolverSettings,
) -> Result<SecondStageLp> {
    let (n, horizon) = (inst.n(), inst.horizon);
    if ord.len() != n {
        return Err(Error::InvalidOrdering(format!("ordering has {} activities, instance {n}", ord.len())));
    }
    if !ord.fits(inst) {
        return Err(Error::Infeasible(format!("ordering {ord} does not fit horizon {horizon}")));
    }
    let mut m = LinearModel::new(ObjSense::Minimize);
    let x: Vec<Vec<VarId>> =
        (0..n).map(|j| (0..horizon).map(|t| m.add_continuous(0.0, f64::INFINITY, costs.get(j, t))).collect()).collect();
    let assign: Vec<ConId> =
        x.iter().map(|xj| m.add_row(xj.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0, "assign")).collect();
    let pairs: Vec<(usize, usize)> = ord.chain().collect();
    let prec: Vec<Vec<ConId>> = pairs
        .iter()
        .map(|&(i, j)| {
            (0..horizon).map(|t| m.add_row(precedence_terms(inst, &x, i, j, t), Cmp::Le, 1.0, "precedence")).collect()
        })
        .collect();
    let opts = crate::mip::SolveOptions { want_duals: true, ..settings.options() };
    let res = settings.solve(&m, &opts).map_err(|e| match e {
        crate::mip::BackendError::Infeasible => Error::Infeasible(format!("ordering {ord} does not fit horizon")),
        e => e.into(),
    })?;
    let mut xm = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in 0..horizon {
            xm.set(j, t, res.value(x[j][t]));
        }
    }
    let alpha = assign.iter().map(|&c| res.dual(c).unwrap_or(0.0)).collect();
    let gamma = prec.iter().map(|row| row.iter().map(|&c| (-res.dual(c).unwrap_or(0.0)).max(0.0)).collect()).collect();
    Ok(SecondStageLp { value: res.objective, x: xm, alpha, gamma, pairs })
}
