//! Compact MIP for continuous budgeted uncertainty.
//!
//! For a fixed order the second stage is an integral LP, so the inner
//! max-min collapses to `sum c_lower x + budget * pi + sum eta` with
//! `pi + eta_jt >= c_hat_jt x_jt`. The order enters through binary `y_ij`
//! that switch the precedence rows on (`... <= 2 - y_ij`).

use std::sync::Arc;
use std::time::Instant;

use crate::deterministic::{precedence_terms, solve_nominal, NominalMode};
use crate::error::{Error, Result};
use crate::mip::{BackendError, BackendStatus, Cmp, Constraint, LinearModel, ObjSense, SolveOptions, SolverSettings, VarId};
use crate::model::{relative_gap, CostMatrix, Instance, Ordering, SolveReport, SolveStatus};

/// Rounds of fractional transitivity separation at the root.
const ROOT_SEPARATION_ROUNDS: usize = 50;
const SEPARATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CompactOptions {
    /// Add the capacity rows and `eta <= c_hat x`, and separate transitivity lazily.
    pub strengthen: bool,
    /// Seed the solver with the nominal lower schedule.
    pub warm_start: bool,
    /// In the strengthened variant, also separate transitivity on fractional root LPs.
    pub separate_fractional: bool,
    pub settings: SolverSettings,
}

impl Default for CompactOptions {
    fn default() -> Self {
        Self { strengthen: false, warm_start: false, separate_fractional: true, settings: SolverSettings::default() }
    }
}

#[derive(Debug, Clone)]
pub struct CompactSolution {
    pub report: SolveReport,
    /// Dual of the budget row.
    pub pi: f64,
    pub eta: CostMatrix,
    pub x_frac: CostMatrix,
    pub ordering: Ordering,
}

/// Which row families to put into the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactRows {
    pub static_transitivity: bool,
    /// `sum_j sum_{s=max(0,t-d_j+1)}^{t} x_js <= 1` for every `t`.
    pub capacity: bool,
    /// `eta_jt <= c_hat_jt x_jt`.
    pub eta_link: bool,
}

impl CompactRows {
    pub const BASELINE: Self = Self { static_transitivity: true, capacity: false, eta_link: false };
    pub const STRENGTHENED: Self = Self { static_transitivity: false, capacity: true, eta_link: true };
}

struct CompactModel {
    model: LinearModel,
    x: Vec<Vec<VarId>>,
    eta: Vec<Vec<VarId>>,
    pi: VarId,
    /// `y[i][j]` for `i != j`.
    y: Vec<Vec<Option<VarId>>>,
}

fn transitivity_row(y: &[Vec<Option<VarId>>], (i, j, k): (usize, usize, usize)) -> Constraint {
    let v = |a: usize, b: usize| y[a][b].expect("off-diagonal");
    Constraint::new(vec![(v(i, j), 1.0), (v(j, k), 1.0), (v(i, k), -1.0)], Cmp::Le, 1.0, "transitivity")
}

fn build_model(inst: &Instance, budget: f64, rows: CompactRows) -> CompactModel {
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut m = LinearModel::new(ObjSense::Minimize);
    let x: Vec<Vec<VarId>> =
        (0..n).map(|j| (0..horizon).map(|t| m.add_continuous(0.0, f64::INFINITY, inst.c_lower.get(j, t))).collect()).collect();
    let eta: Vec<Vec<VarId>> =
        (0..n).map(|_| (0..horizon).map(|_| m.add_continuous(0.0, f64::INFINITY, 1.0)).collect()).collect();
    let pi = m.add_continuous(0.0, f64::INFINITY, budget);
    let y: Vec<Vec<Option<VarId>>> =
        (0..n).map(|i| (0..n).map(|j| (i != j).then(|| m.add_binary(0.0))).collect()).collect();

    for xj in &x {
        m.add_row(xj.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0, "assign");
    }
    for i in 0..n {
        for j in 0..n {
            if let Some(yij) = y[i][j] {
                for t in 0..horizon {
                    let mut terms = precedence_terms(inst, &x, i, j, t);
                    terms.push((yij, 1.0));
                    m.add_row(terms, Cmp::Le, 2.0, "precedence");
                }
            }
        }
    }
    for j in 0..n {
        for t in 0..horizon {
            let dev = inst.c_hat.get(j, t);
            m.add_row(vec![(pi, 1.0), (eta[j][t], 1.0), (x[j][t], -dev)], Cmp::Ge, 0.0, "deviation");
            if rows.eta_link {
                m.add_row(vec![(eta[j][t], 1.0), (x[j][t], -dev)], Cmp::Le, 0.0, "eta-link");
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            m.add_row(vec![(y[i][j].unwrap(), 1.0), (y[j][i].unwrap(), 1.0)], Cmp::Eq, 1.0, "antisymmetry");
        }
    }
    if rows.static_transitivity {
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
    if rows.capacity {
        for t in 0..horizon {
            let terms = (0..n)
                .flat_map(|j| {
                    let from = (t + 1).saturating_sub(inst.duration(j));
                    x[j][from..=t].iter().map(|&v| (v, 1.0))
                })
                .collect();
            m.add_row(terms, Cmp::Le, 1.0, "capacity");
        }
    }
    CompactModel { model: m, x, eta, pi, y }
}

/// All triples with `y_ij + y_jk - y_ik > 1 + tol` (0-based).
pub fn separate_transitivity(y: &[Vec<f64>], tol: f64) -> Vec<(usize, usize, usize)> {
    let n = y.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k != i && k != j && y[i][j] + y[j][k] - y[i][k] > 1.0 + tol {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

fn y_matrix(y: &[Vec<Option<VarId>>], values: &[f64]) -> Vec<Vec<f64>> {
    y.iter().map(|row| row.iter().map(|v| v.map_or(0.0, |v| values[v.0])).collect()).collect()
}

/// A feasible starting point built from the nominal lower schedule.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub ordering: Ordering,
    pub x: CostMatrix,
    pub pi: f64,
    pub eta: CostMatrix,
    /// Objective of the point at budget `gamma`: `sum c_lower x + gamma pi + sum eta`.
    pub objective: f64,
}

/// Nominal lower schedule as a feasible point: `pi = 0` and `eta = c_hat x`.
pub fn build_warm_start(inst: &Instance, budget: f64, settings: &SolverSettings) -> Result<WarmStart> {
    let nominal = solve_nominal(inst, NominalMode::Lower, settings)?;
    let schedule = nominal.schedule.ok_or(Error::NoIncumbent)?;
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut x = CostMatrix::zeros(n, horizon);
    let mut eta = CostMatrix::zeros(n, horizon);
    let mut objective = 0.0;
    for (j, &t) in schedule.start.iter().enumerate() {
        x.set(j, t, 1.0);
        eta.set(j, t, inst.c_hat.get(j, t));
        objective += inst.c_lower.get(j, t) + inst.c_hat.get(j, t);
    }
    let pi = 0.0;
    Ok(WarmStart { ordering: nominal.ordering, x, pi, eta, objective: objective + budget * pi })
}

fn warm_values(cm: &CompactModel, ws: &WarmStart) -> Vec<(VarId, f64)> {
    let mut out = vec![(cm.pi, ws.pi)];
    for j in 0..cm.x.len() {
        for t in 0..cm.x[j].len() {
            out.push((cm.x[j][t], ws.x.get(j, t)));
            out.push((cm.eta[j][t], ws.eta.get(j, t)));
        }
    }
    let prec = ws.ordering.precedence_matrix();
    for (i, row) in cm.y.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                out.push((*v, if prec[i][j] { 1.0 } else { 0.0 }));
            }
        }
    }
    out
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget {budget} must be a finite nonnegative number")));
    }
    Ok(())
}

fn map_backend(e: BackendError) -> Error {
    match e {
        BackendError::Infeasible => Error::Infeasible("no ordering fits the horizon".into()),
        e => e.into(),
    }
}

/// Fractional transitivity separation on the LP relaxation; adds the cuts
/// to the model. Returns the number of rows added.
fn separate_root(cm: &mut CompactModel, settings: &SolverSettings, deadline: Instant) -> Result<usize> {
    let mut added = 0;
    for _ in 0..ROOT_SEPARATION_ROUNDS {
        let remaining = deadline.saturating_duration_since(Instant::now()).as_secs_f64();
        if remaining <= 0.0 {
            break;
        }
        let opts = SolveOptions { relax: true, time_limit: remaining, ..settings.options() };
        let res = settings.solve(&cm.model, &opts).map_err(map_backend)?;
        if res.status != BackendStatus::Optimal {
            break;
        }
        let cuts = separate_transitivity(&y_matrix(&cm.y, &res.values), SEPARATION_TOL);
        if cuts.is_empty() {
            break;
        }
        added += cuts.len();
        for c in cuts {
            let row = transitivity_row(&cm.y, c);
            cm.model.add_constraint(row);
        }
    }
    Ok(added)
}

/// Solves the compact model for budget `gamma`.
pub fn solve_compact(inst: &Instance, budget: f64, opts: &CompactOptions) -> Result<CompactSolution> {
    inst.ensure_valid()?;
    check_budget(budget)?;
    let start = Instant::now();
    let settings = &opts.settings;
    let deadline = start + std::time::Duration::from_secs_f64(settings.time_limit.max(0.0));
    let rows = if opts.strengthen { CompactRows::STRENGTHENED } else { CompactRows::BASELINE };
    let mut cm = build_model(inst, budget, rows);

    let warm = if opts.warm_start { Some(build_warm_start(inst, budget, settings)?) } else { None };
    if opts.strengthen && opts.separate_fractional {
        let added = separate_root(&mut cm, settings, deadline)?;
        log::debug!("root separation added {added} transitivity rows");
    }

    let mut solve_opts = settings.options();
    solve_opts.time_limit = deadline.saturating_duration_since(Instant::now()).as_secs_f64().max(1e-3);
    solve_opts.want_root_bound = true;
    solve_opts.warm_start = warm.as_ref().map(|ws| warm_values(&cm, ws));
    if opts.strengthen {
        let y = cm.y.clone();
        solve_opts.lazy_separator = Some(Arc::new(move |values: &[f64]| {
            separate_transitivity(&y_matrix(&y, values), SEPARATION_TOL)
                .into_iter()
                .map(|c| transitivity_row(&y, c))
                .collect()
        }));
    }
    let res = settings.solve(&cm.model, &solve_opts).map_err(map_backend)?;

    let ordering = Ordering::from_precedence(&y_matrix(&cm.y, &res.values))?;
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut x_frac = CostMatrix::zeros(n, horizon);
    let mut eta = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in 0..horizon {
            x_frac.set(j, t, res.value(cm.x[j][t]));
            eta.set(j, t, res.value(cm.eta[j][t]));
        }
    }
    let status = match res.status {
        BackendStatus::Optimal => SolveStatus::Optimal,
        BackendStatus::TimeLimit => SolveStatus::TimeLimit,
    };
    let bound = res.best_bound.min(res.objective);
    Ok(CompactSolution {
        report: SolveReport {
            objective: res.objective,
            bound,
            gap_rel: relative_gap(res.objective, bound),
            status,
            wall_time: start.elapsed().as_secs_f64(),
            ordering: ordering.clone(),
            schedule: None,
            root_bound: res.root_bound,
            iterations: None,
            iter_best: None,
        },
        pi: res.value(cm.pi),
        eta,
        x_frac,
        ordering,
    })
}

/// LP relaxation value of the compact model with the given row families.
pub fn root_lp_bound(inst: &Instance, budget: f64, rows: CompactRows, settings: &SolverSettings) -> Result<f64> {
    inst.ensure_valid()?;
    check_budget(budget)?;
    let cm = build_model(inst, budget, rows);
    let opts = SolveOptions { relax: true, ..settings.options() };
    Ok(settings.solve(&cm.model, &opts).map_err(map_backend)?.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversarial::adv_continuous;
    use crate::fixtures::tiny_a;

    fn opts(strengthen: bool, warm_start: bool) -> CompactOptions {
        CompactOptions { strengthen, warm_start, settings: SolverSettings::default().with_gap(1e-9), ..Default::default() }
    }

    fn all_variants() -> Vec<CompactOptions> {
        let mut v = Vec::new();
        for s in [false, true] {
            for w in [false, true] {
                v.push(opts(s, w));
            }
        }
        v
    }

    #[test]
    fn tiny_a_values() {
        let inst = tiny_a();
        for o in all_variants() {
            let r0 = solve_compact(&inst, 0.0, &o).unwrap();
            assert!((r0.report.objective - 2.0).abs() < 1e-6);
            let r1 = solve_compact(&inst, 1.0, &o).unwrap();
            assert!((r1.report.objective - 5.0).abs() < 1e-6, "{}", r1.report.objective);
            assert_eq!(r1.ordering, Ordering::new(vec![0, 1]).unwrap());
            assert_eq!(r1.report.status, SolveStatus::Optimal);
            let r8 = solve_compact(&inst, 8.0, &o).unwrap();
            assert!((r8.report.objective - 7.0).abs() < 1e-6);
        }
    }

    #[test]
    fn solution_invariants() {
        let inst = tiny_a();
        let o = opts(true, false);
        for budget in [0.5, 1.0, 2.5] {
            let sol = solve_compact(&inst, budget, &o).unwrap();
            let mut obj = budget * sol.pi;
            for j in 0..inst.n() {
                for t in 0..inst.horizon {
                    let x = sol.x_frac.get(j, t);
                    assert!(sol.pi + sol.eta.get(j, t) >= inst.c_hat.get(j, t) * x - 1e-6);
                    obj += inst.c_lower.get(j, t) * x + sol.eta.get(j, t);
                }
            }
            assert!((obj - sol.report.objective).abs() < 1e-6);
            let adv = adv_continuous(&inst, &sol.ordering, budget, &o.settings).unwrap();
            assert!((adv.value - sol.report.objective).abs() < 1e-6);
        }
    }

    #[test]
    fn warm_start_tiny_a() {
        let inst = tiny_a();
        let ws = build_warm_start(&inst, 1.0, &SolverSettings::default()).unwrap();
        assert_eq!(ws.ordering, Ordering::new(vec![0, 1]).unwrap());
        assert_eq!(ws.x.get(0, 1), 1.0);
        assert_eq!(ws.x.get(1, 2), 1.0);
        assert_eq!(ws.eta.get(0, 1), 2.0);
        assert_eq!(ws.eta.get(1, 2), 3.0);
        assert_eq!(ws.eta.iter().sum::<f64>(), 5.0);
        assert_eq!(ws.objective, 7.0);
    }

    #[test]
    fn warm_start_without_deviation_is_nominal() {
        let mut inst = tiny_a();
        inst.c_hat = CostMatrix::zeros(2, 4);
        assert_eq!(build_warm_start(&inst, 1.0, &SolverSettings::default()).unwrap().objective, 2.0);
    }

    #[test]
    fn warm_start_single_activity() {
        let inst = Instance::new(
            vec![2],
            3,
            CostMatrix::from_rows(vec![vec![3.0, 1.0, 2.0]]).unwrap(),
            CostMatrix::from_rows(vec![vec![0.0, 4.0, 1.0]]).unwrap(),
        );
        let ws = build_warm_start(&inst, 1.0, &SolverSettings::default()).unwrap();
        assert_eq!(ws.objective, 5.0);
        let sol = solve_compact(&inst, 1.0, &opts(false, true)).unwrap();
        // delta splits as 0.4 at t=1 and 0.6 at t=2
        assert!((sol.report.objective - 2.6).abs() < 1e-6, "{}", sol.report.objective);
    }

    #[test]
    fn separation_examples() {
        let mut y = vec![vec![0.0; 3]; 3];
        y[0][1] = 1.0;
        y[1][2] = 1.0;
        y[2][0] = 1.0;
        assert!(separate_transitivity(&y, 1e-6).contains(&(0, 1, 2)));
        let ord = Ordering::new(vec![2, 0, 1]).unwrap();
        let prec: Vec<Vec<f64>> =
            ord.precedence_matrix().iter().map(|r| r.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).collect();
        assert!(separate_transitivity(&prec, 1e-6).is_empty());
        let mut y = vec![vec![0.0; 3]; 3];
        y[0][1] = 0.6;
        y[1][2] = 0.6;
        y[0][2] = 0.1;
        assert_eq!(separate_transitivity(&y, 1e-6), vec![(0, 1, 2)]);
    }

    #[test]
    fn root_bound_with_valid_inequalities_dominates() {
        let inst = tiny_a();
        let s = SolverSettings::default();
        let rows = CompactRows { capacity: true, eta_link: true, ..CompactRows::BASELINE };
        for budget in [0.0, 1.0, 2.0] {
            let base = root_lp_bound(&inst, budget, CompactRows::BASELINE, &s).unwrap();
            let strong = root_lp_bound(&inst, budget, rows, &s).unwrap();
            assert!(strong >= base - 1e-9);
        }
    }

    #[test]
    fn rejects_bad_budget() {
        assert!(matches!(solve_compact(&tiny_a(), -1.0, &opts(false, false)), Err(Error::InvalidArgument(_))));
    }
}
