//! Worst-case scenarios for a fixed ordering.
//!
//! The inner minimization is replaced by its LP dual, so the adversary
//! maximizes `sum alpha - sum gamma` jointly over the dual variables and the
//! deviations `delta`. With `delta` in `[0, 1]` this is an LP; with binary
//! `delta` it is a MIP.

use crate::deterministic::solve_second_stage_dp;
use crate::error::{Error, Result};
use crate::mip::{BackendError, BackendStatus, Cmp, Constraint, LinearModel, ObjSense, SolverSettings, VarId};
use crate::model::{CostMatrix, Instance, Ordering, Scenario, SolveStatus, UncertaintyKind};

#[derive(Debug, Clone)]
pub struct AdversarialResult {
    /// Worst-case second-stage cost (incumbent value if time-limited).
    pub value: f64,
    /// Upper bound on the worst case; equals `value` when optimal.
    pub bound: f64,
    pub status: SolveStatus,
    pub scenario: Scenario,
    /// `(alpha, gamma)` at the optimum of the continuous LP.
    pub duals: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

struct DualEmbedding {
    model: LinearModel,
    alpha: Vec<VarId>,
    gamma: Vec<Vec<VarId>>,
    delta: Vec<Vec<VarId>>,
}

/// Builds `max sum alpha - sum gamma` subject to
/// `alpha_j - load_jt(gamma) - c_hat_jt delta_jt <= c_lower_jt` and `sum delta <= budget`,
/// with the chain precedences of `ord`.
fn dual_embedding(inst: &Instance, ord: &Ordering, budget: f64, binary: bool) -> DualEmbedding {
    let (n, horizon) = (inst.n(), inst.horizon);
    let mut m = LinearModel::new(ObjSense::Maximize);
    let alpha: Vec<VarId> = (0..n).map(|_| m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, 1.0)).collect();
    let pairs: Vec<(usize, usize)> = ord.chain().collect();
    let gamma: Vec<Vec<VarId>> =
        pairs.iter().map(|_| (0..horizon).map(|_| m.add_continuous(0.0, f64::INFINITY, -1.0)).collect()).collect();
    let delta: Vec<Vec<VarId>> = (0..n)
        .map(|_| {
            (0..horizon)
                .map(|_| if binary { m.add_binary(0.0) } else { m.add_continuous(0.0, 1.0, 0.0) })
                .collect()
        })
        .collect();
    for j in 0..n {
        for t in 0..horizon {
            let mut terms = vec![(alpha[j], 1.0)];
            for (k, &(a, b)) in pairs.iter().enumerate() {
                if a == j {
                    terms.extend(gamma[k][..=t].iter().map(|&g| (g, -1.0)));
                }
                if b == j {
                    let from = (t + 1).saturating_sub(inst.duration(a));
                    terms.extend(gamma[k][from..].iter().map(|&g| (g, -1.0)));
                }
            }
            let dev = inst.c_hat.get(j, t);
            if dev != 0.0 {
                terms.push((delta[j][t], -dev));
            }
            m.add_row(terms, Cmp::Le, inst.c_lower.get(j, t), "dual-cost");
        }
    }
    let all_delta = delta.iter().flatten().map(|&d| (d, 1.0)).collect();
    m.add_row(all_delta, Cmp::Le, budget, "budget");
    DualEmbedding { model: m, alpha, gamma, delta }
}

fn check_inputs(inst: &Instance, ord: &Ordering, budget: f64) -> Result<()> {
    if ord.len() != inst.n() {
        return Err(Error::InvalidOrdering(format!("ordering has {} activities, instance {}", ord.len(), inst.n())));
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget {budget} must be a finite nonnegative number")));
    }
    if !ord.fits(inst) {
        return Err(Error::Infeasible(format!("ordering {ord} does not fit horizon {}", inst.horizon)));
    }
    Ok(())
}

fn map_backend(e: BackendError) -> Error {
    match e {
        // the dual of an infeasible second stage is unbounded
        BackendError::Unbounded | BackendError::Infeasible => Error::Infeasible("adversarial problem has no finite optimum".into()),
        e => e.into(),
    }
}

fn read_delta(emb: &DualEmbedding, values: &[f64], round: bool) -> CostMatrix {
    let n = emb.delta.len();
    let horizon = emb.delta.first().map_or(0, Vec::len);
    let mut delta = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in 0..horizon {
            let v = values[emb.delta[j][t].0].clamp(0.0, 1.0);
            delta.set(j, t, if round { v.round() } else { v });
        }
    }
    delta
}

/// Worst case over the continuous budgeted set (an LP).
pub fn adv_continuous(inst: &Instance, ord: &Ordering, budget: f64, settings: &SolverSettings) -> Result<AdversarialResult> {
    check_inputs(inst, ord, budget)?;
    let emb = dual_embedding(inst, ord, budget, false);
    let res = settings.solve(&emb.model, &settings.options()).map_err(map_backend)?;
    let delta = read_delta(&emb, &res.values, false);
    let alpha = emb.alpha.iter().map(|&a| res.value(a)).collect();
    let gamma = emb.gamma.iter().map(|row| row.iter().map(|&g| res.value(g)).collect()).collect();
    Ok(AdversarialResult {
        value: res.objective,
        bound: res.objective,
        status: SolveStatus::Optimal,
        scenario: Scenario { delta, kind: UncertaintyKind::Continuous, budget },
        duals: Some((alpha, gamma)),
    })
}

fn integer_budget(budget: f64) -> Result<f64> {
    if budget < 0.0 || budget.fract() != 0.0 || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("discrete budget {budget} must be a nonnegative integer")));
    }
    Ok(budget)
}

/// Worst case over the discrete budgeted set (a MIP on the dual embedding).
///
/// On a time limit the incumbent value is returned with status
/// [`SolveStatus::TimeLimit`]; it is a valid lower bound on the true worst case.
pub fn adv_discrete(inst: &Instance, ord: &Ordering, budget: f64, settings: &SolverSettings) -> Result<AdversarialResult> {
    let mut ranked = adv_discrete_ranked(inst, ord, budget, 1, settings)?;
    Ok(ranked.remove(0))
}

/// The `k` best pairwise distinct discrete scenarios (at least one), best first.
///
/// The backend has no solution pool, so each further scenario comes from a
/// re-solve with a no-good cut excluding every `delta` already returned.
pub fn adv_discrete_ranked(
    inst: &Instance,
    ord: &Ordering,
    budget: f64,
    k: usize,
    settings: &SolverSettings,
) -> Result<Vec<AdversarialResult>> {
    check_inputs(inst, ord, budget)?;
    let budget = integer_budget(budget)?;
    let mut emb = dual_embedding(inst, ord, budget, true);
    let mut out: Vec<AdversarialResult> = Vec::new();
    let start = std::time::Instant::now();
    while out.len() < k.max(1) {
        let remaining = settings.time_limit - start.elapsed().as_secs_f64();
        if !out.is_empty() && remaining <= 0.0 {
            break;
        }
        let opts = crate::mip::SolveOptions { time_limit: remaining.max(1e-3), ..settings.options() };
        let res = match settings.solve(&emb.model, &opts) {
            Ok(r) => r,
            // the scenario space is exhausted or the budget ran out
            Err(_) if !out.is_empty() => break,
            Err(e) => return Err(map_backend(e)),
        };
        let delta = read_delta(&emb, &res.values, true);
        let status = match res.status {
            BackendStatus::Optimal => SolveStatus::Optimal,
            BackendStatus::TimeLimit => SolveStatus::TimeLimit,
        };
        // exact value of the rounded scenario
        let costs = inst.realize(&Scenario { delta: delta.clone(), kind: UncertaintyKind::Discrete, budget })?;
        let (value, _) = solve_second_stage_dp(inst, &costs, ord)?;
        let no_good: Vec<(VarId, f64)> = emb
            .delta
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(t, &v)| (j, t, v)))
            .map(|(j, t, v)| (v, if delta.get(j, t) > 0.5 { -1.0 } else { 1.0 }))
            .collect();
        let ones = delta.iter().filter(|&d| d > 0.5).count() as f64;
        emb.model.add_constraint(Constraint::new(no_good, Cmp::Ge, 1.0 - ones, "no-good"));
        out.push(AdversarialResult {
            value,
            bound: res.best_bound.max(value),
            status,
            scenario: Scenario { delta, kind: UncertaintyKind::Discrete, budget },
            duals: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::tiny_a;

    fn ord(p: &[usize]) -> Ordering {
        Ordering::new(p.to_vec()).unwrap()
    }

    fn settings() -> SolverSettings {
        SolverSettings::default().with_gap(1e-9)
    }

    #[test]
    fn continuous_tiny_a() {
        let inst = tiny_a();
        let s = settings();
        let r0 = adv_continuous(&inst, &ord(&[0, 1]), 0.0, &s).unwrap();
        assert!((r0.value - 2.0).abs() < 1e-6);
        let r1 = adv_continuous(&inst, &ord(&[0, 1]), 1.0, &s).unwrap();
        assert!((r1.value - 5.0).abs() < 1e-6, "{}", r1.value);
        assert!(r1.scenario.is_admissible(1e-6));
        let r2 = adv_continuous(&inst, &ord(&[1, 0]), 1.0, &s).unwrap();
        assert!((r2.value - 6.0).abs() < 1e-6, "{}", r2.value);
    }

    #[test]
    fn continuous_scenario_reproduces_value() {
        let inst = tiny_a();
        for p in [[0, 1], [1, 0]] {
            for budget in [0.5, 1.0, 1.5, 3.0] {
                let r = adv_continuous(&inst, &ord(&p), budget, &settings()).unwrap();
                let costs = inst.realize(&r.scenario).unwrap();
                let (v, _) = solve_second_stage_dp(&inst, &costs, &ord(&p)).unwrap();
                assert!((v - r.value).abs() < 1e-6, "{p:?} {budget}: {v} vs {}", r.value);
            }
        }
    }

    #[test]
    fn discrete_tiny_a() {
        let inst = tiny_a();
        let s = settings();
        let r = adv_discrete(&inst, &ord(&[0, 1]), 1.0, &s).unwrap();
        assert!((r.value - 5.0).abs() < 1e-6);
        assert_eq!(r.scenario.support(), vec![(1, 2)]);
        assert_eq!(r.status, SolveStatus::Optimal);
        let r = adv_discrete(&inst, &ord(&[1, 0]), 1.0, &s).unwrap();
        assert!((r.value - 6.0).abs() < 1e-6);
        let r = adv_discrete(&inst, &ord(&[1, 0]), 0.0, &s).unwrap();
        assert!((r.value - 4.0).abs() < 1e-6);
    }

    #[test]
    fn discrete_rejects_fractional_budget() {
        let inst = tiny_a();
        assert!(matches!(adv_discrete(&inst, &ord(&[0, 1]), 1.5, &settings()), Err(Error::InvalidArgument(_))));
        assert!(matches!(adv_continuous(&inst, &ord(&[0, 1]), -1.0, &settings()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ranked_scenarios_are_distinct_and_sorted() {
        let inst = tiny_a();
        let ranked = adv_discrete_ranked(&inst, &ord(&[0, 1]), 1.0, 4, &settings()).unwrap();
        assert_eq!(ranked.len(), 4);
        for w in ranked.windows(2) {
            assert!(w[0].value >= w[1].value - 1e-9);
        }
        for a in 0..ranked.len() {
            for b in (a + 1)..ranked.len() {
                assert_ne!(ranked[a].scenario.delta, ranked[b].scenario.delta);
            }
        }
    }

    #[test]
    fn infeasible_ordering_is_an_error() {
        let inst = Instance::new(vec![3, 1], 3, CostMatrix::zeros(2, 3), CostMatrix::filled(2, 3, 1.0));
        assert!(matches!(adv_continuous(&inst, &ord(&[0, 1]), 1.0, &settings()), Err(Error::Infeasible(_))));
    }
}
