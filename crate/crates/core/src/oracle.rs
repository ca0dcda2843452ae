//! Brute-force solvers for small instances.
//!
//! Every routine here enumerates explicitly and shares no model with the
//! dual embeddings, so it can serve as ground truth in tests.

use crate::deterministic::solve_second_stage_dp;
use crate::error::{Error, Result};
use crate::mip::{BackendError, Cmp, LinearModel, ObjSense, SolverSettings, VarId};
use crate::model::{CostMatrix, Instance, Ordering, Schedule, UncertaintyKind, VALUE_TOL};

/// Enumeration limits. Exceeding one is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Chain-feasible schedules per ordering.
    pub schedules: u128,
    /// Discrete scenarios per ordering.
    pub scenarios: u128,
    /// Largest `n` for the two-stage enumeration over orderings.
    pub max_n: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { schedules: 1_000_000, scenarios: 1_000_000, max_n: 7 }
    }
}

/// Number of start-time tuples respecting the chain of `ord`.
pub fn count_schedules(inst: &Instance, ord: &Ordering) -> u128 {
    let horizon = inst.horizon;
    let perm = ord.perm();
    if perm.is_empty() {
        return 1;
    }
    // ways[t] = tuples for the prefix ending with the current activity at t
    let mut ways = vec![1u128; horizon];
    for k in 1..perm.len() {
        let d_prev = inst.duration(perm[k - 1]);
        let mut prefix = 0u128;
        let mut next = vec![0u128; horizon];
        for t in 0..horizon {
            if t >= d_prev {
                prefix = prefix.saturating_add(ways[t - d_prev]);
            }
            next[t] = prefix;
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// All start-time tuples with `t_next >= t_prev + d_prev` along the chain of `ord`.
pub fn enumerate_schedules(inst: &Instance, ord: &Ordering, caps: &OracleCaps) -> Result<Vec<Schedule>> {
    if ord.len() != inst.n() {
        return Err(Error::InvalidOrdering(format!("ordering has {} activities, instance {}", ord.len(), inst.n())));
    }
    let count = count_schedules(inst, ord);
    if count > caps.schedules {
        return Err(Error::CapExceeded { what: "schedules", needed: count, cap: caps.schedules });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut start = vec![0; inst.n()];
    fn rec(inst: &Instance, perm: &[usize], k: usize, earliest: usize, start: &mut [usize], out: &mut Vec<Schedule>) {
        if k == perm.len() {
            out.push(Schedule::new(start.to_vec()));
            return;
        }
        for t in earliest..inst.horizon {
            start[perm[k]] = t;
            rec(inst, perm, k + 1, t + inst.duration(perm[k]), start, out);
        }
    }
    rec(inst, ord.perm(), 0, 0, &mut start, &mut out);
    Ok(out)
}

/// Continuous worst case as one LP over enumerated schedules:
/// `max z` s.t. `z <= sum_j (c_lower + c_hat delta)_{j, s_j}` for every schedule `s`,
/// `0 <= delta <= 1`, `sum delta <= budget`.
pub fn adv_continuous_epigraph(
    inst: &Instance,
    ord: &Ordering,
    budget: f64,
    caps: &OracleCaps,
    settings: &SolverSettings,
) -> Result<f64> {
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget {budget} must be a finite nonnegative number")));
    }
    let schedules = enumerate_schedules(inst, ord, caps)?;
    if schedules.is_empty() {
        return Err(Error::Infeasible(format!("ordering {ord} does not fit horizon {}", inst.horizon)));
    }
    let mut m = LinearModel::new(ObjSense::Maximize);
    let z = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let delta: Vec<Vec<VarId>> =
        (0..inst.n()).map(|_| (0..inst.horizon).map(|_| m.add_continuous(0.0, 1.0, 0.0)).collect()).collect();
    m.add_row(delta.iter().flatten().map(|&v| (v, 1.0)).collect(), Cmp::Le, budget, "budget");
    for s in &schedules {
        let mut terms = vec![(z, 1.0)];
        let mut rhs = 0.0;
        for (j, &t) in s.start.iter().enumerate() {
            rhs += inst.c_lower.get(j, t);
            let dev = inst.c_hat.get(j, t);
            if dev != 0.0 {
                terms.push((delta[j][t], -dev));
            }
        }
        m.add_row(terms, Cmp::Le, rhs, "epigraph");
    }
    let res = settings.solve(&m, &settings.options()).map_err(|e| match e {
        BackendError::Infeasible | BackendError::Unbounded => Error::Infeasible("epigraph LP has no finite optimum".into()),
        e => e.into(),
    })?;
    Ok(res.objective)
}

fn binomial_prefix_sum(n: u128, k: u128) -> u128 {
    let mut total = 0u128;
    let mut term = 1u128;
    for i in 0..=k.min(n) {
        if i > 0 {
            term = term.saturating_mul(n - i + 1) / i;
        }
        total = total.saturating_add(term);
    }
    total
}

/// Discrete worst case by enumerating every 0/1 `delta` with at most `budget`
/// ones and evaluating the second stage by DP.
///
/// Entries with `c_hat = 0` cannot change any cost, so only the others are
/// enumerated. Returns the value and a maximizing `delta`.
pub fn adv_discrete_enumerate(
    inst: &Instance,
    ord: &Ordering,
    budget: u64,
    caps: &OracleCaps,
) -> Result<(f64, CostMatrix)> {
    let cells: Vec<(usize, usize)> = (0..inst.n())
        .flat_map(|j| (0..inst.horizon).map(move |t| (j, t)))
        .filter(|&(j, t)| inst.c_hat.get(j, t) != 0.0)
        .collect();
    let k = (budget as usize).min(cells.len());
    let count = binomial_prefix_sum(cells.len() as u128, k as u128);
    if count > caps.scenarios {
        return Err(Error::CapExceeded { what: "scenarios", needed: count, cap: caps.scenarios });
    }
    let mut costs = inst.c_lower.clone();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    fn rec(
        inst: &Instance,
        ord: &Ordering,
        cells: &[(usize, usize)],
        from: usize,
        left: usize,
        costs: &mut CostMatrix,
        chosen: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) -> Result<()> {
        let (v, _) = solve_second_stage_dp(inst, costs, ord)?;
        if v > best.0 {
            *best = (v, chosen.clone());
        }
        if left == 0 {
            return Ok(());
        }
        for c in from..cells.len() {
            let (j, t) = cells[c];
            let base = costs.get(j, t);
            costs.set(j, t, base + inst.c_hat.get(j, t));
            chosen.push(c);
            rec(inst, ord, cells, c + 1, left - 1, costs, chosen, best)?;
            chosen.pop();
            costs.set(j, t, base);
        }
        Ok(())
    }
    rec(inst, ord, &cells, 0, k, &mut costs, &mut chosen, &mut best)?;
    let mut delta = CostMatrix::zeros(inst.n(), inst.horizon);
    for &c in &best.1 {
        delta.set(cells[c].0, cells[c].1, 1.0);
    }
    Ok((best.0, delta))
}

/// Min over all orderings of the matching adversarial oracle. Orderings that
/// cannot fit the horizon are skipped; ties go to the lexicographically
/// smallest permutation.
pub fn oracle_two_stage(
    inst: &Instance,
    budget: f64,
    kind: UncertaintyKind,
    caps: &OracleCaps,
    settings: &SolverSettings,
) -> Result<(f64, Ordering)> {
    inst.ensure_valid()?;
    let n = inst.n();
    if n > caps.max_n {
        let needed = (1..=n as u128).fold(1u128, |a, b| a.saturating_mul(b));
        let cap = (1..=caps.max_n as u128).product();
        return Err(Error::CapExceeded { what: "orderings", needed, cap });
    }
    if kind == UncertaintyKind::Discrete && (budget < 0.0 || budget.fract() != 0.0 || !budget.is_finite()) {
        return Err(Error::InvalidArgument(format!("discrete budget {budget} must be a nonnegative integer")));
    }
    let mut best: Option<(f64, Ordering)> = None;
    for ord in Ordering::all(n) {
        if !ord.fits(inst) {
            continue;
        }
        let v = match kind {
            UncertaintyKind::Continuous => adv_continuous_epigraph(inst, &ord, budget, caps, settings)?,
            UncertaintyKind::Discrete => adv_discrete_enumerate(inst, &ord, budget as u64, caps)?.0,
        };
        if best.as_ref().map_or(true, |(b, _)| v < b - VALUE_TOL * 1e-3) {
            best = Some((v, ord));
        }
    }
    best.ok_or_else(|| Error::Infeasible("no ordering fits the horizon".into()))
}
