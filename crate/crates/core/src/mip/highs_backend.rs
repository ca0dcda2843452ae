use std::time::Instant;

use highs::{Col, HighsModelStatus, HighsSolutionStatus, Model, RowProblem, Sense};

use super::{
    BackendError, BackendResult, BackendStatus, Cmp, Constraint, LinearModel, MipBackend, ObjSense, SolveOptions,
    VarKind,
};

/// HiGHS, linked statically through the `highs` crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

struct Built {
    model: Model,
    cols: Vec<Col>,
}

fn build(lm: &LinearModel, relax: bool) -> Built {
    let mut pb = RowProblem::default();
    let cols: Vec<Col> = lm
        .vars()
        .iter()
        .map(|v| {
            let integer = v.kind == VarKind::Binary && !relax;
            pb.add_column_with_integrality(v.obj, v.lower..=v.upper, integer)
        })
        .collect();
    for c in lm.constraints() {
        add_row_to_problem(&mut pb, &cols, c);
    }
    let sense = match lm.sense {
        ObjSense::Minimize => Sense::Minimise,
        ObjSense::Maximize => Sense::Maximise,
    };
    Built { model: pb.optimise(sense), cols }
}

fn factors<'a>(cols: &'a [Col], c: &'a Constraint) -> impl Iterator<Item = (Col, f64)> + 'a {
    c.terms.iter().map(move |&(v, a)| (cols[v.0], a))
}

fn add_row_to_problem(pb: &mut RowProblem, cols: &[Col], c: &Constraint) {
    match c.cmp {
        Cmp::Le => pb.add_row(..=c.rhs, factors(cols, c)),
        Cmp::Ge => pb.add_row(c.rhs.., factors(cols, c)),
        Cmp::Eq => pb.add_row(c.rhs..=c.rhs, factors(cols, c)),
    };
}

fn add_row_to_model(m: &mut Model, cols: &[Col], c: &Constraint) {
    match c.cmp {
        Cmp::Le => m.add_row(..=c.rhs, factors(cols, c)),
        Cmp::Ge => m.add_row(c.rhs.., factors(cols, c)),
        Cmp::Eq => m.add_row(c.rhs..=c.rhs, factors(cols, c)),
    };
}

fn configure(m: &mut Model, opts: &SolveOptions, time_limit: f64) {
    m.set_option("time_limit", time_limit.max(1e-3));
    m.set_option("mip_rel_gap", opts.rel_gap_target);
    m.set_option("mip_abs_gap", 1e-9_f64);
    m.set_option("threads", opts.threads as i32);
    m.set_option("random_seed", 0);
}

struct RunOutcome {
    status: BackendStatus,
    objective: f64,
    bound: f64,
    values: Vec<f64>,
    duals: Vec<f64>,
}

fn run(mut model: Model, is_mip: bool, sense: ObjSense) -> Result<(RunOutcome, Model), BackendError> {
    let solved = model_solve(&mut model)?;
    let status = solved.status();
    let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
    let status = match status {
        HighsModelStatus::Optimal => BackendStatus::Optimal,
        HighsModelStatus::ModelEmpty => BackendStatus::Optimal,
        HighsModelStatus::ReachedTimeLimit
        | HighsModelStatus::ReachedIterationLimit
        | HighsModelStatus::ReachedInterrupt
        | HighsModelStatus::ReachedSolutionLimit
        | HighsModelStatus::ReachedMemoryLimit => {
            if has_primal {
                BackendStatus::TimeLimit
            } else {
                return Err(BackendError::NoIncumbent);
            }
        }
        HighsModelStatus::Infeasible => return Err(BackendError::Infeasible),
        HighsModelStatus::Unbounded => return Err(BackendError::Unbounded),
        HighsModelStatus::UnboundedOrInfeasible => {
            // Presolve could not tell; rerun without it.
            let mut m: Model = solved.into();
            m.set_option("presolve", "off");
            let again = model_solve(&mut m)?;
            return match again.status() {
                HighsModelStatus::Infeasible => Err(BackendError::Infeasible),
                HighsModelStatus::Unbounded => Err(BackendError::Unbounded),
                s => Err(BackendError::Failure(format!("unbounded or infeasible ({s:?})"))),
            };
        }
        s => return Err(BackendError::Failure(format!("HiGHS status {s:?}"))),
    };
    let objective = solved.objective_value();
    let bound = if is_mip {
        solved.double_info_value(c"mip_dual_bound").unwrap_or(objective)
    } else {
        objective
    };
    let bound = match (status, sense) {
        (BackendStatus::Optimal, ObjSense::Minimize) => bound.min(objective),
        (BackendStatus::Optimal, ObjSense::Maximize) => bound.max(objective),
        _ => bound,
    };
    let sol = solved.get_solution();
    let values = sol.columns().to_vec();
    let duals = sol.dual_rows().to_vec();
    Ok((RunOutcome { status, objective, bound, values, duals }, solved.into()))
}

// `Model::try_solve` consumes the model; keep ownership juggling in one place.
fn model_solve(model: &mut Model) -> Result<highs::SolvedModel, BackendError> {
    let m = std::mem::replace(model, RowProblem::default().optimise(Sense::Minimise));
    m.try_solve().map_err(|e| BackendError::Failure(format!("HiGHS run failed: {e:?}")))
}

impl MipBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn supports_duals(&self) -> bool {
        true
    }

    fn supports_pool(&self) -> bool {
        false
    }

    fn solve(&self, lm: &LinearModel, opts: &SolveOptions) -> Result<BackendResult, BackendError> {
        lm.check()?;
        opts.check()?;
        let start = Instant::now();
        let is_mip = lm.is_mip() && !opts.relax;

        let root_bound = if is_mip && opts.want_root_bound {
            let Built { mut model, .. } = build(lm, true);
            configure(&mut model, opts, opts.time_limit);
            match run(model, false, lm.sense) {
                Ok((RunOutcome { objective, status: BackendStatus::Optimal, .. }, _)) => Some(objective),
                Ok(_) => None,
                Err(BackendError::Infeasible) => return Err(BackendError::Infeasible),
                Err(_) => None,
            }
        } else {
            None
        };

        let Built { mut model, cols } = build(lm, opts.relax);
        configure(&mut model, opts, opts.time_limit - start.elapsed().as_secs_f64());
        if let Some(ws) = &opts.warm_start {
            if is_mip {
                let mut x: Vec<f64> =
                    lm.vars().iter().map(|v| if v.lower.is_finite() { v.lower } else { 0.0f64.min(v.upper) }).collect();
                for &(v, val) in ws {
                    if v.0 < x.len() {
                        x[v.0] = val;
                    }
                }
                if model.try_set_solution(Some(&x), None, None, None).is_err() {
                    log::debug!("HiGHS rejected the warm start");
                }
            }
        }

        let mut lazy_rows = 0;
        loop {
            let (outcome, back) = run(model, is_mip, lm.sense)?;
            let RunOutcome { status, objective, bound, values, duals } = outcome;
            model = back;
            let cuts = match (&opts.lazy_separator, is_mip) {
                (Some(sep), true) => sep(&values),
                _ => Vec::new(),
            };
            let elapsed = start.elapsed().as_secs_f64();
            if cuts.is_empty() || elapsed >= opts.time_limit {
                if !cuts.is_empty() {
                    // out of time with a candidate the separator rejects
                    return Err(BackendError::NoIncumbent);
                }
                return Ok(BackendResult {
                    status,
                    objective,
                    best_bound: bound,
                    root_bound: if is_mip { root_bound } else { Some(objective) },
                    values,
                    duals: (opts.want_duals && !is_mip).then_some(duals),
                    pool: None,
                    wall_time: elapsed,
                    lazy_rows,
                });
            }
            lazy_rows += cuts.len();
            for c in &cuts {
                add_row_to_model(&mut model, &cols, c);
            }
            configure(&mut model, opts, opts.time_limit - elapsed);
        }
    }
}
