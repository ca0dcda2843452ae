//! Two-stage robust single-machine scheduling with start-time dependent
//! costs under continuous and discrete budgeted uncertainty.
//!
//! The first stage fixes an order of the activities; once a cost scenario is
//! revealed, the second stage picks start times that respect that order. The
//! crate provides the nominal and second-stage solvers, the adversarial
//! (worst-case) problems, a compact MIP for continuous budgets, scenario
//! generation for discrete budgets, a brute-force oracle, an instance
//! generator and a benchmark harness.

pub mod adversarial;
pub mod bench;
pub mod compact;
pub mod deterministic;
pub mod error;
pub mod fixtures;
pub mod instgen;
pub mod io;
pub mod iterative;
pub mod mip;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{
    execution_to_start_costs, ordering_of_schedule, schedule_cost, validate_instance, CostMatrix, Instance,
    InstanceMeta, Ordering, Scenario, Schedule, SolveReport, SolveStatus, UncertaintyKind,
};
