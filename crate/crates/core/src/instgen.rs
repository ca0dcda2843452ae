//! Reproducible random instances and the 3-partition fixture builder.
//!
//! # Random stream
//!
//! Generation is a pure function of `(n, seed, params)`. Three sub-seeds are
//! taken from a SplitMix64 sequence started at `seed`; each seeds its own
//! Xoshiro256++ generator (state filled by SplitMix64, as in
//! `rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`):
//!
//! 1. durations, drawn for `j = 0..n`,
//! 2. execution costs `w`, drawn row-major over `(j, t)`,
//! 3. deviations `c_hat`, drawn row-major over `(j, t)`.
//!
//! An integer in `[lo, hi]` is drawn as `lo + x % span` with `span = hi - lo + 1`,
//! rejecting raw 64-bit outputs `x >= span * floor(2^64 / span)` so the draw is
//! unbiased. The horizon is `ceil(horizon_factor * sum(d))`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{execution_to_start_costs, CostMatrix, Instance, InstanceMeta};

pub const GENERATOR_NAME: &str = "robsched-instgen-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub d_range: (u32, u32),
    pub w_range: (u32, u32),
    pub chat_range: (u32, u32),
    pub horizon_factor: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { d_range: (1, 5), w_range: (1, 9), chat_range: (1, 5), horizon_factor: 1.2 }
    }
}

struct Stream(Xoshiro256PlusPlus);

impl Stream {
    fn uniform(&mut self, lo: u32, hi: u32) -> u32 {
        let span = (hi - lo) as u64 + 1;
        let zone = (u64::MAX / span) * span;
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return lo + (x % span) as u32;
            }
        }
    }
}

fn streams(seed: u64) -> [Stream; 3] {
    let mut sm = SplitMix64::seed_from_u64(seed);
    [(); 3].map(|_| Stream(Xoshiro256PlusPlus::seed_from_u64(sm.next_u64())))
}

/// `ceil(x)` that ignores floating noise just above an integer.
fn ceil_tol(x: f64) -> u64 {
    (x - 1e-9).ceil().max(0.0) as u64
}

/// Draws a random instance following the benchmark protocol: durations
/// `U[1,5]`, horizon `ceil(1.2 * sum d)`, execution costs `U[1,9]` turned
/// into start costs by window summation, deviations `U[1,5]`.
pub fn generate(n: usize, seed: u64, params: &GenParams) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    for (name, (lo, hi)) in [("d_range", params.d_range), ("w_range", params.w_range), ("chat_range", params.chat_range)] {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("{name} [{lo}, {hi}] is empty")));
        }
    }
    if params.d_range.0 == 0 {
        return Err(Error::InvalidArgument("durations must be at least 1".into()));
    }
    if !(params.horizon_factor >= 1.0) {
        return Err(Error::InvalidArgument(format!("horizon factor {} below 1", params.horizon_factor)));
    }
    let [mut ds, mut ws, mut cs] = streams(seed);
    let durations: Vec<u32> = (0..n).map(|_| ds.uniform(params.d_range.0, params.d_range.1)).collect();
    let total: u64 = durations.iter().map(|&d| d as u64).sum();
    let horizon = ceil_tol(params.horizon_factor * total as f64) as usize;
    let mut w = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in 0..horizon {
            w.set(j, t, ws.uniform(params.w_range.0, params.w_range.1) as f64);
        }
    }
    let mut c_hat = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in 0..horizon {
            c_hat.set(j, t, cs.uniform(params.chat_range.0, params.chat_range.1) as f64);
        }
    }
    let c_lower = execution_to_start_costs(&w, &durations, horizon)?;
    let inst = Instance {
        durations,
        horizon,
        c_lower,
        c_hat,
        w: Some(w),
        meta: InstanceMeta { seed: Some(seed), generator: Some(GENERATOR_NAME.into()), u_level: None },
    };
    inst.ensure_valid()?;
    Ok(inst)
}

/// Uncertainty budget `ceil(u/100 * n)` for an uncertainty level `u` in percent.
pub fn gamma_from_level(n: usize, u_percent: f64) -> Result<u64> {
    if !(0.0..=100.0).contains(&u_percent) {
        return Err(Error::InvalidArgument(format!("uncertainty level {u_percent} outside [0, 100]")));
    }
    Ok(ceil_tol(u_percent * n as f64 / 100.0))
}

/// Scheduling instance encoding the 3-partition question for `sizes` with `m`
/// groups: `d_j = a_j`, `T = sum a + m + 1`, and execution cost 1 exactly at
/// the slots `k (A + 1)`, `A = sum a / m`. No deviations.
///
/// A zero-cost schedule exists iff the sizes split into `m` groups of sum `A`.
pub fn three_partition_instance(sizes: &[u32], m: usize) -> Result<Instance> {
    if m == 0 || sizes.len() != 3 * m {
        return Err(Error::InvalidArgument(format!("need 3m = {} sizes, got {}", 3 * m, sizes.len())));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let total: usize = sizes.iter().map(|&a| a as usize).sum();
    if total % m != 0 {
        return Err(Error::InvalidArgument(format!("sum {total} is not divisible by m = {m}")));
    }
    let target = total / m;
    let horizon = total + m + 1;
    let n = sizes.len();
    let mut w = CostMatrix::zeros(n, horizon);
    for j in 0..n {
        for t in (0..horizon).step_by(target + 1) {
            w.set(j, t, 1.0);
        }
    }
    let c_lower = execution_to_start_costs(&w, sizes, horizon)?;
    let mut inst = Instance::new(sizes.to_vec(), horizon, c_lower, CostMatrix::zeros(n, horizon));
    inst.w = Some(w);
    inst.meta.generator = Some("three-partition".into());
    inst.ensure_valid()?;
    Ok(inst)
}
