#![allow(dead_code)]

use robsched::instgen::{generate, GenParams};
use robsched::mip::SolverSettings;
use robsched::{Instance, Ordering};

/// Durations in `{1, 2}` keep `T <= 10` for `n <= 4`.
pub const SMALL: GenParams = GenParams { d_range: (1, 2), w_range: (1, 9), chat_range: (1, 5), horizon_factor: 1.2 };

pub fn small(n: usize, seed: u64) -> Instance {
    generate(n, seed, &SMALL).unwrap()
}

pub fn medium(n: usize, seed: u64) -> Instance {
    let params = GenParams { d_range: (1, 3), ..GenParams::default() };
    generate(n, seed, &params).unwrap()
}

pub fn tight() -> SolverSettings {
    SolverSettings::default().with_gap(1e-9).with_time_limit(600.0)
}

/// A permutation of `0..n` derived from `seed` by a Fisher-Yates pass.
pub fn shuffled(n: usize, seed: u64) -> Ordering {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    for i in (1..n).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        perm.swap(i, (state % (i as u64 + 1)) as usize);
    }
    Ordering::new(perm).unwrap()
}
