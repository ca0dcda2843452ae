//! Small canonical instances used by tests, the CLI and the C API.

use crate::model::{CostMatrix, Instance};

/// Two activities, `d = (1, 2)`, `T = 4`.
pub fn tiny_a() -> Instance {
    let c_lower = CostMatrix::from_rows(vec![vec![4.0, 1.0, 3.0, 2.0], vec![2.0, 5.0, 1.0, 4.0]]).unwrap();
    let c_hat = CostMatrix::from_rows(vec![vec![1.0, 2.0, 1.0, 1.0], vec![2.0, 1.0, 3.0, 1.0]]).unwrap();
    let mut inst = Instance::new(vec![1, 2], 4, c_lower, c_hat);
    inst.meta.generator = Some("tiny-a".into());
    inst
}
