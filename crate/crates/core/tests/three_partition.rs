use robsched::deterministic::{solve_nominal, NominalMode};
use robsched::instgen::three_partition_instance;
use robsched::mip::SolverSettings;

fn nominal(sizes: &[u32], m: usize) -> f64 {
    let inst = three_partition_instance(sizes, m).unwrap();
    solve_nominal(&inst, NominalMode::Lower, &SolverSettings::default().with_gap(1e-9)).unwrap().objective
}

#[test]
fn yes_instances_cost_nothing() {
    assert_eq!(three_partition_instance(&[3, 3, 3, 3, 4, 4], 2).unwrap().horizon, 23);
    assert!(nominal(&[3, 3, 3, 3, 4, 4], 2).abs() < 1e-6);
    assert!(nominal(&[1, 1, 1, 1, 1, 1], 2).abs() < 1e-6);
    assert!(nominal(&[1, 1, 2, 1, 1, 2], 2).abs() < 1e-6);
}

#[test]
fn no_instance_pays() {
    // same total, but no split into two triples of 9
    assert!(nominal(&[3, 3, 3, 3, 3, 5], 2) >= 1.0 - 1e-6);
}

#[test]
fn malformed_input_is_rejected() {
    assert!(three_partition_instance(&[1, 2, 3, 4], 2).is_err());
    assert!(three_partition_instance(&[1, 1, 1, 1, 1, 2], 2).is_err());
}
