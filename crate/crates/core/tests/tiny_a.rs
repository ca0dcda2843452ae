mod common;

use robsched::bench::{evaluate_ordering, solve_method, Method, MethodOptions};
use robsched::fixtures::tiny_a;
use robsched::io::read_instance;
use robsched::oracle::{enumerate_schedules, oracle_two_stage, OracleCaps};
use robsched::{Ordering, UncertaintyKind};

use common::tight;

fn ord(p: &[usize]) -> Ordering {
    Ordering::new(p.to_vec()).unwrap()
}

fn solve(method: Method, gamma: f64, warm_start: bool, enrich_k: usize) -> robsched::SolveReport {
    let inst = read_instance(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tiny_a.json")).unwrap();
    solve_method(&inst, method, gamma, &MethodOptions { warm_start, enrich_k, settings: tight() }).unwrap()
}

#[test]
fn nominal_bounds() {
    assert!((solve(Method::NominalLb, 0.0, false, 0).objective - 2.0).abs() < 1e-6);
    assert!((solve(Method::NominalUb, 0.0, false, 0).objective - 7.0).abs() < 1e-6);
}

#[test]
fn robust_methods_agree_with_the_oracle() {
    let inst = tiny_a();
    let caps = OracleCaps::default();
    for gamma in [0.0, 1.0, 2.0, 3.0, 8.0] {
        let (cont, _) = oracle_two_stage(&inst, gamma, UncertaintyKind::Continuous, &caps, &tight()).unwrap();
        let (disc, _) = oracle_two_stage(&inst, gamma, UncertaintyKind::Discrete, &caps, &tight()).unwrap();
        for m in [Method::Compact, Method::CompactStr] {
            assert!((solve(m, gamma, true, 0).objective - cont).abs() < 1e-6, "{m} {gamma}");
        }
        for m in [Method::Iterative, Method::IterativeStr] {
            assert!((solve(m, gamma, false, 2).objective - disc).abs() < 1e-6, "{m} {gamma}");
        }
    }
}

#[test]
fn reference_values() {
    let r = solve(Method::Compact, 1.0, false, 0);
    assert!((r.objective - 5.0).abs() < 1e-6);
    assert_eq!(r.ordering, ord(&[0, 1]));
    assert!((solve(Method::Iterative, 1.0, false, 0).objective - 5.0).abs() < 1e-6);
    assert!((solve(Method::Compact, 8.0, false, 0).objective - 7.0).abs() < 1e-6);
    assert!((solve(Method::Iterative, 8.0, false, 0).objective - 7.0).abs() < 1e-6);
    let e = evaluate_ordering(&tiny_a(), &ord(&[1, 0]), 1.0, &tight()).unwrap();
    assert_eq!((e.lb, e.cont, e.disc), (4.0, 6.0, Some(6.0)));
    let e = evaluate_ordering(&tiny_a(), &ord(&[0, 1]), 1.0, &tight()).unwrap();
    assert_eq!((e.lb, e.cont, e.disc), (2.0, 5.0, Some(5.0)));
}

#[test]
fn schedule_counts() {
    let inst = tiny_a();
    let caps = OracleCaps::default();
    assert_eq!(enumerate_schedules(&inst, &ord(&[0, 1]), &caps).unwrap().len(), 6);
    assert_eq!(enumerate_schedules(&inst, &ord(&[1, 0]), &caps).unwrap().len(), 3);
}
