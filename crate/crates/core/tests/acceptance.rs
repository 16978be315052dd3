//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p laufer --test acceptance -- --nocapture`.

use laufer::selftest::{self, CriterionOutcome};

fn report(outcomes: &[CriterionOutcome]) -> bool {
    for o in outcomes {
        println!("{}", o.line());
    }
    outcomes.iter().all(|o| o.passed)
}

#[test]
fn acceptance() {
    let outcomes = vec![
        selftest::criterion_quadratic_ferrari(),
        selftest::criterion_zero_potential(),
        selftest::criterion_route_equivalence(),
        selftest::criterion_derivative_identities(),
        selftest::criterion_window_identity(),
        selftest::criterion_gluing_exact(),
        selftest::criterion_gluing_obstruction_float(),
        selftest::criterion_stratified_family(),
        selftest::criterion_float_numerics(),
        selftest::criterion_oracle_stability(),
    ];
    let extra = vec![selftest::criterion_general_ferrari()];
    let primary = report(&outcomes);
    let supplementary = report(&extra);
    assert!(primary && supplementary, "some acceptance criteria failed");
}
