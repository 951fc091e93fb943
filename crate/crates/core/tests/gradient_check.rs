#[path = "oracles/gradient.rs"]
mod gradient;

#[test]
fn analytic_gradients_match_finite_differences() {
    gradient::analytic_gradients_match_finite_differences();
}
