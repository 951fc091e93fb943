//! The exact threshold sweep against a 10,001-point grid over T ∈ [0, 1].
//!
//! Relevance values sit just below multiples of 1/1000, so every mask the
//! exact sweep can produce is also produced by some grid point.

#[path = "oracles/threshold.rs"]
mod threshold;

#[test]
fn exact_sweep_matches_grid() {
    threshold::exact_sweep_matches_grid();
}
