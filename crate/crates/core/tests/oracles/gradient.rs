use std::time::Instant;

use radfp_core::model::check_tiny_configuration;

pub fn analytic_gradients_match_finite_differences() {
    let start = Instant::now();
    for seed in [1, 2, 3, 4, 5] {
        let report = check_tiny_configuration(seed).unwrap();
        assert_eq!(report.skipped, 0, "seed {seed}: parameters at a ReLU kink");
        assert!(report.parameters > 0);
        assert!(
            report.max_relative_error < 1e-4,
            "seed {seed}: max relative error {} at {:?} (analytic {}, numeric {})",
            report.max_relative_error,
            report.worst,
            report.analytic,
            report.numeric
        );
    }
    assert!(start.elapsed().as_secs() < 120, "took {:?}", start.elapsed());
}
