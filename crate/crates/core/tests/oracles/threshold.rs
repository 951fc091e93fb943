//! The exact threshold sweep against a 10,001-point grid over T ∈ [0, 1].
//!
//! Relevance values sit just below multiples of 1/1000, so every mask the
//! exact sweep can produce is also produced by some grid point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radfp_core::model::{Classifier, InteractionMode};
use radfp_core::trainer::{sweep_threshold, RelevanceCase};

const GRID: usize = 10_000;
const DIM: usize = 60;

struct Case {
    features: Vec<f64>,
    relevance: Vec<f64>,
    label: u8,
}

fn random_set(seed: u64) -> (Classifier<f64>, Vec<Case>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = match seed % 3 {
        0 => InteractionMode::None,
        1 => InteractionMode::Full,
        _ => InteractionMode::TopM(12),
    };
    let mut c = Classifier::zeros(DIM, mode);
    c.bias[0] = rng.random_range(-0.5..0.5);
    c.linear.iter_mut().for_each(|t| *t = rng.random_range(-1.0..1.0));
    c.pairwise.iter_mut().for_each(|t| *t = rng.random_range(-0.1..0.1));
    let n = rng.random_range(12..=30);
    // A small pool of relevance levels makes ties across studies common.
    let pool: Vec<f64> = (0..40).map(|_| rng.random_range(1..=1000) as f64 / 1000.0 - 2e-5).collect();
    let cases = (0..n)
        .map(|i| Case {
            features: (0..DIM).map(|_| rng.random_range(-2.0..2.0)).collect(),
            relevance: (0..DIM).map(|_| pool[rng.random_range(0..pool.len())]).collect(),
            label: if i < 2 { i as u8 } else { rng.random_range(0..=1) },
        })
        .collect();
    (c, cases)
}

/// Direct logit with features below T removed.
fn masked_logit(c: &Classifier<f64>, case: &Case, t: f64) -> f64 {
    let x: Vec<f64> =
        case.features.iter().zip(&case.relevance).map(|(&f, &q)| if q >= t { f } else { 0.0 }).collect();
    let active = c.active_set(&case.relevance);
    c.logit(&x, &active).unwrap()
}

fn youden_of(predictions: &[bool], cases: &[Case]) -> f64 {
    let (mut tp, mut fn_, mut tn, mut fp) = (0.0, 0.0, 0.0, 0.0);
    for (&p, c) in predictions.iter().zip(cases) {
        match (c.label, p) {
            (1, true) => tp += 1.0,
            (1, false) => fn_ += 1.0,
            (_, false) => tn += 1.0,
            (_, true) => fp += 1.0,
        }
    }
    tp / (tp + fn_) + tn / (tn + fp) - 1.0
}

fn grid_oracle(c: &Classifier<f64>, cases: &[Case]) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut kept: Vec<usize> = vec![usize::MAX; cases.len()];
    let mut pred = vec![false; cases.len()];
    for g in 0..=GRID {
        let t = g as f64 / GRID as f64;
        for (k, case) in cases.iter().enumerate() {
            // Recompute only when this study's mask changes.
            let count = case.relevance.iter().filter(|&&q| q >= t).count();
            if count != kept[k] {
                kept[k] = count;
                pred[k] = masked_logit(c, case, t) >= 0.0;
            }
        }
        let j = youden_of(&pred, cases);
        if j > best.1 {
            best = (t, j);
        }
    }
    best
}

pub fn exact_sweep_matches_grid() {
    let mut nontrivial = 0;
    for seed in 0..10 {
        let (c, cases) = random_set(seed);
        let inputs: Vec<RelevanceCase<'_, f64>> = cases
            .iter()
            .map(|s| RelevanceCase { features: &s.features, relevance: s.relevance.clone(), label: s.label })
            .collect();
        let exact = sweep_threshold(&c, &inputs).unwrap();
        let (grid_t, grid_j) = grid_oracle(&c, &cases);
        assert!((exact.youden - grid_j).abs() < 1e-12, "seed {seed}: youden {} vs grid {grid_j}", exact.youden);
        // Same mask: no relevance value separates the two thresholds.
        let (lo, hi) = if exact.threshold <= grid_t { (exact.threshold, grid_t) } else { (grid_t, exact.threshold) };
        for case in &cases {
            assert!(
                !case.relevance.iter().any(|&q| q >= lo && q < hi),
                "seed {seed}: T {} and grid T {grid_t} select different masks",
                exact.threshold
            );
        }
        nontrivial += usize::from(exact.threshold > 0.0);
    }
    assert!(nontrivial >= 3, "only {nontrivial} sets select a positive threshold");
}
