//! Central finite-difference verification of the analytic joint gradient.

use alloc::vec::Vec;

use super::fingerprint::weighted_fusion;
use super::joint::{clamped_bce, loss_and_gradients, sample_loss, FingerprintModel, Sample};
use super::real::sigmoid;
use super::Parameters;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub parameters: usize,
    /// max |a − n| / max(|a|, |n|, floor).
    pub max_relative_error: f64,
    /// (block, offset) of the worst parameter.
    pub worst: (usize, usize),
    pub analytic: f64,
    pub numeric: f64,
    /// Parameters whose step had to shrink because ±h crossed a ReLU kink.
    pub reduced_steps: usize,
    /// Parameters left unchecked: a kink stays inside even the smallest step.
    pub skipped: usize,
}

/// Smallest step tried when the stencil straddles a ReLU kink.
const MIN_STEP: f64 = 1e-7;

/// Compares the gradient of the mean loss over `samples` against central
/// differences with step `h`, for every parameter. Network parameters whose
/// stencil flips any ReLU are retried with smaller steps.
pub fn check_gradients(
    model: &FingerprintModel<f64>,
    samples: &[Sample<'_, f64>],
    h: f64,
    floor: f64,
) -> Result<GradCheckReport> {
    let w = 1.0 / samples.len() as f64;
    let mut grads = model.zero_gradients();
    for s in samples {
        loss_and_gradients(model, *s, &mut grads, w)?;
    }
    let analytic: Vec<Vec<f64>> = grads.blocks().iter().map(|b| b.to_vec()).collect();
    let mean_loss = |m: &FingerprintModel<f64>| -> Result<f64> {
        let mut acc = 0.0;
        for s in samples {
            acc += sample_loss(m, *s)?;
        }
        Ok(acc * w)
    };

    // Classifier perturbations leave q unchanged, so only R_ψ is re-evaluated.
    let cached: Vec<(Vec<f64>, Vec<usize>)> = samples
        .iter()
        .map(|s| {
            let q = model.relevance(s.roi)?;
            let active = model.classifier.active_set(&q);
            Ok((weighted_fusion(s.features, &q)?, active))
        })
        .collect::<Result<_>>()?;
    let classifier_loss = |m: &FingerprintModel<f64>| -> Result<f64> {
        let mut acc = 0.0;
        for ((fw, active), s) in cached.iter().zip(samples) {
            acc += clamped_bce(sigmoid(m.classifier.logit(fw, active)?), s.label);
        }
        Ok(acc * w)
    };
    let network_blocks = model.network.blocks().len();
    // Mean loss plus the on/off state of every ReLU, from one forward pass.
    let network_loss = |m: &FingerprintModel<f64>| -> Result<(f64, Vec<bool>)> {
        let (mut acc, mut pattern) = (0.0, Vec::new());
        for s in samples {
            let trace = m.network.forward_trace(s.roi)?;
            trace.activations[1..].iter().for_each(|a| pattern.extend(a.iter().map(|&v| v > 0.0)));
            let q = if m.config.selection { trace.relevance } else { alloc::vec![1.0; m.dim()] };
            let active = m.classifier.active_set(&q);
            acc += clamped_bce(sigmoid(m.classifier.logit(&weighted_fusion(s.features, &q)?, &active)?), s.label);
        }
        Ok((acc * w, pattern))
    };
    let (base_loss, base_pattern) = network_loss(model)?;
    debug_assert!((base_loss - mean_loss(model)?).abs() <= 1e-12 * base_loss.abs().max(1.0));

    let mut probe = model.clone();
    let mut report = GradCheckReport {
        parameters: 0,
        max_relative_error: 0.0,
        worst: (0, 0),
        analytic: 0.0,
        numeric: 0.0,
        reduced_steps: 0,
        skipped: 0,
    };
    for (b, block) in analytic.iter().enumerate() {
        let in_network = b < network_blocks;
        for (k, &a) in block.iter().enumerate() {
            let orig = probe.blocks()[b][k];
            let mut step = h;
            let numeric = loop {
                let eval = |m: &FingerprintModel<f64>| -> Result<(f64, bool)> {
                    if in_network {
                        let (loss, pattern) = network_loss(m)?;
                        Ok((loss, pattern == base_pattern))
                    } else {
                        Ok((classifier_loss(m)?, true))
                    }
                };
                probe.blocks_mut()[b][k] = orig + step;
                let (up, smooth_up) = eval(&probe)?;
                probe.blocks_mut()[b][k] = orig - step;
                let (down, smooth_down) = eval(&probe)?;
                probe.blocks_mut()[b][k] = orig;
                if smooth_up && smooth_down {
                    break Some((up - down) / (2.0 * step));
                }
                if step / 10.0 < MIN_STEP {
                    break None;
                }
                step /= 10.0;
            };
            if step < h {
                report.reduced_steps += 1;
            }
            let Some(n) = numeric else {
                report.skipped += 1;
                continue;
            };
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(floor);
            report.parameters += 1;
            if rel > report.max_relative_error {
                report = GradCheckReport { max_relative_error: rel, worst: (b, k), analytic: a, numeric: n, ..report };
            }
        }
    }
    Ok(report)
}

/// Gradient check on a seeded tiny configuration: ROI 4×8×8, one patch,
/// full interactions, random classifier parameters, a two-study batch.
pub fn check_tiny_configuration(seed: u64) -> Result<GradCheckReport> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::joint::ModelConfig;
    use super::standardize::StandardizationStats;
    use crate::volume::PatchGrid;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ModelConfig::new([4, 8, 8], PatchGrid::cube(1)?, 32);
    let dim = config.dim();
    let mut model = FingerprintModel::<f64>::init(config, StandardizationStats::identity(dim), &mut rng)?;
    model.classifier.bias[0] = rng.random_range(-0.2..0.2);
    model.classifier.linear.iter_mut().for_each(|t| *t = rng.random_range(-0.05..0.05));
    model.classifier.pairwise.iter_mut().for_each(|t| *t = rng.random_range(-0.002..0.002));
    model.network.dense.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));

    let roi_len = model.network.input_len();
    let features: Vec<Vec<f64>> = (0..2).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let rois: Vec<Vec<f64>> = (0..2).map(|_| (0..roi_len).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
    let samples: Vec<Sample<'_, f64>> =
        (0..2).map(|i| Sample { features: &features[i], roi: &rois[i], label: i as u8 }).collect();
    check_gradients(&model, &samples, 1e-4, 1e-6)
}
