//! First-order intensity statistics.

use alloc::vec::Vec;

use super::discretize::DiscretizedPatch;
use super::math::{entropy_term, sq, sqrt};
use crate::error::{Error, Result};
use crate::volume::Volume;

pub const COUNT: usize = 19;

/// Linear-interpolated percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo.min(sorted.len() - 1)]
    } else {
        sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac
    }
}

/// The 19 first-order statistics in catalog order. Entropy and Uniformity use
/// the gray-level histogram of `dp`, which must come from the same patch.
pub fn first_order_features(patch: &Volume, dp: &DiscretizedPatch) -> Result<[f64; COUNT]> {
    let x = patch.voxels();
    if x.is_empty() {
        return Err(Error::EmptyPatch);
    }
    let n = x.len() as f64;
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(f64::total_cmp);

    let energy: f64 = x.iter().map(|v| v * v).sum();
    let total_energy = patch.voxel_volume() * energy;
    let hist = dp.histogram();
    let total = dp.voxel_count() as f64;
    let entropy: f64 = hist.iter().map(|&c| entropy_term(c as f64 / total)).sum();
    let uniformity: f64 = hist.iter().map(|&c| sq(c as f64 / total)).sum();

    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let p10 = percentile(&sorted, 0.10);
    let p90 = percentile(&sorted, 0.90);
    let median = percentile(&sorted, 0.5);
    let iqr = percentile(&sorted, 0.75) - percentile(&sorted, 0.25);
    let mean = x.iter().sum::<f64>() / n;
    let mad = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;

    let robust: Vec<f64> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    // Interpolated percentiles of very small patches can bracket no voxel.
    let rmad = if robust.is_empty() {
        0.0
    } else {
        let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
        robust.iter().map(|v| (v - robust_mean).abs()).sum::<f64>() / robust.len() as f64
    };

    let rms = sqrt(energy / n);
    let (m2, m3, m4) = x.iter().fold((0.0, 0.0, 0.0), |(a, b, c), v| {
        let d = v - mean;
        let d2 = d * d;
        (a + d2, b + d2 * d, c + d2 * d2)
    });
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, kurtosis) = if m2 > 0.0 { (m3 / (m2 * sqrt(m2)), m4 / (m2 * m2)) } else { (0.0, 0.0) };

    Ok([
        energy,
        total_energy,
        entropy,
        min,
        p10,
        p90,
        max,
        mean,
        median,
        iqr,
        max - min,
        mad,
        rmad,
        rms,
        sqrt(m2),
        skewness,
        kurtosis,
        m2,
        uniformity,
    ])
}
