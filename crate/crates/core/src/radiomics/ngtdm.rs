//! Neighbouring gray tone difference matrix over the 26-neighborhood.

use alloc::vec;
use alloc::vec::Vec;

use super::discretize::DiscretizedPatch;

pub const COUNT: usize = 5;

/// Coarseness when every s_i is zero.
pub const COARSENESS_CAP: f64 = 1e6;

/// Per-level voxel counts `n` (voxels with at least one neighbor) and summed
/// absolute differences `s` to the neighborhood mean. Index 0 is level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm {
    pub n: Vec<f64>,
    pub s: Vec<f64>,
}

pub fn ngtdm_matrix(dp: &DiscretizedPatch) -> Ngtdm {
    let mut n = vec![0.0; dp.n_levels()];
    let mut s = vec![0.0; dp.n_levels()];
    for p in dp.coords() {
        let (count, sum) = dp.neighbors(p).fold((0usize, 0.0), |(c, acc), q| (c + 1, acc + dp.level(q) as f64));
        if count == 0 {
            continue;
        }
        let level = dp.level(p);
        let i = level as usize - 1;
        n[i] += 1.0;
        s[i] += (level as f64 - sum / count as f64).abs();
    }
    Ngtdm { n, s }
}

pub fn ngtdm_matrix_features(m: &Ngtdm) -> [f64; COUNT] {
    let nvp: f64 = m.n.iter().sum();
    if nvp == 0.0 {
        return [COARSENESS_CAP, 0.0, 0.0, 0.0, 0.0];
    }
    let p: Vec<f64> = m.n.iter().map(|c| c / nvp).collect();
    let occupied: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let ngp = occupied.len() as f64;
    let lvl = |i: usize| (i + 1) as f64;
    let ps_sum: f64 = occupied.iter().map(|&i| p[i] * m.s[i]).sum();
    let s_sum: f64 = m.s.iter().sum();

    let coarseness = if ps_sum > 0.0 { 1.0 / ps_sum } else { COARSENESS_CAP };
    let (mut pair_sq, mut busy_den, mut complexity, mut strength) = (0.0, 0.0, 0.0, 0.0);
    for &i in &occupied {
        for &j in &occupied {
            let d = lvl(i) - lvl(j);
            pair_sq += p[i] * p[j] * d * d;
            busy_den += (lvl(i) * p[i] - lvl(j) * p[j]).abs();
            complexity += d.abs() * (p[i] * m.s[i] + p[j] * m.s[j]) / (p[i] + p[j]);
            strength += (p[i] + p[j]) * d * d;
        }
    }
    let contrast = if ngp > 1.0 { pair_sq / (ngp * (ngp - 1.0)) * s_sum / nvp } else { 0.0 };
    let busyness = if busy_den > 0.0 { ps_sum / busy_den } else { 0.0 };
    let strength = if s_sum > 0.0 { strength / s_sum } else { 0.0 };
    [coarseness, contrast, busyness, complexity / nvp, strength]
}

pub fn ngtdm_features(dp: &DiscretizedPatch) -> [f64; COUNT] {
    ngtdm_matrix_features(&ngtdm_matrix(dp))
}
