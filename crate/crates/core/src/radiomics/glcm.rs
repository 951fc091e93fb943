//! Gray level co-occurrence matrices over the 13 distance-1 directions.

use alloc::vec;
use alloc::vec::Vec;

use super::discretize::{DiscretizedPatch, DIRECTIONS};
use super::eigen::symmetric_eigenvalues;
use super::math::{entropy_term, exp, log2, sq, sqrt};
use crate::error::{Error, Result};

pub const COUNT: usize = 24;

/// Symmetric co-occurrence counts for one direction; `counts[(i-1)*N_g + (j-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    pub direction: [isize; 3],
    pub n_levels: usize,
    pub counts: Vec<f64>,
}

impl Glcm {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total();
        self.counts.iter().map(|c| c / t).collect()
    }
}

/// One matrix per direction that has at least one in-bounds voxel pair.
pub fn glcm_matrices(dp: &DiscretizedPatch) -> Vec<Glcm> {
    let ng = dp.n_levels();
    let mut out = Vec::with_capacity(DIRECTIONS.len());
    for dir in DIRECTIONS {
        let mut counts = vec![0.0; ng * ng];
        let mut any = false;
        for p in dp.coords() {
            if let Some(q) = dp.step(p, dir, 1) {
                let (a, b) = (dp.level(p) as usize - 1, dp.level(q) as usize - 1);
                counts[a * ng + b] += 1.0;
                counts[b * ng + a] += 1.0;
                any = true;
            }
        }
        if any {
            out.push(Glcm { direction: dir, n_levels: ng, counts });
        }
    }
    out
}

/// The 24 features of one normalized, symmetric co-occurrence matrix.
pub fn glcm_matrix_features(p: &[f64], ng: usize) -> [f64; COUNT] {
    let at = |i: usize, j: usize| p[i * ng + j];
    // Levels are 1-based in every formula.
    let lvl = |i: usize| (i + 1) as f64;
    let px: Vec<f64> = (0..ng).map(|i| (0..ng).map(|j| at(i, j)).sum()).collect();
    let py: Vec<f64> = (0..ng).map(|j| (0..ng).map(|i| at(i, j)).sum()).collect();
    let ux: f64 = px.iter().enumerate().map(|(i, v)| lvl(i) * v).sum();
    let uy: f64 = py.iter().enumerate().map(|(j, v)| lvl(j) * v).sum();
    let sx = sqrt(px.iter().enumerate().map(|(i, v)| sq(lvl(i) - ux) * v).sum());
    let sy = sqrt(py.iter().enumerate().map(|(j, v)| sq(lvl(j) - uy) * v).sum());

    let mut sum_dist = vec![0.0; 2 * ng + 1]; // index k = i + j (1-based levels)
    let mut diff_dist = vec![0.0; ng]; // index k = |i - j|
    let (mut autocorr, mut prominence, mut shade, mut tendency, mut contrast) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut energy, mut joint_entropy, mut max_prob, mut sum_squares) = (0.0, 0.0, 0.0f64, 0.0);
    let (mut hxy1, mut hxy2) = (0.0, 0.0);
    for i in 0..ng {
        for j in 0..ng {
            let v = at(i, j);
            let pxy = px[i] * py[j];
            if pxy > 0.0 {
                hxy2 -= pxy * log2(pxy);
                if v > 0.0 {
                    hxy1 -= v * log2(pxy);
                }
            }
            if v == 0.0 {
                continue;
            }
            let (a, b) = (lvl(i), lvl(j));
            sum_dist[i + j + 2] += v;
            diff_dist[i.abs_diff(j)] += v;
            autocorr += a * b * v;
            let c = a + b - ux - uy;
            tendency += c * c * v;
            shade += c * c * c * v;
            prominence += c * c * c * c * v;
            contrast += (a - b) * (a - b) * v;
            energy += v * v;
            joint_entropy += entropy_term(v);
            max_prob = max_prob.max(v);
            sum_squares += (a - ux) * (a - ux) * v;
        }
    }
    let correlation = if sx * sy > 0.0 { (autocorr - ux * uy) / (sx * sy) } else { 1.0 };

    let diff_avg: f64 = diff_dist.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_entropy: f64 = diff_dist.iter().map(|&v| entropy_term(v)).sum();
    let diff_var: f64 = diff_dist.iter().enumerate().map(|(k, v)| sq(k as f64 - diff_avg) * v).sum();
    let n = ng as f64;
    let (mut idm, mut idmn, mut id, mut idn, mut inv_var) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &v) in diff_dist.iter().enumerate() {
        let k = k as f64;
        idm += v / (1.0 + k * k);
        idmn += v / (1.0 + k * k / (n * n));
        id += v / (1.0 + k);
        idn += v / (1.0 + k / n);
        if k > 0.0 {
            inv_var += v / (k * k);
        }
    }
    let sum_avg: f64 = sum_dist.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_entropy: f64 = sum_dist.iter().map(|&v| entropy_term(v)).sum();

    let hx: f64 = px.iter().map(|&v| entropy_term(v)).sum();
    let hy: f64 = py.iter().map(|&v| entropy_term(v)).sum();
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 { (joint_entropy - hxy1) / hmax } else { 0.0 };
    let imc2 = if hxy2 > joint_entropy { sqrt(1.0 - exp(-2.0 * (hxy2 - joint_entropy))) } else { 0.0 };

    [
        autocorr,
        ux,
        prominence,
        shade,
        tendency,
        contrast,
        correlation,
        diff_avg,
        diff_entropy,
        diff_var,
        energy,
        joint_entropy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inv_var,
        max_prob,
        sum_avg,
        sum_entropy,
        sum_squares,
        mcc(p, &px, ng),
    ]
}

/// Maximal correlation coefficient: square root of the second largest
/// eigenvalue of Q(i,j) = Σ_k p(i,k) p(j,k) / (px(i) px(k)). For a symmetric
/// matrix Q is similar to A², A = D^-1/2 P D^-1/2 over the occupied levels.
fn mcc(p: &[f64], px: &[f64], ng: usize) -> f64 {
    let occupied: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    let m = occupied.len();
    if m < 2 {
        return 1.0;
    }
    let mut a = vec![0.0; m * m];
    for (r, &i) in occupied.iter().enumerate() {
        for (c, &j) in occupied.iter().enumerate() {
            a[r * m + c] = p[i * ng + j] / sqrt(px[i] * px[j]);
        }
    }
    let mut squares: Vec<f64> = symmetric_eigenvalues(&mut a, m).iter().map(|e| e * e).collect();
    squares.sort_by(|x, y| y.total_cmp(x));
    sqrt(squares[1].min(1.0))
}

/// Direction-averaged GLCM features.
pub fn glcm_features(dp: &DiscretizedPatch) -> Result<[f64; COUNT]> {
    let mats = glcm_matrices(dp);
    if mats.is_empty() {
        return Err(Error::PatchTooSmall);
    }
    let mut acc = [0.0; COUNT];
    for m in &mats {
        let f = glcm_matrix_features(&m.probabilities(), m.n_levels);
        acc.iter_mut().zip(f).for_each(|(a, v)| *a += v);
    }
    Ok(acc.map(|v| v / mats.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_patch() {
        let dp = DiscretizedPatch::from_levels([2, 2, 2], vec![1; 8], 1).unwrap();
        let f = glcm_features(&dp).unwrap();
        assert_eq!(f[11], 0.0);
        assert_eq!(f[19], 1.0);
        assert_eq!(f[5], 0.0);
        assert_eq!(f[6], 1.0);
        assert_eq!(f[23], 1.0);
    }

    #[test]
    fn two_by_two_slab() {
        // Rows [1,1] and [2,2] in a 1×2×2 patch.
        let dp = DiscretizedPatch::from_levels([1, 2, 2], vec![1, 1, 2, 2], 2).unwrap();
        let mats = glcm_matrices(&dp);
        // Only in-plane directions have pairs.
        assert_eq!(mats.len(), 4);
        let along_x = mats.iter().find(|m| m.direction == [0, 0, 1]).unwrap();
        assert_eq!(along_x.counts, vec![2.0, 0.0, 0.0, 2.0]);
        let along_y = mats.iter().find(|m| m.direction == [0, 1, 0]).unwrap();
        assert_eq!(along_y.counts, vec![0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let levels = (0..27).map(|i| (i % 3 + 1) as u16).collect();
        let dp = DiscretizedPatch::from_levels([3, 3, 3], levels, 3).unwrap();
        for m in glcm_matrices(&dp) {
            assert!((m.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_voxel_is_too_small() {
        let dp = DiscretizedPatch::from_levels([1, 1, 1], vec![1], 1).unwrap();
        assert_eq!(glcm_features(&dp), Err(Error::PatchTooSmall));
    }
}
