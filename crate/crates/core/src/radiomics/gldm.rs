//! Gray level dependence matrix with α = 0 over the 26-neighborhood.

use super::discretize::DiscretizedPatch;
use super::size_matrix::{SizeMatrix, SizeStats};

pub const COUNT: usize = 14;

/// Rows are gray levels, columns dependence sizes 1..=27 (equal neighbors + 1).
pub fn gldm_matrix(dp: &DiscretizedPatch) -> SizeMatrix {
    let mut m = SizeMatrix::new(dp.n_levels(), 27);
    for p in dp.coords() {
        let level = dp.level(p);
        let equal = dp.neighbors(p).filter(|&q| dp.level(q) == level).count();
        m.add(level, equal + 1);
    }
    m
}

pub fn gldm_features(dp: &DiscretizedPatch) -> [f64; COUNT] {
    let s = SizeStats::compute(&gldm_matrix(dp), dp.voxel_count());
    [
        s.small_emphasis,
        s.large_emphasis,
        s.gray_nonuniformity,
        s.size_nonuniformity,
        s.size_nonuniformity_norm,
        s.gray_variance,
        s.size_variance,
        s.entropy,
        s.low_gray,
        s.high_gray,
        s.small_low_gray,
        s.small_high_gray,
        s.large_low_gray,
        s.large_high_gray,
    ]
}
