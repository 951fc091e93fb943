//! Gray level size zone matrix: 26-connected zones of equal level.

use alloc::vec;
use alloc::vec::Vec;

use super::discretize::DiscretizedPatch;
use super::size_matrix::{SizeMatrix, SizeStats};

pub const COUNT: usize = 16;

pub fn glszm_matrix(dp: &DiscretizedPatch) -> SizeMatrix {
    let n = dp.voxel_count();
    let mut m = SizeMatrix::new(dp.n_levels(), n);
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for start in dp.coords() {
        let si = dp.index(start);
        if seen[si] {
            continue;
        }
        let level = dp.level(start);
        seen[si] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            for q in dp.neighbors(p) {
                let qi = dp.index(q);
                if !seen[qi] && dp.levels()[qi] == level {
                    seen[qi] = true;
                    stack.push(q);
                }
            }
        }
        m.add(level, size);
    }
    m
}

pub fn glszm_features(dp: &DiscretizedPatch) -> [f64; COUNT] {
    SizeStats::compute(&glszm_matrix(dp), dp.voxel_count()).as_sixteen()
}
