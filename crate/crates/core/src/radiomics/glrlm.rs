//! Gray level run length matrices over the 13 directions.

use alloc::vec::Vec;

use super::discretize::{DiscretizedPatch, DIRECTIONS};
use super::size_matrix::{SizeMatrix, SizeStats};

pub const COUNT: usize = 16;

/// One run-length matrix per direction, in [`DIRECTIONS`] order.
pub fn glrlm_matrices(dp: &DiscretizedPatch) -> Vec<SizeMatrix> {
    let max_run = dp.dims().into_iter().max().unwrap_or(1);
    DIRECTIONS
        .iter()
        .map(|&dir| {
            let mut m = SizeMatrix::new(dp.n_levels(), max_run);
            for p in dp.coords() {
                let level = dp.level(p);
                // Only start a run where the previous voxel differs or is outside.
                if dp.step(p, dir, -1).is_some_and(|q| dp.level(q) == level) {
                    continue;
                }
                let mut len = 1;
                while dp.step(p, dir, len as isize).is_some_and(|q| dp.level(q) == level) {
                    len += 1;
                }
                m.add(level, len);
            }
            m
        })
        .collect()
}

/// Direction-averaged run-length features.
pub fn glrlm_features(dp: &DiscretizedPatch) -> [f64; COUNT] {
    let mats = glrlm_matrices(dp);
    let mut acc = [0.0; COUNT];
    for m in &mats {
        let f = SizeStats::compute(m, dp.voxel_count()).as_sixteen();
        acc.iter_mut().zip(f).for_each(|(a, v)| *a += v);
    }
    acc.map(|v| v / mats.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_rod() {
        let dp = DiscretizedPatch::from_levels([1, 1, 4], vec![1; 4], 1).unwrap();
        let mats = glrlm_matrices(&dp);
        assert_eq!(mats[0].get(1, 4), 1.0);
        assert_eq!(mats[0].total(), 1.0);
        let s = SizeStats::compute(&mats[0], 4);
        assert_eq!(s.percentage, 0.25);
        // Every other direction crosses the rod: four runs of length 1.
        assert!(mats[1..].iter().all(|m| m.get(1, 1) == 4.0));
    }

    #[test]
    fn distinct_rod_has_unit_runs() {
        let dp = DiscretizedPatch::from_levels([1, 1, 4], vec![1, 2, 3, 4], 4).unwrap();
        let m = &glrlm_matrices(&dp)[0];
        assert_eq!(m.total(), 4.0);
        assert_eq!(SizeStats::compute(m, 4).small_emphasis, 1.0);
    }

    #[test]
    fn run_mass_is_voxel_count() {
        let levels = (0..60).map(|i| ((i * 7 + i / 5) % 3 + 1) as u16).collect();
        let dp = DiscretizedPatch::from_levels([3, 4, 5], levels, 3).unwrap();
        for m in glrlm_matrices(&dp) {
            assert_eq!(m.weighted_mass(), 60.0);
        }
    }
}
