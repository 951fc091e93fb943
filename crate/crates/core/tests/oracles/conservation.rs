//! Mass conservation of the size matrices and normalization of every GLCM.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radfp_core::radiomics::{gldm_matrix, glcm_matrices, glrlm_matrices, glszm_matrix, DiscretizedPatch};

fn random_patch(rng: &mut ChaCha8Rng) -> DiscretizedPatch {
    loop {
        let dims = [rng.random_range(1..=6), rng.random_range(1..=6), rng.random_range(1..=6)];
        let n: usize = dims.iter().product();
        if n < 2 {
            continue;
        }
        let ng = rng.random_range(1..=8);
        let levels = (0..n).map(|_| rng.random_range(1..=ng) as u16).collect();
        return DiscretizedPatch::from_levels(dims, levels, ng).unwrap();
    }
}

pub fn matrices_conserve_voxels_and_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for n in 0..200 {
        let dp = random_patch(&mut rng);
        let voxels = dp.voxel_count() as f64;
        let glcms = glcm_matrices(&dp);
        assert!(!glcms.is_empty());
        for m in &glcms {
            let sum: f64 = m.probabilities().iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "patch {n} direction {:?}: {sum}", m.direction);
        }
        for (d, m) in glrlm_matrices(&dp).iter().enumerate() {
            assert_eq!(m.weighted_mass(), voxels, "patch {n} run direction {d}");
        }
        assert_eq!(glszm_matrix(&dp).weighted_mass(), voxels, "patch {n} zones");
        assert_eq!(gldm_matrix(&dp).total(), voxels, "patch {n} dependence");
    }
}
